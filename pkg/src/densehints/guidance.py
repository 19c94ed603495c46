"""
Hint-driven guidance: per-pixel search ranges, Gaussian cost-volume
modulation, and descriptor-based confidence filtering of hints.

Cost volumes here have similarity polarity (higher is better) and shape
``(H, W, D)`` with disparity levels ``d_min, d_min + 1, ..., d_max``.
Negate cost-polarity volumes before modulating them.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import GuidanceParams, HintMap, as_hint_map


@dataclass(frozen=True, eq=False)
class GuidanceRange:
    low: np.ndarray
    high: np.ndarray

    @property
    def shape(self):
        return self.low.shape


def compute_range(h, params: GuidanceParams = GuidanceParams()) -> GuidanceRange:
    """``[h(1-alpha), h(1+alpha)]`` at hints, ``[d_min, d_max]`` elsewhere, clamped."""
    values = as_hint_map(h).values
    hinted = values > 0
    low = np.where(hinted, values * (1.0 - params.alpha), params.d_min)
    high = np.where(hinted, values * (1.0 + params.alpha), params.d_max)
    low = np.clip(low, params.d_min, params.d_max)
    high = np.clip(high, params.d_min, params.d_max)
    return GuidanceRange(low, high)


def _spaced(low, high, n: int):
    """Uniform spacing with the same arithmetic as ``np.linspace``."""
    if n == 1:
        return ((low + high) / 2.0)[..., None]
    step = (high - low) / (n - 1)
    out = low[..., None] + np.arange(n) * step[..., None]
    out[..., -1] = high
    return out


def sample_candidates(r: GuidanceRange, x: int, y: int, n: int) -> List[float]:
    """``n`` evenly spaced disparities over ``[low, high]`` at pixel (x, y)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    low = np.asarray(r.low[x, y], dtype=np.float64)
    high = np.asarray(r.high[x, y], dtype=np.float64)
    return [float(v) for v in _spaced(low, high, n)]


def candidate_grid(r: GuidanceRange, n: int) -> np.ndarray:
    """All pixels' candidates at once, shape ``(H, W, n)``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return _spaced(np.asarray(r.low, dtype=np.float64), np.asarray(r.high, dtype=np.float64), n)


def disparity_levels(params: GuidanceParams) -> np.ndarray:
    lo, hi = float(params.d_min), float(params.d_max)
    if lo != int(lo) or hi != int(hi):
        raise ValueError("cost volume levels need integer d_min and d_max")
    return np.arange(int(lo), int(hi) + 1, dtype=np.float64)


def modulation_factor(h, params: GuidanceParams = GuidanceParams()) -> np.ndarray:
    """Per-pixel, per-level multiplier ``1 - V + V k exp(-(d - h)^2 / 2c)``."""
    values = as_hint_map(h).values
    levels = disparity_levels(params)
    hinted = (values > 0)[..., None]
    gauss = params.k * np.exp(-((levels - values[..., None]) ** 2) / (2.0 * params.c))
    return np.where(hinted, gauss, 1.0)


def modulate_cost_volume(volume, h, params: GuidanceParams = GuidanceParams()) -> np.ndarray:
    """Gaussian-boost the levels around each hint; unhinted pixels pass through."""
    volume = np.asarray(volume, dtype=np.float64)
    h = as_hint_map(h)
    levels = disparity_levels(params)
    if volume.ndim != 3 or volume.shape[:2] != h.shape or volume.shape[2] != len(levels):
        raise ValueError(
            f"cost volume shape {volume.shape} does not match hints {h.shape} "
            f"with {len(levels)} disparity levels"
        )
    return modulation_factor(h, params) * volume


def confidence(h, f_left, f_right, shift_sign: int = 1) -> np.ndarray:
    """``1 - tanh(|fL(x, y) - fR(x, y + s round(h))|^2)`` at hints, 0 elsewhere.

    Lookups that leave the image score 0.
    """
    values = as_hint_map(h).values
    f_left = np.asarray(f_left, dtype=np.float64)
    f_right = np.asarray(f_right, dtype=np.float64)
    if f_left.shape[:2] != values.shape or f_right.shape != f_left.shape:
        raise ValueError(
            f"feature maps {f_left.shape} / {f_right.shape} do not match hints {values.shape}"
        )
    conf = np.zeros(values.shape)
    xs, ys = np.nonzero(values > 0)
    cols = ys + shift_sign * np.rint(values[xs, ys]).astype(np.int64)
    inside = (cols >= 0) & (cols < values.shape[1])
    xs, ys, cols = xs[inside], ys[inside], cols[inside]
    diff = f_left[xs, ys] - f_right[xs, cols]
    conf[xs, ys] = 1.0 - np.tanh(np.sum(diff * diff, axis=-1))
    return conf


def confidence_filter(
    h, f_left, f_right, conf_tau: float = 0.9, shift_sign: int = 1
) -> Tuple[HintMap, np.ndarray]:
    """Drop hints whose confidence does not exceed ``conf_tau``."""
    h = as_hint_map(h)
    conf = confidence(h, f_left, f_right, shift_sign)
    keep = (conf > conf_tau) & (h.values > 0)
    return HintMap(np.where(keep, h.values, 0.0)), conf


def canonical_descriptor(length: int) -> np.ndarray:
    """Unit vector used for constant windows: all entries ``1/sqrt(length)``."""
    return np.full(length, 1.0 / np.sqrt(length))


def patch_descriptor(gray, window: int = 5) -> np.ndarray:
    """Zero-mean, unit-norm flattened ``window x window`` patch per pixel.

    Borders are clamped (edge replication). Shape ``(H, W, window**2)``.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    gray = np.asarray(gray, dtype=np.float64)
    if gray.ndim != 2:
        raise ValueError(f"expected a grayscale image, got shape {gray.shape}")
    r = window // 2
    padded = np.pad(gray, r, mode="edge")
    patches = sliding_window_view(padded, (window, window)).reshape(*gray.shape, window * window)
    centered = patches - patches.mean(axis=-1, keepdims=True)
    norm = np.sqrt(np.sum(centered * centered, axis=-1, keepdims=True))
    flat = norm < 1e-9
    out = np.where(flat, canonical_descriptor(window * window), centered / np.where(flat, 1.0, norm))
    return out
