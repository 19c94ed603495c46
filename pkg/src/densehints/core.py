"""
Shared domain types and parameter sets.

Index convention: arrays are row-major with ``x`` the row and ``y`` the
column, so a hint at ``(x, y)`` lives in ``values[x, y]``. A hint value of
``0`` means "no hint"; every other value is a disparity in pixels.
"""

from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

EMPTY = 0.0


def _frozen(arr, dtype):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class HintMap:
    """Sparse per-pixel disparity hints (0 = absent)."""

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.values, np.float64)
        if arr.ndim != 2:
            raise ValueError(f"hint map must be 2-D, got shape {arr.shape}")
        object.__setattr__(self, "values", arr)

    @classmethod
    def zeros(cls, height: int, width: int) -> "HintMap":
        return cls(np.zeros((height, width)))

    @classmethod
    def from_points(cls, shape, xs, ys, ds) -> "HintMap":
        arr = np.zeros(shape)
        arr[np.asarray(xs, dtype=int), np.asarray(ys, dtype=int)] = ds
        return cls(arr)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def mask(self) -> np.ndarray:
        """Presence mask ``values > 0``."""
        return self.values > 0

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.values))

    def copy_values(self) -> np.ndarray:
        """Writable copy of the underlying array."""
        return np.array(self.values, copy=True)

    def __eq__(self, other):
        if not isinstance(other, HintMap):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.values, other.values)


@dataclass(frozen=True, eq=False)
class DisparityMap:
    """Dense disparity with a validity mask.

    Non-finite values are always invalid, whatever mask is passed in.
    """

    values: np.ndarray
    valid: Optional[np.ndarray] = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.ndim != 2:
            raise ValueError(f"disparity map must be 2-D, got shape {vals.shape}")
        if self.valid is None:
            mask = np.isfinite(vals)
        else:
            mask = np.array(self.valid, dtype=bool, copy=True)
            if mask.shape != vals.shape:
                raise ValueError(f"mask shape {mask.shape} does not match values {vals.shape}")
            mask &= np.isfinite(vals)
        vals.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "valid", mask)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class RgbImage:
    """3-channel image with channels in [0, 1]. Integer input is divided by 255."""

    values: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.values)
        if raw.ndim != 3 or raw.shape[2] != 3:
            raise ValueError(f"RGB image must have shape (H, W, 3), got {raw.shape}")
        if np.issubdtype(raw.dtype, np.integer):
            arr = raw.astype(np.float64) / 255.0
        else:
            arr = raw.astype(np.float64)
        if not np.all(np.isfinite(arr)) or arr.min(initial=0.0) < 0.0 or arr.max(initial=0.0) > 1.0:
            raise ValueError("RGB channel values must lie in [0, 1]")
        object.__setattr__(self, "values", _frozen(arr, np.float64))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape[:2]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def gray(self) -> np.ndarray:
        """Luma (ITU-R BT.601 weights)."""
        return to_gray(self.values)


def to_gray(rgb) -> np.ndarray:
    """Luma of an RGB array or :class:`RgbImage`; 2-D input passes through."""
    if isinstance(rgb, RgbImage):
        rgb = rgb.values
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.ndim == 2:
        return rgb
    return rgb[..., 0] * 0.299 + rgb[..., 1] * 0.587 + rgb[..., 2] * 0.114


def as_hint_map(h) -> HintMap:
    return h if isinstance(h, HintMap) else HintMap(h)


def as_disparity_map(d) -> DisparityMap:
    return d if isinstance(d, DisparityMap) else DisparityMap(d)


def as_rgb_image(img) -> RgbImage:
    return img if isinstance(img, RgbImage) else RgbImage(img)


@dataclass(frozen=True)
class GraphParams:
    """Random-geometric-graph expansion settings.

    ``radius`` is a 3-D Euclidean radius over (row, col, disparity), all in
    pixels. ``sort_key`` selects the edge ordering: ``"3d"`` sorts by
    volumetric distance, ``"2d"`` by image-plane distance.
    """

    radius: float = 8.0
    color_tau: float = 0.9
    sort_key: str = "3d"

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")
        if not 0.0 <= self.color_tau <= 1.0:
            raise ValueError(f"color_tau must be in [0, 1], got {self.color_tau}")
        if self.sort_key not in ("3d", "2d"):
            raise ValueError(f"sort_key must be '3d' or '2d', got {self.sort_key!r}")


@dataclass(frozen=True)
class LinearParams:
    windows: Tuple[int, ...] = (8, 16)
    fill_mode: str = "clamped"

    def __post_init__(self):
        windows = tuple(int(w) for w in self.windows)
        if not windows:
            raise ValueError("windows must be non-empty")
        if any(w < 2 for w in windows):
            raise ValueError(f"every window must be >= 2, got {windows}")
        if self.fill_mode not in ("clamped", "between"):
            raise ValueError(f"fill_mode must be 'clamped' or 'between', got {self.fill_mode!r}")
        object.__setattr__(self, "windows", windows)


@dataclass(frozen=True)
class GuidanceParams:
    """Search-range, cost-modulation and confidence-filter settings.

    ``shift_sign`` is the sign applied to the disparity when looking up the
    matching right-view column in the confidence filter (+1 adds the
    disparity to the column; rectified pairs usually need -1).
    """

    alpha: float = 0.2
    d_min: float = 0.0
    d_max: float = 192.0
    k: float = 10.0
    c: float = 1.0
    conf_tau: float = 0.9
    shift_sign: int = 1

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must be in [0, 1), got {self.alpha}")
        if not 0.0 <= self.d_min < self.d_max:
            raise ValueError(f"need 0 <= d_min < d_max, got ({self.d_min}, {self.d_max})")
        if not self.k > 0:
            raise ValueError(f"k must be > 0, got {self.k}")
        if not self.c > 0:
            raise ValueError(f"c must be > 0, got {self.c}")
        if not 0.0 <= self.conf_tau <= 1.0:
            raise ValueError(f"conf_tau must be in [0, 1], got {self.conf_tau}")
        if self.shift_sign not in (1, -1):
            raise ValueError(f"shift_sign must be +1 or -1, got {self.shift_sign}")


class Violation(NamedTuple):
    pixel: Tuple[int, int]
    rule: str

    def __str__(self):
        return f"({self.pixel[0]}, {self.pixel[1]}): {self.rule}"


RULE_FINITE = "values must be finite"
RULE_POSITIVE = "nonzero values must be positive"
RULE_SHAPE = "dimensions must match the attached image"


def validate_hint_map(h, image_shape: Optional[Sequence[int]] = None) -> List[Violation]:
    """Return every invariant breach of ``h``; empty means valid."""
    values = h.values if isinstance(h, HintMap) else np.asarray(h, dtype=np.float64)
    out: List[Violation] = []
    if image_shape is not None and tuple(image_shape[:2]) != values.shape:
        out.append(Violation((-1, -1), RULE_SHAPE))
    bad = ~np.isfinite(values)
    for x, y in np.argwhere(bad):
        out.append(Violation((int(x), int(y)), RULE_FINITE))
    with np.errstate(invalid="ignore"):
        neg = np.isfinite(values) & (values < 0)
    for x, y in np.argwhere(neg):
        out.append(Violation((int(x), int(y)), RULE_POSITIVE))
    return out


def density(h) -> float:
    """Fraction of cells holding a hint."""
    values = h.values if isinstance(h, HintMap) else np.asarray(h)
    if values.size == 0:
        raise ValueError("empty map")
    return np.count_nonzero(values) / values.size


# Per-dataset radius presets (image size noted for reference).
PRESETS = {
    "sceneflow": GraphParams(radius=8.0),   # 256x512
    "tartan": GraphParams(radius=25.0),     # 480x640
    "eth3d": GraphParams(radius=8.0),       # 544x960
    "kitti": GraphParams(radius=20.0),      # 368x1232
}
