"""
Winner-take-all block matching over hint-guided candidate sets.

Rectified convention: left pixel ``(x, y)`` matches right pixel
``(x, y - d)``. Blocks are ``(2r+1) x (2r+1)``, coordinates are clamped at
the borders, and fractional right-image columns are linearly interpolated
along the row. A block whose shifted column span lies entirely outside the
right image costs ``+inf``. No aggregation or smoothing is applied.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import DisparityMap, GuidanceParams, HintMap, as_hint_map, to_gray
from .guidance import candidate_grid, compute_range

COSTS = ("sad", "zncc")


@dataclass(frozen=True)
class MatchParams:
    block_radius: int = 2
    n_candidates: int = 16
    cost: str = "sad"
    guidance: GuidanceParams = field(default_factory=GuidanceParams)

    def __post_init__(self):
        if self.block_radius < 1:
            raise ValueError(f"block_radius must be >= 1, got {self.block_radius}")
        if self.n_candidates < 2:
            raise ValueError(f"n_candidates must be >= 2, got {self.n_candidates}")
        if self.cost not in COSTS:
            raise ValueError(f"cost must be one of {COSTS}, got {self.cost!r}")


def _sample_row(row: np.ndarray, col: float) -> float:
    width = len(row)
    c = min(max(col, 0.0), width - 1.0)
    c0 = int(np.floor(c))
    t = c - c0
    c1 = min(c0 + 1, width - 1)
    return row[c0] * (1.0 - t) + row[c1] * t


def _zncc_terms(lv, rv):
    """Sequential sums shared by the scalar and vectorized paths (bit-identical)."""
    n = len(lv)
    ma, mb = 0.0, 0.0
    for a, b in zip(lv, rv):
        ma = ma + a
        mb = mb + b
    ma = ma / n
    mb = mb / n
    saa, sbb, sab = 0.0, 0.0, 0.0
    for a, b in zip(lv, rv):
        da = a - ma
        db = b - mb
        saa = saa + da * da
        sbb = sbb + db * db
        sab = sab + da * db
    return saa, sbb, sab


def match_cost(left, right, x: int, y: int, d: float, p: MatchParams = MatchParams()) -> float:
    """Dissimilarity of the left block at (x, y) and the right block at (x, y - d).

    SAD sums absolute differences; ZNCC returns ``1 - zncc`` (in [0, 2]).
    """
    if d < 0:
        raise ValueError(f"disparity must be >= 0, got {d}")
    left = to_gray(left)
    right = to_gray(right)
    rows, cols = left.shape
    r = p.block_radius
    centre = y - d
    if centre + r < 0 or centre - r > cols - 1:
        return float("inf")
    lv, rv = [], []
    for dr in range(-r, r + 1):
        xr = min(max(x + dr, 0), rows - 1)
        for dc in range(-r, r + 1):
            yl = min(max(y + dc, 0), cols - 1)
            lv.append(left[xr, yl])
            rv.append(_sample_row(right[xr], y + dc - d))
    if p.cost == "sad":
        total = 0.0
        for a, b in zip(lv, rv):
            total += abs(a - b)
        return float(total)
    saa, sbb, sab = _zncc_terms(lv, rv)
    denom = np.sqrt(saa * sbb)
    if denom < 1e-12:
        return 1.0
    return float(1.0 - sab / denom)


def _block_samples(left, right, disp, r):
    """Left and right block samples for a per-pixel disparity map, ``(K, H, W)`` each."""
    rows, cols = left.shape
    xs = np.arange(rows)[:, None]
    ys = np.arange(cols)[None, :]
    lv, rv = [], []
    for dr in range(-r, r + 1):
        xr = np.clip(xs + dr, 0, rows - 1)
        for dc in range(-r, r + 1):
            yl = np.clip(ys + dc, 0, cols - 1)
            lv.append(np.broadcast_to(left[xr, yl], (rows, cols)))
            c = np.clip(ys + dc - disp, 0.0, cols - 1.0)
            c0 = np.floor(c).astype(np.int64)
            t = c - c0
            c1 = np.minimum(c0 + 1, cols - 1)
            xr_full = np.broadcast_to(xr, (rows, cols))
            rv.append(right[xr_full, c0] * (1.0 - t) + right[xr_full, c1] * t)
    return lv, rv


def cost_map(left, right, disp, p: MatchParams = MatchParams()) -> np.ndarray:
    """Cost of every pixel at its own disparity ``disp[x, y]``."""
    left = to_gray(left)
    right = to_gray(right)
    disp = np.asarray(disp, dtype=np.float64)
    rows, cols = left.shape
    r = p.block_radius
    lv, rv = _block_samples(left, right, disp, r)
    if p.cost == "sad":
        total = np.zeros((rows, cols))
        for a, b in zip(lv, rv):
            total += np.abs(a - b)
    else:
        saa, sbb, sab = _zncc_terms(lv, rv)
        denom = np.sqrt(saa * sbb)
        with np.errstate(invalid="ignore", divide="ignore"):
            total = np.where(denom < 1e-12, 1.0, 1.0 - sab / denom)
    centre = np.arange(cols)[None, :] - disp
    outside = (centre + r < 0) | (centre - r > cols - 1)
    return np.where(outside, np.inf, total)


def guided_match(left, right, h=None, p: MatchParams = MatchParams()) -> DisparityMap:
    """Per-pixel argmin over ``n_candidates`` samples of the hint-guided range.

    Ties go to the smallest candidate. Pixels whose every candidate costs
    ``+inf`` are marked invalid.
    """
    left = to_gray(left)
    right = to_gray(right)
    if left.shape != right.shape:
        raise ValueError(f"left {left.shape} and right {right.shape} differ in size")
    if h is None:
        h = HintMap.zeros(*left.shape)
    h = as_hint_map(h)
    if h.shape != left.shape:
        raise ValueError(f"hints {h.shape} and images {left.shape} differ in size")
    cands = candidate_grid(compute_range(h, p.guidance), p.n_candidates)
    best = np.full(left.shape, np.inf)
    best_d = cands[..., 0].copy()
    for k in range(p.n_candidates):
        d = cands[..., k]
        cost = cost_map(left, right, d, p)
        better = cost < best
        best = np.where(better, cost, best)
        best_d = np.where(better, d, best_d)
    return DisparityMap(best_d, np.isfinite(best))


def baseline_match(left, right, p: MatchParams = MatchParams()) -> DisparityMap:
    """Full-range matching with the same candidate count and no hints."""
    return guided_match(left, right, None, p)
