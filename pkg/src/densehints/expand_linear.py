"""
Patch-wise linear hint expansion.

The map is cut into complete, non-overlapping ``W x W`` tiles (ragged
right/bottom remainders are left alone). Inside a tile holding at least
three hints, every row with two or more hints is replaced by the
piecewise-linear interpolant through them, then every column of the result
gets the same treatment. Each tile goes through that densification twice,
and :func:`expand_linear_multi` repeats the whole procedure for a sequence
of tile sizes.

``fill_mode="clamped"`` extends a line beyond its outermost hints with the
nearest hint value (a full-line fill); ``"between"`` fills only between the
outermost hints.
"""

import numpy as np

from .core import HintMap, LinearParams, as_hint_map

FILL_MODES = ("clamped", "between")


def _interp_lines(lines: np.ndarray, fill_mode: str) -> np.ndarray:
    """Interpolate each row of ``lines`` through its positive entries.

    Rows must each hold at least one positive entry.
    """
    n, width = lines.shape
    knots = lines > 0
    idx = np.broadcast_to(np.arange(width), (n, width))
    prev = np.maximum.accumulate(np.where(knots, idx, -1), axis=1)
    nxt = np.minimum.accumulate(np.where(knots, idx, width)[:, ::-1], axis=1)[:, ::-1]

    rows = np.arange(n)[:, None]
    before = prev < 0
    after = nxt >= width
    inner = ~before & ~after
    lo = np.where(before, nxt, prev)
    hi = np.where(after, prev, nxt)
    v_lo = lines[rows, np.clip(lo, 0, width - 1)]
    v_hi = lines[rows, np.clip(hi, 0, width - 1)]

    out = np.array(lines, copy=True)
    span = hi - lo
    between = inner & (span > 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        slope = (v_hi - v_lo) / span
        interp = slope * (idx - lo) + v_lo
    out[between] = interp[between]
    if fill_mode == "clamped":
        out[before] = v_hi[before]
        out[after] = v_lo[after]
    return out


def _densify_tiles(tiles: np.ndarray, fill_mode: str) -> np.ndarray:
    """One row-then-column densification of a stack of square tiles."""
    count, w, _ = tiles.shape
    out = np.array(tiles, copy=True)
    active = np.count_nonzero(tiles.reshape(count, -1), axis=1) >= 3
    if not active.any():
        return out
    work = tiles[active]

    rows = work.reshape(-1, w)
    pick = np.count_nonzero(rows, axis=1) >= 2
    dense = np.array(rows, copy=True)
    if pick.any():
        dense[pick] = _interp_lines(rows[pick], fill_mode)
    dense = dense.reshape(-1, w, w)

    cols = dense.transpose(0, 2, 1).reshape(-1, w)
    pick = np.count_nonzero(cols, axis=1) >= 2
    if pick.any():
        cols = np.array(cols, copy=True)
        cols[pick] = _interp_lines(cols[pick], fill_mode)
    out[active] = cols.reshape(-1, w, w).transpose(0, 2, 1)
    return out


def densify_patch(patch, fill_mode: str = "clamped") -> np.ndarray:
    """Single row-then-column densification of one square patch.

    Patches with fewer than three hints come back unchanged.
    """
    patch = np.asarray(patch, dtype=np.float64)
    if patch.ndim != 2 or patch.shape[0] != patch.shape[1]:
        raise ValueError(f"patch must be square, got shape {patch.shape}")
    if fill_mode not in FILL_MODES:
        raise ValueError(f"fill_mode must be one of {FILL_MODES}, got {fill_mode!r}")
    return _densify_tiles(patch[None], fill_mode)[0]


def expand_linear(h, window: int, fill_mode: str = "clamped") -> HintMap:
    """Densify every complete ``window x window`` tile twice over."""
    window = int(window)
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window}")
    if fill_mode not in FILL_MODES:
        raise ValueError(f"fill_mode must be one of {FILL_MODES}, got {fill_mode!r}")
    h = as_hint_map(h)
    out = h.copy_values()
    th, tw = h.height // window, h.width // window
    if th == 0 or tw == 0:
        return HintMap(out)
    body = out[: th * window, : tw * window]
    tiles = body.reshape(th, window, tw, window).transpose(0, 2, 1, 3).reshape(-1, window, window)
    nnz = np.count_nonzero(tiles.reshape(len(tiles), -1), axis=1)
    busy = np.flatnonzero(nnz >= 3)
    if len(busy):
        done = _densify_tiles(_densify_tiles(tiles[busy], fill_mode), fill_mode)
        tiles[busy] = done
        body[...] = tiles.reshape(th, tw, window, window).transpose(0, 2, 1, 3).reshape(body.shape)
    return HintMap(out)


def expand_linear_multi(h, params: LinearParams = LinearParams()) -> HintMap:
    """Apply :func:`expand_linear` once per window size, in order."""
    out = as_hint_map(h)
    for window in params.windows:
        out = expand_linear(out, window, params.fill_mode)
    return out
