"""
Seeded piecewise-planar stereo scenes with ground truth.

Everything random is drawn from :class:`~densehints.rng.SplitMix64`, one
stream per purpose, so a scene is a pure function of its ``SceneSpec``.

Scene layout: plane 0 covers the whole frame; planes 1..n-1 are random
star-shaped polygons painted far-to-near (ascending centre disparity).
Plane ``k`` has disparity ``c_k + a_k (x - cx_k) + b_k (y - cy_k)`` clipped
to ``[d_min, d_max]`` and an RGB tint that multiplies a grayscale texture.

Textures (``gradient`` and ``checker`` also carry a little per-pixel noise):

* ``noise``: a flat 0.6 field with sparse speckled clumps, roughly one per
  30000 pixels. Hints then sit in tight clusters, which is what lets a
  3-D neighbourhood graph find edges at very low densities.
* ``gradient``: a per-plane linear ramp.
* ``checker``: a checkerboard with 6-16 px cells.
* ``random``: Gaussian-smoothed (sigma 1 px) uniform noise with standard
  deviation 0.15 around 0.5. Textured everywhere and band-limited, so the
  linear resampling in :func:`warp_right` and in the matcher stays
  faithful; the one to use for matching experiments.

Hint sampling is biased towards image structure: pixel weights are the
gradient magnitude of the left luma under the 3x3 Scharr pair

    gx = [[-3, 0, 3], [-10, 0, 10], [-3, 0, 3]] / 32,   gy = gx.T

(edge-replicated borders), and pixels are drawn without replacement with
Efraimidis-Spirakis keys ``log(u) / w``.
"""

from dataclasses import asdict, dataclass, fields
from typing import Tuple

import numpy as np
from scipy import ndimage

from .core import DisparityMap, HintMap, RgbImage, as_disparity_map, as_rgb_image, to_gray
from .rng import SplitMix64

TEXTURES = ("noise", "gradient", "checker", "random")

STREAM_PLANES = 1
STREAM_TEXTURE = 2
STREAM_HINTS = 3
STREAM_NOISE = 4
STREAM_BACKGROUND = 5

MIN_HINT = 1e-3
_FINE_AMPLITUDE = 0.08

SCHARR_X = np.array([[-3.0, 0.0, 3.0], [-10.0, 0.0, 10.0], [-3.0, 0.0, 3.0]]) / 32.0
SCHARR_Y = SCHARR_X.T


@dataclass(frozen=True)
class SceneSpec:
    seed: int = 0
    height: int = 240
    width: int = 320
    n_planes: int = 4
    d_min: float = 4.0
    d_max: float = 48.0
    texture: str = "noise"
    density: float = 0.005
    noise_sigma: float = 0.0
    max_slope: float = 0.05

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ValueError(f"dimensions must be positive, got {self.height}x{self.width}")
        if self.n_planes < 1:
            raise ValueError(f"n_planes must be >= 1, got {self.n_planes}")
        if not 0.0 <= self.d_min < self.d_max:
            raise ValueError(f"need 0 <= d_min < d_max, got ({self.d_min}, {self.d_max})")
        if self.texture not in TEXTURES:
            raise ValueError(f"texture must be one of {TEXTURES}, got {self.texture!r}")
        if not 0.0 < self.density <= 0.05:
            raise ValueError(f"density must be in (0, 0.05], got {self.density}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.max_slope < 0:
            raise ValueError(f"max_slope must be >= 0, got {self.max_slope}")

    def replace(self, **changes) -> "SceneSpec":
        return SceneSpec(**{**asdict(self), **changes})


@dataclass(frozen=True)
class Plane:
    a: float
    b: float
    c: float
    cx: float
    cy: float
    tint: Tuple[float, float, float]
    polygon: np.ndarray  # (n, 2) vertices as (row, col); empty for the background

    def disparity(self, xs, ys):
        return self.c + self.a * (xs - self.cx) + self.b * (ys - self.cy)


def _inside_polygon(poly: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Even-odd rule over pixel centres."""
    inside = np.zeros(np.broadcast(xs, ys).shape, dtype=bool)
    n = len(poly)
    for k in range(n):
        x0, y0 = poly[k]
        x1, y1 = poly[(k + 1) % n]
        if x0 == x1:
            continue
        crosses = (x0 > xs) != (x1 > xs)
        y_at = y0 + (xs - x0) * (y1 - y0) / (x1 - x0)
        inside ^= crosses & (ys < y_at)
    return inside


def random_planes(spec: SceneSpec):
    rng = SplitMix64(spec.seed, STREAM_PLANES)
    h, w = spec.height, spec.width
    span = spec.d_max - spec.d_min
    planes = []
    for k in range(spec.n_planes):
        cx, cy = rng.uniform(1, 0, h)[0], rng.uniform(1, 0, w)[0]
        a, b = rng.uniform(2, -spec.max_slope, spec.max_slope) if spec.max_slope > 0 else (0.0, 0.0)
        tint = tuple(float(t) for t in rng.uniform(3, 0.2, 1.0))
        if k == 0:
            cx, cy = (h - 1) / 2.0, (w - 1) / 2.0
            c = spec.d_min + span * rng.uniform(1, 0.1, 0.4)[0]
            poly = np.zeros((0, 2))
        else:
            c = spec.d_min + span * rng.uniform(1, 0.1, 0.9)[0]
            radius = min(h, w) * rng.uniform(1, 0.15, 0.35)[0]
            nv = int(rng.integers(1, 3, 9)[0])
            angles = np.sort(rng.uniform(nv, 0.0, 2 * np.pi))
            radii = radius * rng.uniform(nv, 0.6, 1.0)
            poly = np.column_stack([cx + radii * np.cos(angles), cy + radii * np.sin(angles)])
        planes.append(Plane(float(a), float(b), float(c), float(cx), float(cy), tint, poly))
    return planes[:1] + sorted(planes[1:], key=lambda p: p.c)


def _texture(spec: SceneSpec) -> np.ndarray:
    rng = SplitMix64(spec.seed, STREAM_TEXTURE)
    h, w = spec.height, spec.width
    fine = _FINE_AMPLITUDE * (rng.uniform(h * w).reshape(h, w) - 0.5)
    xs, ys = np.mgrid[0:h, 0:w].astype(np.float64)
    if spec.texture == "noise":
        # untextured surfaces carrying sparse patches of full-contrast speckle
        tex = np.full((h, w), 0.6)
        clumps = max(1, int(round(h * w / 30000.0)))
        centres = np.column_stack([rng.uniform(clumps, 0, h), rng.uniform(clumps, 0, w)])
        radii = rng.uniform(clumps, 7.0, 14.0)
        speckle = 0.1 + 0.9 * rng.uniform(h * w).reshape(h, w)
        mask = np.zeros((h, w), dtype=bool)
        for (cx, cy), r in zip(centres, radii):
            mask |= (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r
        tex = np.where(mask, speckle, tex)
    elif spec.texture == "gradient":
        theta = rng.uniform(1, 0, 2 * np.pi)[0]
        ramp = np.cos(theta) * xs / max(h - 1, 1) + np.sin(theta) * ys / max(w - 1, 1)
        ramp = (ramp - ramp.min()) / max(ramp.max() - ramp.min(), 1e-12)
        tex = 0.3 + 0.6 * ramp + fine
    elif spec.texture == "random":
        # band-limited noise, so sub-pixel resampling stays faithful
        smooth = ndimage.gaussian_filter(rng.uniform(h * w).reshape(h, w), 1.0, mode="reflect")
        tex = 0.5 + 0.15 * (smooth - smooth.mean()) / max(smooth.std(), 1e-12)
    else:
        cell = int(rng.integers(1, 6, 17)[0])
        board = ((xs.astype(int) // cell + ys.astype(int) // cell) % 2).astype(np.float64)
        tex = 0.35 + 0.5 * board + fine
    return np.clip(tex, 0.0, 1.0)


def plane_labels(spec: SceneSpec, planes=None) -> np.ndarray:
    """Index of the plane visible at each left-image pixel."""
    planes = random_planes(spec) if planes is None else planes
    xs, ys = np.mgrid[0 : spec.height, 0 : spec.width].astype(np.float64)
    labels = np.zeros((spec.height, spec.width), dtype=np.int64)
    for k, plane in enumerate(planes[1:], start=1):
        labels[_inside_polygon(plane.polygon, xs, ys)] = k
    return labels


def gen_planar_scene(spec: SceneSpec) -> Tuple[RgbImage, DisparityMap]:
    """Textured left image and its ground-truth disparity."""
    planes = random_planes(spec)
    labels = plane_labels(spec, planes)
    xs, ys = np.mgrid[0 : spec.height, 0 : spec.width].astype(np.float64)
    disp = np.zeros((spec.height, spec.width))
    tints = np.zeros((spec.height, spec.width, 3))
    for k, plane in enumerate(planes):
        sel = labels == k
        disp[sel] = plane.disparity(xs[sel], ys[sel])
        tints[sel] = plane.tint
    # float32-representable, so a PFM roundtrip of the ground truth is exact
    disp = np.clip(disp, spec.d_min, spec.d_max).astype(np.float32).astype(np.float64)
    left = np.clip(_texture(spec)[..., None] * tints, 0.0, 1.0)
    return RgbImage(left), DisparityMap(disp)


def _background(shape, seed: int) -> np.ndarray:
    rng = SplitMix64(seed, STREAM_BACKGROUND)
    h, w = shape
    tex = 0.5 + _FINE_AMPLITUDE * (rng.uniform(h * w).reshape(h, w) - 0.5)
    return np.repeat(tex[..., None], 3, axis=2)


def warp_right(left, gt, seed: int = 0) -> Tuple[RgbImage, np.ndarray]:
    """Render the right view from the left image and its disparity.

    Each row is treated as a chain of linear segments between neighbouring
    left pixels; a segment is dropped where disparity jumps by more than
    one pixel. Every right pixel takes the nearest (largest-disparity)
    surface that covers it, with linear interpolation. Pixels no surface
    covers are disoccluded: they get background texture and are returned
    as ``False`` in the validity mask.
    """
    left = as_rgb_image(left).values
    gt = as_disparity_map(gt)
    d = np.where(gt.valid, gt.values, 0.0)
    h, w = d.shape
    if left.shape[:2] != (h, w):
        raise ValueError(f"image {left.shape[:2]} and disparity {(h, w)} differ in size")
    f = np.arange(w)[None, :] - d  # right-image column of each left pixel

    rows_all, cols_all, src_all, t_all, disp_all = [], [], [], [], []

    # segment hits: u in [f0, f1)
    f0, f1 = f[:, :-1], f[:, 1:]
    d0, d1 = d[:, :-1], d[:, 1:]
    seg_ok = (np.abs(d1 - d0) <= 1.0) & (f1 > f0) & gt.valid[:, :-1] & gt.valid[:, 1:]
    base = np.ceil(f0)
    for k in range(3):
        u = base + k
        hit = seg_ok & (u < f1) & (u >= 0) & (u <= w - 1)
        xs, ys = np.nonzero(hit)
        uu = u[xs, ys]
        t = (uu - f0[xs, ys]) / (f1[xs, ys] - f0[xs, ys])
        rows_all.append(xs)
        cols_all.append(uu.astype(np.int64))
        src_all.append(ys)
        t_all.append(t)
        disp_all.append(d0[xs, ys] * (1.0 - t) + d1[xs, ys] * t)

    # exact point hits, so segment ends and isolated pixels are not lost
    point = gt.valid & (f == np.round(f)) & (f >= 0) & (f <= w - 1)
    xs, ys = np.nonzero(point)
    rows_all.append(xs)
    cols_all.append(f[xs, ys].astype(np.int64))
    src_all.append(ys)
    t_all.append(np.zeros(len(xs)))
    disp_all.append(d[xs, ys])

    rows = np.concatenate(rows_all)
    cols = np.concatenate(cols_all)
    src = np.concatenate(src_all)
    t = np.concatenate(t_all)
    disp = np.concatenate(disp_all)

    # z-buffer: largest disparity wins, ties go to the smallest source column
    order = np.lexsort((src, -disp, cols, rows))
    rows, cols, src, t = rows[order], cols[order], src[order], t[order]
    flat = rows * w + cols
    _, first = np.unique(flat, return_index=True)
    rows, cols, src, t = rows[first], cols[first], src[first], t[first]

    nxt = np.minimum(src + 1, w - 1)
    colour = left[rows, src] * (1.0 - t)[:, None] + left[rows, nxt] * t[:, None]
    right = _background((h, w), seed)
    valid = np.zeros((h, w), dtype=bool)
    right[rows, cols] = colour
    valid[rows, cols] = True
    return RgbImage(np.clip(right, 0.0, 1.0)), valid


def left_occlusion(gt) -> np.ndarray:
    """Left pixels hidden in the right view.

    A pixel is occluded when some pixel further right in its row lands at
    or left of its own right-image column, i.e. a nearer surface covers it.
    """
    d = as_disparity_map(gt).values
    f = np.arange(d.shape[1])[None, :] - d
    ahead = np.minimum.accumulate(f[:, ::-1], axis=1)[:, ::-1]
    ahead = np.concatenate([ahead[:, 1:], np.full((d.shape[0], 1), np.inf)], axis=1)
    return ahead <= f


def gradient_magnitude(img) -> np.ndarray:
    values = img.values if isinstance(img, RgbImage) else np.asarray(img, dtype=np.float64)
    gray = to_gray(values)
    gx = ndimage.correlate(gray, SCHARR_X, mode="nearest")
    gy = ndimage.correlate(gray, SCHARR_Y, mode="nearest")
    return np.sqrt(gx * gx + gy * gy)


def hint_count(spec: SceneSpec) -> int:
    return int(round(spec.density * spec.height * spec.width))


def sample_hints(gt, img, spec: SceneSpec) -> HintMap:
    """Gradient-biased sparse hints, ``gt + N(0, sigma^2)`` clamped to >= 1e-3."""
    gt = as_disparity_map(gt)
    n = hint_count(spec)
    candidates = np.flatnonzero((gt.valid & (gt.values > 0)).ravel())
    if n > len(candidates):
        raise ValueError(f"density target needs {n} hints but only {len(candidates)} pixels qualify")
    weights = gradient_magnitude(img).ravel()[candidates]
    total = weights.sum()
    if total <= 0:
        weights = np.ones_like(weights)
    else:
        # tiny floor keeps flat pixels drawable once structure runs out
        weights = weights + 1e-6 * total / len(weights)
    rng = SplitMix64(spec.seed, STREAM_HINTS)
    u = 1.0 - rng.uniform(len(candidates))
    keys = np.log(u) / weights
    chosen = np.sort(candidates[np.argsort(-keys, kind="stable")[:n]])

    out = np.zeros(gt.shape)
    truth = gt.values.ravel()[chosen]
    if spec.noise_sigma > 0:
        noise = SplitMix64(spec.seed, STREAM_NOISE).normal(n) * spec.noise_sigma
        values = np.maximum(truth + noise, MIN_HINT)
    else:
        values = truth
    np.put(out, chosen, values)
    return HintMap(out)


@dataclass(frozen=True, eq=False)
class StereoScene:
    spec: SceneSpec
    left: RgbImage
    right: RgbImage
    right_valid: np.ndarray
    gt: DisparityMap
    hints: HintMap


def make_scene(spec: SceneSpec) -> StereoScene:
    """Left/right pair, ground truth and sampled hints in one call."""
    left, gt = gen_planar_scene(spec)
    right, valid = warp_right(left, gt, spec.seed)
    hints = sample_hints(gt, left, spec)
    return StereoScene(spec, left, right, valid, gt, hints)


def spec_fields():
    return [f.name for f in fields(SceneSpec)]
