"""
Random-geometric-graph hint expansion.

Hints become nodes at (row, col, disparity). Two nodes are joined when they
are closer than ``radius`` in that 3-D space and their left-image colors
have cosine similarity above ``color_tau``. Edges are visited shortest
first; each one walks the image plane in unit steps from its first node
towards its second, writing the linearly interpolated disparity into every
visited cell that is still empty.

Floating-point recipe (shared by every code path, so results are
bit-reproducible):

* ``d2 = sqrt(dx*dx + dy*dy)``, ``d3 = sqrt(dx*dx + dy*dy + dz*dz)``
* step ``m`` in ``1 .. ceil(d2) - 1`` lands on
  ``rint(x_a + m * (dx / d2)), rint(y_a + m * (dy / d2))``
  (``rint`` rounds half to even)
* the value written is ``z_a + dz * (m / d2)``
"""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .core import GraphParams, HintMap, as_hint_map, as_rgb_image

ADJACENT_D2 = float(np.sqrt(2.0)) + 1e-9
_NORM_EPS = 1e-12


@dataclass(frozen=True)
class HintNode:
    x: int
    y: int
    z: float
    color: tuple = (1.0, 1.0, 1.0)


@dataclass(frozen=True)
class Edge:
    i: int
    j: int
    d3: float
    d2: float


def nodes_from_hints(h, img) -> List[HintNode]:
    """One node per hint, in row-major order."""
    h = as_hint_map(h)
    img = as_rgb_image(img)
    xs, ys = np.nonzero(h.values)
    return [
        HintNode(int(x), int(y), float(h.values[x, y]), tuple(float(c) for c in img.values[x, y]))
        for x, y in zip(xs, ys)
    ]


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise cosine similarity; two (near-)black colors count as identical."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = np.sqrt(np.sum(a * a, axis=-1))
    nb = np.sqrt(np.sum(b * b, axis=-1))
    dot = np.sum(a * b, axis=-1)
    sim = dot / ((na + _NORM_EPS) * (nb + _NORM_EPS))
    return np.where((na < _NORM_EPS) & (nb < _NORM_EPS), 1.0, sim)


def _edge_arrays(pos: np.ndarray, colors: np.ndarray, params: GraphParams):
    """Edge endpoints (i < j) and distances, unsorted."""
    n = len(pos)
    if n < 2:
        empty = np.zeros(0, dtype=np.intp)
        return empty, empty, np.zeros(0), np.zeros(0)
    tree = cKDTree(pos)
    # slightly generous query; the strict test below is authoritative
    pairs = tree.query_pairs(params.radius * (1 + 1e-9) + 1e-12, output_type="ndarray")
    if len(pairs) == 0:
        empty = np.zeros(0, dtype=np.intp)
        return empty, empty, np.zeros(0), np.zeros(0)
    i = np.minimum(pairs[:, 0], pairs[:, 1]).astype(np.intp)
    j = np.maximum(pairs[:, 0], pairs[:, 1]).astype(np.intp)
    dx = pos[j, 0] - pos[i, 0]
    dy = pos[j, 1] - pos[i, 1]
    dz = pos[j, 2] - pos[i, 2]
    planar = dx * dx + dy * dy
    d3 = np.sqrt(planar + dz * dz)
    d2 = np.sqrt(planar)
    keep = (d3 < params.radius) & (cosine_similarity(colors[i], colors[j]) > params.color_tau)
    return i[keep], j[keep], d3[keep], d2[keep]


def _sort_order(i, j, d3, d2, sort_key: str) -> np.ndarray:
    primary = d3 if sort_key == "3d" else d2
    # lexsort: last key is the primary one
    return np.lexsort((j, i, primary))


def build_edges(nodes: Sequence[HintNode], params: GraphParams = GraphParams()) -> List[Edge]:
    """All pairs with ``d3 < radius`` and color cosine above ``color_tau``."""
    if len(nodes) < 2:
        return []
    pos = np.array([(n.x, n.y, n.z) for n in nodes], dtype=np.float64)
    colors = np.array([n.color for n in nodes], dtype=np.float64)
    i, j, d3, d2 = _edge_arrays(pos, colors, params)
    return [Edge(int(a), int(b), float(c), float(d)) for a, b, c, d in zip(i, j, d3, d2)]


def sort_edges(edges: Sequence[Edge], sort_key: str = "3d") -> List[Edge]:
    """Ascending distance; ties broken by (min index, max index)."""
    if sort_key == "3d":
        return sorted(edges, key=lambda e: (e.d3, min(e.i, e.j), max(e.i, e.j)))
    if sort_key == "2d":
        return sorted(edges, key=lambda e: (e.d2, min(e.i, e.j), max(e.i, e.j)))
    raise ValueError(f"sort_key must be '3d' or '2d', got {sort_key!r}")


def _rasterize_into(out: np.ndarray, xa, ya, za, xb, yb, zb) -> None:
    dx = xb - xa
    dy = yb - ya
    d2 = float(np.sqrt(dx * dx + dy * dy))
    if d2 <= ADJACENT_D2:
        return
    ux = dx / d2
    uy = dy / d2
    dz = zb - za
    rows, cols = out.shape
    for m in range(1, int(np.ceil(d2))):
        x = int(np.rint(xa + m * ux))
        y = int(np.rint(ya + m * uy))
        if 0 <= x < rows and 0 <= y < cols and out[x, y] == 0:
            out[x, y] = za + dz * (m / d2)


def rasterize_edge(h, a: HintNode, b: HintNode) -> HintMap:
    """Fill empty cells on the 2-D segment a -> b; returns a new map.

    Adjacent endpoints (``d2 <= sqrt(2)``) leave the map unchanged.
    """
    out = as_hint_map(h).copy_values()
    _rasterize_into(out, float(a.x), float(a.y), float(a.z), float(b.x), float(b.y), float(b.z))
    return HintMap(out)


def _steps(pos, i, j, d2):
    """Every (edge, m) step, in edge order then m order."""
    counts = np.where(d2 > ADJACENT_D2, np.ceil(d2).astype(np.int64) - 1, 0)
    total = int(counts.sum())
    edge = np.repeat(np.arange(len(i)), counts)
    starts = np.cumsum(counts) - counts
    m = (np.arange(total) - np.repeat(starts, counts) + 1).astype(np.float64)
    a = i[edge]
    b = j[edge]
    dist = d2[edge]
    dx = pos[b, 0] - pos[a, 0]
    dy = pos[b, 1] - pos[a, 1]
    dz = pos[b, 2] - pos[a, 2]
    x = np.rint(pos[a, 0] + m * (dx / dist)).astype(np.int64)
    y = np.rint(pos[a, 1] + m * (dy / dist)).astype(np.int64)
    val = pos[a, 2] + dz * (m / dist)
    return x, y, val


def expand_graph(h, img, params: GraphParams = GraphParams()) -> HintMap:
    """Densify ``h`` along the edges of its color-gated 3-D radius graph."""
    h = as_hint_map(h)
    img = as_rgb_image(img)
    if img.shape != h.shape:
        raise ValueError(f"hint map {h.shape} and image {img.shape} differ in size")
    values = h.values
    xs, ys = np.nonzero(values)
    pos = np.column_stack([xs, ys, values[xs, ys]]).astype(np.float64)
    colors = img.values[xs, ys]
    i, j, d3, d2 = _edge_arrays(pos, colors, params)
    out = h.copy_values()
    if len(i) == 0:
        return HintMap(out)
    order = _sort_order(i, j, d3, d2, params.sort_key)
    x, y, val = _steps(pos, i[order], j[order], d2[order])

    rows, cols = values.shape
    inside = (x >= 0) & (x < rows) & (y >= 0) & (y < cols)
    x, y, val = x[inside], y[inside], val[inside]
    flat = x * cols + y
    empty = values.ravel()[flat] == 0
    flat, val = flat[empty], val[empty]
    # cells only ever take their first write, so keep the earliest step per cell
    cells, first = np.unique(flat, return_index=True)
    np.put(out, cells, val[first])
    return HintMap(out)
