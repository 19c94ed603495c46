"""
Readers and writers for disparity, hint and scene files.

PFM (float ground truth)
    ASCII header ``Pf\\n<width> <height>\\n<scale>\\n`` followed by
    ``width * height`` float32 samples, bottom row first. A negative scale
    means little-endian. The writer always emits ``-1.0`` (little-endian),
    and invalid pixels are stored as ``+inf``. On read, non-finite samples
    become invalid pixels.

PNG16 (KITTI convention)
    Single-channel 16-bit PNG holding ``round(disparity * 256)``; raw 0 is
    an invalid pixel.

Hints CSV
    Header ``x,y,d`` then one ``row,col,disparity`` record per hint, sorted
    by (row, col). Note the (row, col) order. Disparities are written with
    ``repr`` so they round-trip exactly.

Visualization
    Binary PPM (``P6``). Disparities in ``[d_min, d_max]`` map through a
    5-stop colormap (dark blue, blue, green, yellow, red, linearly blended);
    invalid and empty pixels are black. Hint maps are drawn as 3x3 dots.

Scene config
    Plain text, one ``key=value`` per line, in ``SceneSpec`` field order.
"""

import csv
import math
import struct
from pathlib import Path
from typing import Tuple

import numpy as np
from PIL import Image

from .core import DisparityMap, HintMap, RgbImage, as_hint_map
from .synth import SceneSpec, spec_fields


class FormatError(ValueError):
    """Malformed input file; ``location`` names the byte offset or line."""

    def __init__(self, path, location: str, message: str):
        self.path = str(path)
        self.location = location
        super().__init__(f"{path}: {location}: {message}")


# --- PFM ---------------------------------------------------------------------


def _pfm_token(data: bytes, pos: int, path) -> Tuple[bytes, int, int]:
    """Next whitespace-delimited header token, its offset, and the position after it."""
    while pos < len(data) and data[pos : pos + 1].isspace():
        pos += 1
    start = pos
    while pos < len(data) and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise FormatError(path, f"byte {start}", "unexpected end of header")
    return data[start:pos], start, pos


def read_pfm(path) -> DisparityMap:
    data = Path(path).read_bytes()
    magic, _, pos = _pfm_token(data, 0, path)
    if magic == b"PF":
        raise FormatError(path, "byte 0", "expected grayscale PFM (Pf), got colour PFM (PF)")
    if magic != b"Pf":
        raise FormatError(path, "byte 0", f"bad magic {magic[:8]!r}, expected b'Pf'")
    fields = []
    for what in ("width", "height", "scale"):
        tok, start, pos = _pfm_token(data, pos, path)
        try:
            fields.append(int(tok) if what != "scale" else float(tok))
        except ValueError:
            raise FormatError(path, f"byte {start}", f"bad {what} {tok[:16]!r}") from None
    width, height, scale = fields
    if width <= 0 or height <= 0:
        raise FormatError(path, "header", f"non-positive size {width}x{height}")
    if scale == 0 or not math.isfinite(scale):
        raise FormatError(path, "header", f"bad scale {scale}")
    # exactly one whitespace byte separates the header from the raster
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise FormatError(path, f"byte {pos}", "missing newline after header")
    pos += 1
    need = width * height * 4
    have = len(data) - pos
    if have < need:
        raise FormatError(path, f"byte {len(data)}", f"truncated raster: need {need} bytes, got {have}")
    if have > need:
        raise FormatError(path, f"byte {pos + need}", f"{have - need} trailing bytes after raster")
    dtype = "<f4" if scale < 0 else ">f4"
    raster = np.frombuffer(data, dtype=dtype, count=width * height, offset=pos)
    values = np.flipud(raster.reshape(height, width)).astype(np.float64)
    return DisparityMap(values, np.isfinite(values))


def write_pfm(path, disp) -> None:
    if isinstance(disp, DisparityMap):
        values = np.where(disp.valid, disp.values, np.inf)
    else:
        values = np.asarray(disp, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError(f"PFM writer needs a 2-D map, got shape {values.shape}")
    height, width = values.shape
    header = f"Pf\n{width} {height}\n-1.0\n".encode("ascii")
    raster = np.flipud(values).astype("<f4").tobytes()
    Path(path).write_bytes(header + raster)


# --- PNG16 -------------------------------------------------------------------

_PNG_SIG = b"\x89PNG\r\n\x1a\n"


def _png_header(data: bytes, path):
    if not data.startswith(_PNG_SIG):
        raise FormatError(path, "byte 0", "not a PNG file")
    if len(data) < 33 or data[12:16] != b"IHDR":
        raise FormatError(path, "byte 8", "missing IHDR chunk")
    width, height, depth, colour = struct.unpack(">IIBB", data[16:26])
    return width, height, depth, colour


def read_png16(path) -> DisparityMap:
    data = Path(path).read_bytes()
    width, height, depth, colour = _png_header(data, path)
    if depth != 16:
        raise FormatError(path, "byte 24", f"expected 16-bit samples, got {depth}-bit")
    if colour != 0:
        raise FormatError(path, "byte 25", f"expected single-channel grayscale, got PNG colour type {colour}")
    try:
        with Image.open(path) as im:
            raw = np.array(im)
    except (OSError, SyntaxError, ValueError) as exc:
        raise FormatError(path, "image data", f"cannot decode PNG: {exc}") from None
    if raw.shape != (height, width):
        raise FormatError(path, "image data", f"decoded shape {raw.shape} != header {(height, width)}")
    raw = raw.astype(np.float64)
    return DisparityMap(raw / 256.0, raw > 0)


def write_png16(path, disp) -> None:
    if isinstance(disp, DisparityMap):
        values, valid = disp.values, disp.valid
    else:
        values = np.asarray(disp, dtype=np.float64)
        valid = np.isfinite(values)
    if np.any(values[valid] >= 256.0) or np.any(values[valid] < 0):
        raise ValueError("PNG16 stores disparities in [0, 256)")
    raw = np.where(valid, np.rint(np.where(valid, values, 0.0) * 256.0), 0.0)
    # disparities below 1/512 quantize to the 0 sentinel and read back invalid
    raw = np.clip(raw, 0, 65535).astype(np.uint16)
    Image.fromarray(raw).save(path, format="PNG")


# --- disparity dispatch --------------------------------------------------------


def read_disparity(path) -> DisparityMap:
    suffix = Path(path).suffix.lower()
    if suffix == ".pfm":
        return read_pfm(path)
    if suffix == ".png":
        return read_png16(path)
    raise ValueError(f"unsupported disparity file type {suffix!r} (use .pfm or .png)")


def write_disparity(path, disp) -> None:
    suffix = Path(path).suffix.lower()
    if suffix == ".pfm":
        write_pfm(path, disp)
    elif suffix == ".png":
        write_png16(path, disp)
    else:
        raise ValueError(f"unsupported disparity file type {suffix!r} (use .pfm or .png)")


# --- hints CSV -----------------------------------------------------------------


def write_hints_csv(path, h) -> None:
    values = as_hint_map(h).values
    xs, ys = np.nonzero(values)
    lines = ["x,y,d"]
    lines += [f"{x},{y},{float(values[x, y])!r}" for x, y in zip(xs, ys)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_hints_csv(path, shape: Tuple[int, int]) -> HintMap:
    """Hints file into a map of the given ``(height, width)``."""
    height, width = shape
    out = np.zeros((height, width))
    seen = {}
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise FormatError(path, "line 1", "empty file, expected header 'x,y,d'")
        if [c.strip() for c in header] != ["x", "y", "d"]:
            raise FormatError(path, "line 1", f"expected header 'x,y,d', got {','.join(header)!r}")
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise FormatError(path, f"line {lineno}", f"expected 3 fields, got {len(row)}")
            try:
                x, y, d = int(row[0]), int(row[1]), float(row[2])
            except ValueError:
                raise FormatError(path, f"line {lineno}", f"unparseable record {','.join(row)!r}") from None
            if not (0 <= x < height and 0 <= y < width):
                raise FormatError(path, f"line {lineno}", f"({x}, {y}) outside {height}x{width} map")
            if not (math.isfinite(d) and d > 0):
                raise FormatError(path, f"line {lineno}", f"disparity must be finite and > 0, got {d}")
            if (x, y) in seen:
                raise FormatError(path, f"line {lineno}", f"duplicate ({x}, {y}), first on line {seen[(x, y)]}")
            seen[(x, y)] = lineno
            out[x, y] = d
    return HintMap(out)


# --- images --------------------------------------------------------------------


def read_image(path) -> RgbImage:
    """8-bit image file as RGB in [0, 1] (grayscale is replicated)."""
    with Image.open(path) as im:
        arr = np.array(im.convert("RGB"))
    return RgbImage(arr)


def write_image(path, img) -> None:
    values = img.values if isinstance(img, RgbImage) else np.asarray(img, dtype=np.float64)
    if values.ndim == 2:
        values = np.repeat(values[..., None], 3, axis=2)
    raw = np.clip(np.rint(values * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(raw).save(path, format="PNG")


# --- visualization -------------------------------------------------------------

COLORMAP = np.array(
    [
        [0, 0, 128],
        [0, 64, 255],
        [0, 200, 64],
        [255, 220, 0],
        [220, 0, 0],
    ],
    dtype=np.float64,
)


def colorize(values: np.ndarray, d_min: float, d_max: float) -> np.ndarray:
    """Map disparities to uint8 RGB through :data:`COLORMAP`."""
    span = max(d_max - d_min, 1e-12)
    t = np.clip((values - d_min) / span, 0.0, 1.0) * (len(COLORMAP) - 1)
    lo = np.minimum(np.floor(t).astype(int), len(COLORMAP) - 2)
    frac = (t - lo)[..., None]
    rgb = COLORMAP[lo] * (1.0 - frac) + COLORMAP[lo + 1] * frac
    return np.rint(rgb).astype(np.uint8)


def write_visualization(path, m, d_min: float = 0.0, d_max: float = 192.0) -> None:
    if isinstance(m, HintMap):
        values = m.values
        present = values > 0
        rgb = np.zeros(values.shape + (3,), dtype=np.uint8)
        colours = colorize(values, d_min, d_max)
        h, w = values.shape
        xs, ys = np.nonzero(present)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                px, py = xs + dx, ys + dy
                ok = (px >= 0) & (px < h) & (py >= 0) & (py < w)
                # paint in row-major hint order; overlapping dots keep the last hint
                rgb[px[ok], py[ok]] = colours[xs[ok], ys[ok]]
    else:
        disp = m if isinstance(m, DisparityMap) else DisparityMap(m)
        rgb = colorize(np.where(disp.valid, disp.values, d_min), d_min, d_max)
        rgb[~disp.valid] = 0
    h, w = rgb.shape[:2]
    Path(path).write_bytes(f"P6\n{w} {h}\n255\n".encode("ascii") + rgb.tobytes())


# --- scene config ----------------------------------------------------------------


def write_scene_spec(path, spec: SceneSpec) -> None:
    lines = [f"{name}={getattr(spec, name)}" for name in spec_fields()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_scene_spec(path) -> SceneSpec:
    types = {f: type(getattr(SceneSpec(), f)) for f in spec_fields()}
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="ascii").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, raw = line.partition("=")
        key = key.strip()
        if not sep or key not in types:
            raise FormatError(path, f"line {lineno}", f"expected one of {sorted(types)} as key=value")
        try:
            values[key] = types[key](raw.strip())
        except ValueError:
            raise FormatError(path, f"line {lineno}", f"bad value {raw.strip()!r} for {key}") from None
    try:
        return SceneSpec(**values)
    except ValueError as exc:
        raise FormatError(path, "content", str(exc)) from None
