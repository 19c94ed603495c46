"""Ten hand-built malformed input files and where each one breaks."""

import struct
import zlib
from typing import Callable, NamedTuple

import numpy as np
from PIL import Image

from densehints import io


class Case(NamedTuple):
    name: str
    read: Callable
    location: str


def _chunk(kind: bytes, data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + kind + data + struct.pack(">I", zlib.crc32(kind + data))


def build_corpus(root):
    cases = []

    def pfm(name, data, location):
        path = root / name
        path.write_bytes(data)
        cases.append(Case(name, lambda: io.read_pfm(path), location))

    def png(name, data, location):
        path = root / name
        path.write_bytes(data)
        cases.append(Case(name, lambda: io.read_png16(path), location))

    def csv(name, text, location):
        path = root / name
        path.write_text(text)
        cases.append(Case(name, lambda: io.read_hints_csv(path, (4, 4)), location))

    body = struct.pack("<4f", 1, 2, 3, 4)
    pfm("colour.pfm", b"PF\n2 2\n-1.0\n" + body * 3, "byte 0")
    pfm("bad_width.pfm", b"Pf\ntwo 2\n-1.0\n" + body, "byte 3")
    pfm("truncated.pfm", b"Pf\n2 2\n-1.0\n" + body[:10], "byte 22")
    pfm("trailing.pfm", b"Pf\n2 2\n-1.0\n" + body + b"xx", "byte 28")

    path = root / "eight_bit.png"
    Image.fromarray(np.zeros((2, 2), np.uint8)).save(path)
    png("eight_bit.png", path.read_bytes(), "byte 24")
    png("not_png.png", b"GIF89a" + bytes(40), "byte 0")
    ihdr = struct.pack(">IIBBBBB", 4, 4, 16, 0, 0, 0, 0)
    broken = b"\x89PNG\r\n\x1a\n" + _chunk(b"IHDR", ihdr) + _chunk(b"IDAT", b"\x78\x9c garbage") + _chunk(b"IEND", b"")
    png("bad_idat.png", broken, "image data")

    csv("header.csv", "row,col,disp\n1,1,2.0\n", "line 1")
    csv("not_number.csv", "x,y,d\n1,1,2.0\n2,2,abc\n", "line 3")
    csv("duplicate.csv", "x,y,d\n1,1,2.0\n0,3,1.5\n1,1,2.5\n", "line 4")
    return cases
