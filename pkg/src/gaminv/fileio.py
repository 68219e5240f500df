"""8-bit image files, float map files and small CSV helpers.

PGM-P5 with maxval 255 is the canonical interchange format.  Grayscale 8-bit
PNG is accepted on load.

Float maps use a fixed little-endian layout::

    bytes 0-3    magic b"GINV"
    bytes 4-7    u32 width
    bytes 8-11   u32 height
    bytes 12-15  u32 margin (invalid border width)
    then width*height float64 samples, row-major
"""

from __future__ import annotations

import csv
import re
import struct
from pathlib import Path

import numpy as np

from gaminv.image_ops import ScalarField, as_field
from gaminv.invariants import InvariantMap


class ImageFormatError(ValueError):
    """Unsupported or malformed image/map file."""


MAP_MAGIC = b"GINV"
_MAP_HEADER = struct.Struct("<4sIII")
_PGM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*(\S+)")


def _parse_pgm(buf: bytes) -> np.ndarray:
    pos = 0
    tokens = []
    for _ in range(4):
        m = _PGM_TOKEN.match(buf, pos)
        if not m:
            raise ImageFormatError("truncated PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    magic, w, h, maxval = tokens
    if magic != b"P5":
        raise ImageFormatError(f"not a binary PGM (magic {magic!r})")
    try:
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError as e:
        raise ImageFormatError("malformed PGM header") from e
    if maxval != 255:
        raise ImageFormatError(f"only maxval 255 is supported, got {maxval}")
    if w <= 0 or h <= 0:
        raise ImageFormatError(f"bad PGM size {w}x{h}")
    if pos >= len(buf) or not buf[pos:pos + 1].isspace():
        raise ImageFormatError("missing whitespace after PGM maxval")
    pos += 1
    data = buf[pos:]
    if len(data) < w * h:
        raise ImageFormatError(f"truncated PGM data: expected {w * h} bytes, got {len(data)}")
    return np.frombuffer(data[:w * h], dtype=np.uint8).reshape(h, w)


def _load_png(path: Path) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        if im.mode != "L":
            raise ImageFormatError(f"only 8-bit grayscale PNG is supported, got mode {im.mode!r}")
        return np.asarray(im, dtype=np.uint8)


def load_image(path) -> ScalarField:
    """Read an 8-bit grayscale image as doubles in [0, 255] with margin 0."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head.startswith(b"\x89PNG"):
        arr = _load_png(path)
    elif head.startswith(b"P"):
        arr = _parse_pgm(path.read_bytes())
    else:
        raise ImageFormatError(f"{path}: unrecognized image format")
    return ScalarField(arr.astype(np.float64))


def to_uint8(img) -> np.ndarray:
    data = as_field(img).data
    return np.clip(np.rint(data), 0, 255).astype(np.uint8)


def save_pgm(path, img) -> None:
    """Write a P5 PGM (maxval 255); values are rounded and clipped to [0, 255]."""
    arr = img if isinstance(img, np.ndarray) and img.dtype == np.uint8 else to_uint8(img)
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(np.ascontiguousarray(arr).tobytes())


def _unwrap(field) -> ScalarField:
    return field.values if isinstance(field, InvariantMap) else as_field(field)


def save_map(path, field) -> None:
    """Write a float map in the GINV layout (invalid pixels stored as 0)."""
    f = _unwrap(field)
    h, w = f.shape
    with open(path, "wb") as fh:
        fh.write(_MAP_HEADER.pack(MAP_MAGIC, w, h, f.margin))
        fh.write(f.data.astype("<f8").tobytes())


def load_map(path) -> ScalarField:
    buf = Path(path).read_bytes()
    if len(buf) < _MAP_HEADER.size:
        raise ImageFormatError("truncated map header")
    magic, w, h, margin = _MAP_HEADER.unpack_from(buf)
    if magic != MAP_MAGIC:
        raise ImageFormatError(f"not a GINV map (magic {magic!r})")
    n = w * h * 8
    body = buf[_MAP_HEADER.size:]
    if len(body) != n:
        raise ImageFormatError(f"map body has {len(body)} bytes, expected {n}")
    data = np.frombuffer(body, dtype="<f8").reshape(h, w).astype(np.float64)
    return ScalarField(data, margin)


def invariant_to_gray(field) -> np.ndarray:
    """Map [-1, 1] linearly onto [0, 255]; invalid pixels become 0."""
    f = _unwrap(field)
    out = np.rint((np.clip(f.data, -1, 1) + 1.0) * 127.5)
    out[~f.valid] = 0
    return out.astype(np.uint8)


def mask_to_gray(mask, on: int = 255) -> np.ndarray:
    """Binary mask image: ``on`` where True, the opposite level elsewhere."""
    return np.where(np.asarray(mask, bool), on, 255 - on).astype(np.uint8)


def scaled_to_gray(field, vmax: float | None = None) -> np.ndarray:
    """Non-negative map scaled so that ``vmax`` (default: the maximum) is white."""
    f = as_field(field)
    vals = f.data * f.valid
    top = vmax if vmax is not None else (vals.max() if vals.size else 0.0)
    if top <= 0:
        return np.zeros(f.shape, np.uint8)
    return np.clip(np.rint(255.0 * vals / top), 0, 255).astype(np.uint8)


def write_csv(path_or_file, header, rows) -> None:
    if hasattr(path_or_file, "write"):
        w = csv.writer(path_or_file)
        w.writerow(header)
        w.writerows(rows)
        return
    with open(path_or_file, "w", newline="") as fh:
        write_csv(fh, header, rows)
