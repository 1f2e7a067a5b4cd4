"""Netpbm grayscale (PGM) decoding/encoding and face-vector flattening.

Face vectors use column-major order: all of column 0 top to bottom, then
column 1, and so on, so pixel ``(row, col)`` lands at ``col * height + row``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .errors import DimensionError, PGMError

_WHITESPACE = b" \t\n\v\f\r"
_MAX_MAXVAL = 65535


@dataclass(frozen=True, eq=False)
class GrayImage:
    """A grayscale raster; ``pixels`` is a flat row-major float64 array."""

    width: int
    height: int
    pixels: np.ndarray
    maxval: int = 255

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise PGMError(f"invalid image size {self.width}x{self.height}")
        if not 0 < self.maxval <= _MAX_MAXVAL:
            raise PGMError(f"maxval {self.maxval} out of range")
        px = np.asarray(self.pixels, dtype=np.float64).reshape(-1)
        if px.size != self.width * self.height:
            raise PGMError("pixel-count mismatch")
        if px.size and (px.min() < 0 or px.max() > self.maxval):
            raise PGMError("pixel value outside [0, maxval]")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def array(self) -> np.ndarray:
        """Pixels as a ``(height, width)`` array."""
        return self.pixels.reshape(self.height, self.width)

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.maxval == other.maxval
            and np.array_equal(self.pixels, other.pixels)
        )

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height}, maxval={self.maxval})"


@dataclass(frozen=True, eq=False)
class FaceVector:
    """One image as a length ``width * height`` column of intensities."""

    values: np.ndarray
    source_dims: Tuple[int, int]
    source: Optional[Path] = field(default=None, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64).reshape(-1)
        w, h = self.source_dims
        if vals.size != w * h:
            raise DimensionError(
                f"vector of length {vals.size} does not match dims {w}x{h}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "source_dims", (int(w), int(h)))

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, FaceVector):
            return NotImplemented
        return self.source_dims == other.source_dims and np.array_equal(
            self.values, other.values
        )


def _next_token(data: bytes, pos: int) -> Tuple[bytes, int]:
    """Return the next header token and the index just past it."""
    n = len(data)
    while pos < n:
        if data[pos] in _WHITESPACE:
            pos += 1
        elif data[pos:pos + 1] == b"#":
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos] not in _WHITESPACE and data[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise PGMError("malformed header: unexpected end of data")
    return data[start:pos], pos


def _header_int(data: bytes, pos: int, what: str) -> Tuple[int, int]:
    tok, pos = _next_token(data, pos)
    if not tok.isdigit():
        raise PGMError(f"malformed header: bad {what} {tok!r}")
    return int(tok), pos


def parse_pgm(data: bytes) -> GrayImage:
    """Decode an ASCII (P2) or binary (P5) PGM image."""
    data = bytes(data)
    magic = data[:2]
    if magic not in (b"P2", b"P5") or (len(data) > 2 and data[2] not in _WHITESPACE + b"#"):
        raise PGMError("malformed header: expected magic P2 or P5")
    pos = 2
    width, pos = _header_int(data, pos, "width")
    height, pos = _header_int(data, pos, "height")
    maxval, pos = _header_int(data, pos, "maxval")
    if width < 1 or height < 1:
        raise PGMError(f"malformed header: size {width}x{height}")
    if not 0 < maxval <= _MAX_MAXVAL:
        raise PGMError(f"maxval {maxval} out of range (0, {_MAX_MAXVAL}]")
    count = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates maxval from the raster
        if pos >= len(data) or data[pos] not in _WHITESPACE:
            raise PGMError("pixel-count mismatch")
        raster = data[pos + 1:]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        if len(raster) != count * dtype.itemsize:
            raise PGMError(
                f"pixel-count mismatch: expected {count} pixels, "
                f"got {len(raster) // dtype.itemsize}"
            )
        pixels = np.frombuffer(raster, dtype=dtype).astype(np.float64)
    else:
        text = re.sub(rb"#[^\r\n]*", b" ", data[pos:])
        tokens = text.split()
        if len(tokens) != count:
            raise PGMError(
                f"pixel-count mismatch: expected {count} pixels, got {len(tokens)}"
            )
        try:
            pixels = np.array([int(t) for t in tokens], dtype=np.float64)
        except ValueError as exc:
            raise PGMError(f"malformed pixel data: {exc}") from None

    if pixels.size and pixels.max() > maxval:
        raise PGMError("pixel value exceeds maxval")
    return GrayImage(width, height, pixels, maxval)


def serialize_pgm(img: GrayImage, binary: bool = True) -> bytes:
    """Encode ``img`` as P5 (default) or P2; pixels must be integral."""
    px = img.pixels
    if not np.array_equal(px, np.round(px)):
        raise PGMError("cannot serialize non-integral pixel values")
    ints = px.astype(np.int64)
    header = b"%s\n%d %d\n%d\n" % (b"P5" if binary else b"P2", img.width, img.height, img.maxval)
    if binary:
        dtype = ">u2" if img.maxval > 255 else "u1"
        return header + ints.astype(dtype).tobytes()
    rows = (
        " ".join(str(v) for v in row) for row in ints.reshape(img.height, img.width)
    )
    return header + ("\n".join(rows) + "\n").encode("ascii")


def read_pgm(path) -> GrayImage:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise PGMError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return parse_pgm(data)
    except PGMError as exc:
        raise PGMError(f"{path}: {exc}") from None


def write_pgm(path, img: GrayImage, binary: bool = True) -> None:
    Path(path).write_bytes(serialize_pgm(img, binary=binary))


def flatten(img: GrayImage, source: Optional[Path] = None) -> FaceVector:
    return FaceVector(img.array.ravel(order="F"), (img.width, img.height), source)


def unflatten(vec: FaceVector, maxval: int = 255) -> GrayImage:
    """Inverse of :func:`flatten`; values are clamped into ``[0, maxval]``."""
    w, h = vec.source_dims
    if vec.values.size != w * h:
        raise DimensionError("dimension mismatch")
    grid = np.clip(vec.values, 0, maxval).reshape((h, w), order="F")
    return GrayImage(w, h, grid.ravel(), maxval)


def to_8bit(vec: FaceVector) -> GrayImage:
    """Clamp to [0, 255] and round half up, ready for 8-bit P5 export."""
    w, h = vec.source_dims
    vals = np.floor(np.clip(vec.values, 0.0, 255.0) + 0.5)
    return unflatten(FaceVector(vals, (w, h)), maxval=255)


def load_face(path) -> FaceVector:
    path = Path(path)
    return flatten(read_pgm(path), source=path)
