"""EIGF: the on-disk format for trained eigenface models.

All integers and reals are little-endian; reals are IEEE-754 float64.

Header (64 bytes)::

    offset size  field
    0      4     magic b"EIGF"
    4      2     u16 version (= 1)
    6      1     u8 method (0 = PCA, 1 = N-PCA)
    7      1     u8 flags (bit 0: literal_eq13; N-PCA only)
    8      8     f64 um     (0.0 for PCA)
    16     8     f64 ustd   (0.0 for PCA)
    24     4     u32 width
    28     4     u32 height
    32     4     u32 D (= width * height)
    36     4     u32 k (components)
    40     4     u32 M (training images)
    44     4     u32 reserved (= 0)
    48     8     f64 theta_c
    56     8     f64 theta

Payload, in order: mean face (D f64), eigenvalues (k f64), eigenfaces
(D x k f64, column-major), train weights (k x M f64, column-major), then
M labels, each a u32 byte length followed by that many UTF-8 bytes. The
file ends exactly after the last label.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np

from .eigenspace import EigenModel, Method, MethodTag, NPCAParams
from .errors import ModelFormatError

MAGIC = b"EIGF"
VERSION = 1
HEADER = struct.Struct("<4sHBBddIIIIIIdd")
HEADER_SIZE = HEADER.size
_LEN = struct.Struct("<I")
_F64 = np.dtype("<f8")
_U32_MAX = 2 ** 32 - 1

_METHOD_CODES = {MethodTag.PCA: 0, MethodTag.NPCA: 1}
_FLAG_LITERAL = 0x01


def payload_size(d: int, k: int, m: int) -> int:
    """Bytes of f64 payload (everything but labels) for given counts."""
    return 8 * (d + k + d * k + k * m)


def dumps(model: EigenModel) -> bytes:
    model.validate()
    d, k, m = model.n_pixels, model.n_components, model.n_train
    w, h = model.dims
    if max(w, h, d, k, m) > _U32_MAX:
        raise ModelFormatError("model too large for the EIGF format")
    if model.method.tag is MethodTag.NPCA:
        p = model.method.npca
        um, ustd, flags = p.um, p.ustd, _FLAG_LITERAL if p.literal_eq13 else 0
    else:
        um, ustd, flags = 0.0, 0.0, 0
    parts = [
        HEADER.pack(MAGIC, VERSION, _METHOD_CODES[model.method.tag], flags,
                    um, ustd, w, h, d, k, m, 0, model.theta_c, model.theta),
        model.mean_face.astype(_F64).tobytes(),
        model.eigenvalues.astype(_F64).tobytes(),
        model.eigenfaces.astype(_F64).tobytes(order="F"),
        model.train_weights.astype(_F64).tobytes(order="F"),
    ]
    for label in model.train_labels:
        raw = label.encode("utf-8")
        parts.append(_LEN.pack(len(raw)))
        parts.append(raw)
    return b"".join(parts)


def save(model: EigenModel, sink: Union[str, Path, BinaryIO]) -> int:
    """Serialize ``model``; returns the number of bytes written."""
    data = dumps(model)
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(data)
    else:
        sink.write(data)
    return len(data)


def read_header(data: bytes) -> dict:
    if len(data) < 4 or data[:4] != MAGIC:
        raise ModelFormatError("bad magic")
    if len(data) < 6:
        raise ModelFormatError("truncated payload")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != VERSION:
        raise ModelFormatError(f"unsupported version {version}")
    if len(data) < HEADER_SIZE:
        raise ModelFormatError("truncated payload")
    (_, _, method, flags, um, ustd, w, h, d, k, m, reserved,
     theta_c, theta) = HEADER.unpack_from(data, 0)
    env, name = {0: (MethodTag.PCA, "pca"), 1: (MethodTag.NPCA, "npca")}.get(method, (None, None))
    if env is None:
        raise ModelFormatError(f"unknown method code {method}")
    return {
        "version": version, "method": name, "literal_eq13": bool(flags & _FLAG_LITERAL),
        "flags": flags, "um": um, "ustd": ustd, "width": w, "height": h,
        "D": d, "k": k, "M": m, "reserved": reserved,
        "theta_c": theta_c, "theta": theta,
    }


def loads(data: bytes) -> EigenModel:
    data = bytes(data)
    hdr = read_header(data)
    d, k, m = hdr["D"], hdr["k"], hdr["M"]
    if hdr["reserved"] != 0:
        raise ModelFormatError("invariant violation: reserved header field is nonzero")
    if d != hdr["width"] * hdr["height"]:
        raise ModelFormatError("invariant violation: D differs from width * height")

    if hdr["method"] == "pca":
        if hdr["flags"] or hdr["um"] != 0.0 or hdr["ustd"] != 0.0:
            raise ModelFormatError("invariant violation: PCA model carries N-PCA parameters")
        method = Method.pca()
    else:
        if hdr["flags"] & ~_FLAG_LITERAL:
            raise ModelFormatError("invariant violation: unknown flag bits")
        try:
            method = Method(MethodTag.NPCA, NPCAParams(hdr["um"], hdr["ustd"], hdr["literal_eq13"]))
        except ValueError as exc:
            raise ModelFormatError(f"invariant violation: {exc}") from None

    fixed_end = HEADER_SIZE + payload_size(d, k, m)
    if len(data) < fixed_end:
        raise ModelFormatError("truncated payload")
    buf = memoryview(data)
    offset = HEADER_SIZE

    def take(count):
        nonlocal offset
        arr = np.frombuffer(buf[offset:offset + 8 * count], dtype=_F64).astype(np.float64)
        offset += 8 * count
        return arr

    mean_face = take(d)
    eigenvalues = take(k)
    eigenfaces = take(d * k).reshape((d, k), order="F")
    weights = take(k * m).reshape((k, m), order="F")

    labels = []
    for _ in range(m):
        if offset + _LEN.size > len(data):
            raise ModelFormatError("truncated payload")
        (n,) = _LEN.unpack_from(data, offset)
        offset += _LEN.size
        if offset + n > len(data):
            raise ModelFormatError("truncated payload")
        try:
            labels.append(bytes(buf[offset:offset + n]).decode("utf-8"))
        except UnicodeDecodeError:
            raise ModelFormatError("invariant violation: label is not valid UTF-8") from None
        offset += n
    if offset != len(data):
        raise ModelFormatError(f"size mismatch: {len(data) - offset} trailing bytes")

    model = EigenModel(
        method=method,
        dims=(hdr["width"], hdr["height"]),
        mean_face=mean_face,
        eigenvalues=eigenvalues,
        eigenfaces=eigenfaces,
        train_weights=weights,
        train_labels=tuple(labels),
        theta_c=hdr["theta_c"],
        theta=hdr["theta"],
    )
    try:
        model.validate()
    except ValueError as exc:
        raise ModelFormatError(f"invariant violation: {exc}") from None
    return model


def load(source: Union[str, Path, BinaryIO]) -> EigenModel:
    if isinstance(source, (str, Path)):
        return loads(Path(source).read_bytes())
    return loads(source.read())


def models_equal(a: EigenModel, b: EigenModel) -> bool:
    """Field-by-field equality with reals compared bit for bit."""
    def same(x, y):
        x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
        return x.shape == y.shape and x.tobytes() == y.tobytes()

    return (
        a.method == b.method
        and a.dims == b.dims
        and a.train_labels == b.train_labels
        and same(a.mean_face, b.mean_face)
        and same(a.eigenvalues, b.eigenvalues)
        and same(a.eigenfaces, b.eigenfaces)
        and same(a.train_weights, b.train_weights)
        and same(a.theta_c, b.theta_c)
        and same(a.theta, b.theta)
    )
