"""EMB1: little-endian binary container for float32 embedding matrices.

Layout: magic b"EMB1", u16 version (=1), u32 dim, u64 count, then
count*dim float32 values row-major. Round-trips are bit-exact.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import FormatError

MAGIC = b"EMB1"
VERSION = 1
_HEADER = struct.Struct("<4sHIQ")


def write_emb1(matrix, path):
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    if matrix.ndim != 2:
        raise FormatError(f"EMB1 stores 2-D matrices, got ndim={matrix.ndim}")
    count, dim = matrix.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, dim, count))
        fh.write(matrix.tobytes())


def read_emb1(path):
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise FormatError(f"{path}: truncated EMB1 header")
        magic, version, dim, count = _HEADER.unpack(header)
        if magic != MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise FormatError(f"{path}: unsupported EMB1 version {version}")
        payload = fh.read()
    expected = count * dim * 4
    if len(payload) != expected:
        raise FormatError(
            f"{path}: payload holds {len(payload)} bytes, header implies {expected}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(count, dim).copy()
