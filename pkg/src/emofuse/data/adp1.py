"""ADP1: named-tensor container used for adapter and fusion parameters.

Layout: magic b"ADP1", then per tensor: u32 name length, utf-8 name,
u32 rank, u32 dims..., float32-LE payload. Tensors are read until EOF.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import FormatError

MAGIC = b"ADP1"


def write_adp1(tensors, path):
    """`tensors` is an ordered mapping name -> ndarray (stored as float32)."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        for name, arr in tensors.items():
            arr = np.ascontiguousarray(arr, dtype="<f4")
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(arr.tobytes())


def read_adp1(path):
    tensors: dict[str, np.ndarray] = {}
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {data[:4]!r}")
    off = 4

    def take(n, what):
        nonlocal off
        if off + n > len(data):
            raise FormatError(f"{path}: truncated while reading {what}")
        chunk = data[off : off + n]
        off += n
        return chunk

    while off < len(data):
        (name_len,) = struct.unpack("<I", take(4, "name length"))
        name = take(name_len, "name").decode("utf-8")
        (rank,) = struct.unpack("<I", take(4, "rank"))
        dims = struct.unpack(f"<{rank}I", take(4 * rank, "dims"))
        size = int(np.prod(dims, dtype=np.int64)) if rank else 1
        payload = take(size * 4, f"payload of {name!r}")
        tensors[name] = np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
    return tensors
