"""Minimal TFL1 tensor writer/reader.

Wire format shared with the analysis toolkit: ASCII magic "TFL1", u32
little-endian ndim, ndim u32 dims, float64 little-endian row-major payload.
Everything is exported as float64 regardless of training precision so the
downstream order-based analysis is stable.
"""

import struct
from pathlib import Path

import numpy as np

MAGIC = b"TFL1"


def write_tensor(path, tensor) -> None:
    arr = np.asarray(tensor, dtype="<f8")
    if arr.ndim < 1:
        raise ValueError("TFL1 tensors must have ndim >= 1")
    arr = np.ascontiguousarray(arr)
    header = MAGIC + struct.pack("<I", arr.ndim) + struct.pack(f"<{arr.ndim}I", *arr.shape)
    Path(path).write_bytes(header + arr.tobytes())


def read_tensor(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise ValueError(f"{path}: bad TFL1 magic {data[:4]!r}")
    (ndim,) = struct.unpack("<I", data[4:8])
    dims = struct.unpack(f"<{ndim}I", data[8 : 8 + 4 * ndim])
    return np.frombuffer(data[8 + 4 * ndim :], dtype="<f8").reshape(dims).copy()
