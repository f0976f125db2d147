"""On-disk formats: IDX image/label files, TFL1 tensors, delimited matrices.

IDX follows the classic MNIST layout (big endian, u8 payload); TFL1 is the
little-endian float64 tensor interchange format used to move kernels and
feature maps between tools.  Both round-trip bit-exactly.
"""

from __future__ import annotations

import gzip
import struct
from pathlib import Path

import numpy as np

from .errors import ContractError, FormatError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
TENSOR_MAGIC = b"TFL1"


def _read_bytes(path) -> bytes:
    path = Path(path)
    if not path.exists():
        raise FormatError(f"no such file: {path}")
    opener = gzip.open if path.suffix == ".gz" else open
    try:
        with opener(path, "rb") as fh:
            return fh.read()
    except (OSError, EOFError) as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


def _idx_header(data: bytes, path, n_words: int) -> tuple:
    need = 4 * n_words
    if len(data) < need:
        raise FormatError(f"{path}: truncated IDX header ({len(data)} bytes)")
    return struct.unpack(f">{n_words}I", data[:need])


def read_idx_images(path) -> np.ndarray:
    """Images from an IDX u8 tensor file, as float64 in [0, 255]."""
    data = _read_bytes(path)
    magic, count, rows, cols = _idx_header(data, path, 4)
    if magic != IDX_IMAGES_MAGIC:
        raise FormatError(f"{path}: bad IDX image magic 0x{magic:08x}, expected 0x{IDX_IMAGES_MAGIC:08x}")
    payload = data[16:]
    expected = count * rows * cols
    if len(payload) != expected:
        raise FormatError(f"{path}: IDX payload is {len(payload)} bytes, header implies {expected}")
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(count, rows, cols)
    return pixels.astype(np.float64)


def read_idx_labels(path) -> np.ndarray:
    """Labels from an IDX u8 vector file."""
    data = _read_bytes(path)
    magic, count = _idx_header(data, path, 2)
    if magic != IDX_LABELS_MAGIC:
        raise FormatError(f"{path}: bad IDX label magic 0x{magic:08x}, expected 0x{IDX_LABELS_MAGIC:08x}")
    payload = data[8:]
    if len(payload) != count:
        raise FormatError(f"{path}: IDX payload is {len(payload)} bytes, header implies {count}")
    return np.frombuffer(payload, dtype=np.uint8).astype(np.int64)


def load_idx(images_path, labels_path=None):
    """Load an IDX image file, optionally paired with its label file.

    Returns (images, labels); labels is None without a companion file.
    The two files must agree on the item count.
    """
    images = read_idx_images(images_path)
    labels = None
    if labels_path is not None:
        labels = read_idx_labels(labels_path)
        if labels.shape[0] != images.shape[0]:
            raise FormatError(
                f"count mismatch: {images.shape[0]} images in {images_path} "
                f"vs {labels.shape[0]} labels in {labels_path}"
            )
    return images, labels


def _as_u8(values, what: str) -> np.ndarray:
    arr = np.asarray(values)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 255) or np.any(arr != np.floor(arr)):
        raise ContractError(f"{what} must be integers in 0..255 to serialize as IDX u8")
    return arr.astype(np.uint8)


def write_idx_images(path, images) -> None:
    """Write a (count, rows, cols) u8-valued array as an IDX image file."""
    arr = _as_u8(images, "images")
    if arr.ndim != 3:
        raise ContractError(f"images must be (count, rows, cols), got shape {arr.shape}")
    header = struct.pack(">4I", IDX_IMAGES_MAGIC, *arr.shape)
    Path(path).write_bytes(header + arr.tobytes())


def write_idx_labels(path, labels) -> None:
    arr = _as_u8(labels, "labels")
    if arr.ndim != 1:
        raise ContractError(f"labels must be 1-D, got shape {arr.shape}")
    header = struct.pack(">2I", IDX_LABELS_MAGIC, arr.shape[0])
    Path(path).write_bytes(header + arr.tobytes())


def write_tensor(path, tensor) -> None:
    """Write a float64 tensor in TFL1: magic, u32 ndim, u32 dims, LE payload."""
    arr = np.asarray(tensor, dtype="<f8")
    if arr.ndim < 1:
        raise ContractError("TFL1 tensors must have ndim >= 1")
    arr = np.ascontiguousarray(arr)
    if min(arr.shape) < 1:
        raise ContractError(f"TFL1 tensors must have positive dims, got shape {arr.shape}")
    header = TENSOR_MAGIC + struct.pack("<I", arr.ndim) + struct.pack(f"<{arr.ndim}I", *arr.shape)
    Path(path).write_bytes(header + arr.tobytes())


def read_tensor(path) -> np.ndarray:
    """Read a TFL1 tensor; the payload round-trips write_tensor bit-exactly."""
    data = _read_bytes(path)
    if len(data) < 8:
        raise FormatError(f"{path}: truncated TFL1 header")
    if data[:4] != TENSOR_MAGIC:
        raise FormatError(f"{path}: bad TFL1 magic {data[:4]!r}")
    (ndim,) = struct.unpack("<I", data[4:8])
    if ndim < 1:
        raise FormatError(f"{path}: TFL1 ndim must be >= 1, got {ndim}")
    if len(data) < 8 + 4 * ndim:
        raise FormatError(f"{path}: truncated TFL1 dimension list")
    dims = struct.unpack(f"<{ndim}I", data[8 : 8 + 4 * ndim])
    payload = data[8 + 4 * ndim :]
    expected = int(np.prod(dims)) * 8
    if len(payload) != expected:
        raise FormatError(f"{path}: TFL1 payload is {len(payload)} bytes, dims {dims} imply {expected}")
    return np.frombuffer(payload, dtype="<f8").reshape(dims).copy()


def read_matrix(path) -> np.ndarray:
    """Read a delimited numeric text matrix (comma or whitespace separated)."""
    path = Path(path)
    if not path.exists():
        raise FormatError(f"no such file: {path}")
    lines = path.read_text().splitlines()
    delimiter = "," if lines and "," in lines[0] else None
    try:
        arr = np.loadtxt(path, delimiter=delimiter, ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"{path}: not a numeric matrix: {exc}") from exc
    return arr


def write_matrix(path, values, delimiter: str = ",") -> None:
    """Write a 2-D array as delimited text with round-trip float precision."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ContractError(f"expected a 2-D matrix, got shape {arr.shape}")
    np.savetxt(path, arr, fmt="%.17g", delimiter=delimiter)
