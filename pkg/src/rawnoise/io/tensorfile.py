"""Binary tensor files ("NRAW").

Layout, all integers little-endian unsigned 32-bit:

    magic "NRAW" | format version | dtype code | rank | dims... | payload

The only dtype code is 1 (32-bit float, little-endian); the payload is
row-major.  Storage is 32-bit for economy while all computation stays in
64-bit: readers upcast on load, and since every float32 is exactly
representable as float64 the write/read/write round trip is bit-exact.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import BadTensorFileError
from .atomic import atomic_write_bytes

MAGIC = b"NRAW"
FORMAT_VERSION = 1
DTYPE_F32 = 1


def tensor_to_bytes(array: np.ndarray) -> bytes:
    array = np.ascontiguousarray(array, dtype="<f4")
    header = MAGIC + struct.pack("<III", FORMAT_VERSION, DTYPE_F32, array.ndim)
    header += struct.pack(f"<{array.ndim}I", *array.shape)
    return header + array.tobytes()


def tensor_from_bytes(raw: bytes) -> np.ndarray:
    if len(raw) < 16 or raw[:4] != MAGIC:
        raise BadTensorFileError("not an NRAW tensor file (bad magic)")
    version, dtype_code, rank = struct.unpack("<III", raw[4:16])
    if version != FORMAT_VERSION:
        raise BadTensorFileError(f"unsupported tensor format version {version}")
    if dtype_code != DTYPE_F32:
        raise BadTensorFileError(f"unsupported dtype code {dtype_code}")
    offset = 16
    if len(raw) < offset + 4 * rank:
        raise BadTensorFileError("truncated tensor header")
    dims = struct.unpack(f"<{rank}I", raw[offset : offset + 4 * rank])
    offset += 4 * rank
    count = int(np.prod(dims)) if rank else 1
    payload = raw[offset:]
    if len(payload) != 4 * count:
        raise BadTensorFileError(
            f"payload length {len(payload)} does not match dims {dims} (need {4 * count})"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(dims).astype(np.float64)


def write_tensor(path, array: np.ndarray) -> None:
    atomic_write_bytes(Path(path), tensor_to_bytes(array))


def read_tensor(path) -> np.ndarray:
    return tensor_from_bytes(Path(path).read_bytes())
