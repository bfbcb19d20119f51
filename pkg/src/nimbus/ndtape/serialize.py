"""Binary tensor serialization.

Single tensor:  magic ``NT01`` | u32 rank | u32 extents... | f32 payload.
Container:      magic ``NTC1`` | u32 count | entries of
                u16 name-length | utf-8 name | NT01 blob,
with entries sorted by name so files are byte-reproducible.
All integers and floats are little-endian.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .tensor import Tensor

__all__ = ["tensor_to_bytes", "tensor_from_bytes", "save_tensor", "load_tensor",
           "save_container", "load_container"]

_MAGIC = b"NT01"
_CMAGIC = b"NTC1"


def tensor_to_bytes(t: Tensor | np.ndarray) -> bytes:
    arr = t.data if isinstance(t, Tensor) else np.asarray(t, dtype=np.float32)
    arr = np.ascontiguousarray(arr, dtype=np.float32)
    head = _MAGIC + struct.pack("<I", arr.ndim)
    head += struct.pack(f"<{arr.ndim}I", *arr.shape)
    if arr.ndim == 0:
        head = _MAGIC + struct.pack("<I", 0)
    return head + arr.astype("<f4").tobytes()


def tensor_from_bytes(buf: bytes, offset: int = 0) -> tuple[np.ndarray, int]:
    if buf[offset:offset + 4] != _MAGIC:
        raise ValueError("bad tensor magic (expected NT01)")
    (rank,) = struct.unpack_from("<I", buf, offset + 4)
    shape = struct.unpack_from(f"<{rank}I", buf, offset + 8)
    start = offset + 8 + 4 * rank
    n = int(np.prod(shape)) if rank else 1
    arr = np.frombuffer(buf, dtype="<f4", count=n, offset=start).reshape(shape)
    return arr.astype(np.float32), start + 4 * n


def save_tensor(path, t) -> None:
    Path(path).write_bytes(tensor_to_bytes(t))


def load_tensor(path) -> np.ndarray:
    arr, _ = tensor_from_bytes(Path(path).read_bytes())
    return arr


def save_container(path, tensors: dict) -> None:
    """Write a named-tensor container; ordering is canonical (sorted names)."""
    out = bytearray(_CMAGIC)
    names = sorted(tensors)
    out += struct.pack("<I", len(names))
    for name in names:
        nb = name.encode("utf-8")
        out += struct.pack("<H", len(nb)) + nb
        out += tensor_to_bytes(tensors[name])
    Path(path).write_bytes(bytes(out))


def load_container(path) -> dict[str, np.ndarray]:
    buf = Path(path).read_bytes()
    if buf[:4] != _CMAGIC:
        raise ValueError("bad container magic (expected NTC1)")
    (count,) = struct.unpack_from("<I", buf, 4)
    pos = 8
    out: dict[str, np.ndarray] = {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<H", buf, pos)
        pos += 2
        name = buf[pos:pos + nlen].decode("utf-8")
        pos += nlen
        arr, pos = tensor_from_bytes(buf, pos)
        out[name] = arr
    return out
