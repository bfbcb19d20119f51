"""VOL1 density volumes and LAT1 latent planes.

VOL1: magic ``VOL1`` | u32 extents x,y,z | f32 payload (C order, x-major).
LAT1: magic ``LAT1`` | u32 C,H,W | f32 payload.
Little-endian throughout.  The y axis is vertical; x and z span the
horizontal footprint of the cloud box.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

__all__ = ["save_vol", "load_vol", "save_lat", "load_lat", "atomic_write"]


def atomic_write(path, data: bytes) -> None:
    """Write via temp file + rename so interrupted runs leave no partial file."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)


def _pack3(magic: bytes, arr: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(arr, dtype=np.float32)
    if arr.ndim != 3:
        raise ValueError(f"expected a 3D array, got shape {arr.shape}")
    return magic + struct.pack("<3I", *arr.shape) + arr.astype("<f4").tobytes()


def _unpack3(magic: bytes, buf: bytes) -> np.ndarray:
    if buf[:4] != magic:
        raise ValueError(f"bad magic: expected {magic!r}, got {buf[:4]!r}")
    shape = struct.unpack_from("<3I", buf, 4)
    n = int(np.prod(shape))
    arr = np.frombuffer(buf, dtype="<f4", count=n, offset=16).reshape(shape)
    return arr.astype(np.float32)


def save_vol(path, density: np.ndarray) -> None:
    atomic_write(path, _pack3(b"VOL1", density))


def load_vol(path) -> np.ndarray:
    return _unpack3(b"VOL1", Path(path).read_bytes())


def save_lat(path, plane: np.ndarray) -> None:
    atomic_write(path, _pack3(b"LAT1", plane))


def load_lat(path) -> np.ndarray:
    return _unpack3(b"LAT1", Path(path).read_bytes())
