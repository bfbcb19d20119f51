"""HDR radiance images as PFM, LDR previews as PNG.

PFM follows the conventional layout: ``PF`` (color) / ``Pf`` (gray) header,
``width height`` line, scale line whose sign encodes endianness (negative =
little-endian), then rows bottom-up.  We always write little-endian.
PNG previews are tone mapped with exposure * gamma 2.2.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .volume import atomic_write

__all__ = ["save_pfm", "load_pfm", "save_png", "tonemap"]


def save_pfm(path, image: np.ndarray) -> None:
    """image is [H,W] or [H,W,3], row 0 at the top."""
    img = np.asarray(image, dtype=np.float32)
    if img.ndim == 2:
        header = b"Pf\n"
        h, w = img.shape
    elif img.ndim == 3 and img.shape[2] == 3:
        header = b"PF\n"
        h, w = img.shape[:2]
    else:
        raise ValueError(f"PFM wants [H,W] or [H,W,3], got {img.shape}")
    body = header + f"{w} {h}\n".encode() + b"-1.0\n"
    body += np.ascontiguousarray(img[::-1]).astype("<f4").tobytes()
    atomic_write(path, body)


def load_pfm(path) -> np.ndarray:
    buf = Path(path).read_bytes()
    parts = buf.split(b"\n", 3)
    kind, dims, scale, payload = parts[0], parts[1], float(parts[2]), parts[3]
    w, h = (int(v) for v in dims.split())
    channels = 3 if kind == b"PF" else 1
    dtype = "<f4" if scale < 0 else ">f4"
    arr = np.frombuffer(payload, dtype=dtype, count=w * h * channels)
    arr = arr.reshape((h, w, channels) if channels == 3 else (h, w))
    return np.ascontiguousarray(arr[::-1]).astype(np.float32)


def tonemap(image: np.ndarray, exposure: float = 1.0) -> np.ndarray:
    """HDR -> uint8 with gamma 2.2."""
    img = np.clip(np.asarray(image, dtype=np.float32) * exposure, 0.0, 1.0)
    return (np.power(img, 1.0 / 2.2) * 255.0 + 0.5).astype(np.uint8)


def save_png(path, image: np.ndarray, exposure: float = 1.0) -> None:
    from PIL import Image

    img8 = tonemap(image, exposure)
    if img8.ndim == 2:
        pil = Image.fromarray(img8, mode="L")
    else:
        pil = Image.fromarray(img8, mode="RGB")
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    pil.save(tmp, format="PNG")
    tmp.replace(path)
