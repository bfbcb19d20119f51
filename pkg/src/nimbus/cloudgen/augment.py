"""Spatial augmentations over the horizontal (x, z) footprint.

The eight lossless ops form the dihedral group of the square and act as
pure permutations on both volumes and latent planes (plane axis H maps to
volume x, plane axis W to volume z).  Continuous rotations/scales resample
trilinearly with zero outside the domain and renormalize total mass.
"""

from __future__ import annotations

import numpy as np

from ..ndtape import Tensor, plane_bicubic

__all__ = ["DIHEDRAL_OPS", "dihedral_volume", "dihedral_plane",
           "compose_dihedral", "rotscale_volume", "rotscale_plane",
           "planar_transforms"]

# (transpose, flip_x, flip_z) triples; applied as transpose first, then flips
_DIHEDRAL: dict[str, tuple[bool, bool, bool]] = {
    "identity":       (False, False, False),
    "rot90":          (True,  True,  False),
    "rot180":         (False, True,  True),
    "rot270":         (True,  False, True),
    "flip_x":         (False, True,  False),
    "flip_z":         (False, False, True),
    "transpose_xz":   (True,  False, False),
    "anti_transpose": (True,  True,  True),
}
DIHEDRAL_OPS = tuple(_DIHEDRAL)


def _apply(arr: np.ndarray, ax_x: int, ax_z: int, op: str) -> np.ndarray:
    t, fx, fz = _DIHEDRAL[op]
    out = arr
    if t:
        order = list(range(arr.ndim))
        order[ax_x], order[ax_z] = order[ax_z], order[ax_x]
        out = out.transpose(order)
    if fx:
        out = np.flip(out, axis=ax_x)
    if fz:
        out = np.flip(out, axis=ax_z)
    return np.ascontiguousarray(out)


def dihedral_volume(v: np.ndarray, op: str) -> np.ndarray:
    """Exact permutation of a volume [X,Y,Z] in the (x,z) plane."""
    return _apply(v, 0, 2, op)


def dihedral_plane(plane: np.ndarray, op: str) -> np.ndarray:
    """The matching permutation of a latent plane [C,H,W]."""
    return _apply(plane, 1, 2, op)


def compose_dihedral(first: str, second: str) -> str:
    """Name of the op equivalent to applying `first` then `second`."""
    probe = np.arange(25, dtype=np.float32).reshape(1, 5, 5)
    target = dihedral_plane(dihedral_plane(probe, first), second)
    for name in DIHEDRAL_OPS:
        if np.array_equal(dihedral_plane(probe, name), target):
            return name
    raise AssertionError("dihedral ops failed to close under composition")


def _trilinear_zero_outside(v: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Trilinear sample with zero outside [-1,1]^3 (augmentation semantics)."""
    X, Y, Z = v.shape
    inside = np.all(np.abs(pts) <= 1.0, axis=-1)
    q = np.clip(pts, -1.0, 1.0)
    idx = []
    frac = []
    for a, n in zip(range(3), (X, Y, Z)):
        x = (q[..., a] + 1.0) * 0.5 * (n - 1)
        i = np.clip(np.floor(x).astype(np.int64), 0, n - 2)
        idx.append(i)
        frac.append((x - i).astype(np.float32))
    ix, iy, iz = idx
    fx, fy, fz = frac
    out = np.zeros(pts.shape[:-1], dtype=np.float32)
    for a in (0, 1):
        for b in (0, 1):
            for c in (0, 1):
                w = ((fx if a else 1 - fx) * (fy if b else 1 - fy) *
                     (fz if c else 1 - fz))
                out += w * v[ix + a, iy + b, iz + c]
    return out * inside


def rotscale_volume(v: np.ndarray, angle: float, scale: float) -> np.ndarray:
    """Rotate/scale the volume in the (x,z) plane, conserving total mass."""
    X, Y, Z = v.shape
    axes = [np.linspace(-1.0, 1.0, n, dtype=np.float32) for n in (X, Y, Z)]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    ca, sa = np.cos(-angle), np.sin(-angle)  # inverse map
    sx = (ca * gx - sa * gz) / scale
    sz = (sa * gx + ca * gz) / scale
    pts = np.stack([sx, gy, sz], axis=-1)
    out = _trilinear_zero_outside(v, pts)
    mass_in, mass_out = float(v.sum()), float(out.sum())
    if mass_out > 0.0:
        out *= mass_in / mass_out
    return out.astype(np.float32)


def rotscale_plane(plane: np.ndarray, angle: float, scale: float) -> np.ndarray:
    """Bicubic resample of a latent plane; border clamping, so the result is
    an initial solution for refinement, not an exact transform."""
    C, H, W = plane.shape
    hs = np.linspace(-1.0, 1.0, H, dtype=np.float32)
    ws = np.linspace(-1.0, 1.0, W, dtype=np.float32)
    gu, gv = np.meshgrid(hs, ws, indexing="ij")
    ca, sa = np.cos(-angle), np.sin(-angle)
    su = (ca * gu - sa * gv) / scale
    sv = (sa * gu + ca * gv) / scale
    uv = np.stack([su.ravel(), sv.ravel()], axis=1)
    out = plane_bicubic(Tensor(plane), Tensor(uv)).data  # [H*W, C]
    return out.T.reshape(C, H, W).astype(np.float32)


def planar_transforms(count: int = 14) -> list[tuple[float, float]]:
    """(angle, scale) pairs: rotations uniform in [0, 2pi) x scales {0.95, 1.05}."""
    if count % 2:
        raise ValueError("count must be even (rotations x 2 scales)")
    n_rot = count // 2
    angles = [2.0 * np.pi * k / n_rot for k in range(n_rot)]
    return [(a, s) for a in angles for s in (0.95, 1.05)]
