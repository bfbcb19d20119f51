"""Latent plane utilities: transforms, standardization stats."""

from __future__ import annotations

import numpy as np

from ..cloudgen.augment import DIHEDRAL_OPS, dihedral_plane, rotscale_plane

__all__ = ["transform_latent", "LatentStats"]


def transform_latent(theta: np.ndarray, op) -> np.ndarray:
    """Apply an augmentation to a latent plane [C,H,W].

    ``op`` is either one of the eight dihedral names (exact permutation) or
    an (angle, scale) pair (bicubic resample; an initial solution that is
    meant to be refined against the transformed volume).
    """
    if isinstance(op, str):
        if op not in DIHEDRAL_OPS:
            raise ValueError(f"unknown dihedral op {op!r}")
        return dihedral_plane(theta, op)
    angle, scale = op
    return rotscale_plane(theta, float(angle), float(scale))


class LatentStats:
    """Per-channel mean/std over a latent collection (for diffusion)."""

    def __init__(self, mean: np.ndarray, std: np.ndarray):
        self.mean = mean.astype(np.float32).reshape(-1, 1, 1)
        self.std = std.astype(np.float32).reshape(-1, 1, 1)

    @staticmethod
    def fit(latents: list[np.ndarray]) -> "LatentStats":
        stack = np.stack(latents)  # [K, C, H, W]
        mean = stack.mean(axis=(0, 2, 3))
        std = stack.std(axis=(0, 2, 3)) + 1e-6
        return LatentStats(mean, std)

    def standardize(self, theta: np.ndarray) -> np.ndarray:
        return ((theta - self.mean) / self.std).astype(np.float32)

    def destandardize(self, z: np.ndarray) -> np.ndarray:
        return (z * self.std + self.mean).astype(np.float32)

    def as_dict(self) -> dict:
        return {"mean": self.mean.ravel().tolist(),
                "std": self.std.ravel().tolist()}

    @staticmethod
    def from_dict(d: dict) -> "LatentStats":
        return LatentStats(np.asarray(d["mean"], dtype=np.float32),
                           np.asarray(d["std"], dtype=np.float32))
