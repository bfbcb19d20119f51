"""Seeded 3D Perlin gradient noise with fractal octaves, vectorized."""

from __future__ import annotations

import numpy as np

__all__ = ["PerlinNoise", "fbm"]

# 12 cube-edge gradient directions
_GRADS = np.array([
    [1, 1, 0], [-1, 1, 0], [1, -1, 0], [-1, -1, 0],
    [1, 0, 1], [-1, 0, 1], [1, 0, -1], [-1, 0, -1],
    [0, 1, 1], [0, -1, 1], [0, 1, -1], [0, -1, -1],
], dtype=np.float32)


def _fade(t: np.ndarray) -> np.ndarray:
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


class PerlinNoise:
    """Classic permutation-table Perlin noise; values roughly in [-1, 1]."""

    def __init__(self, rng: np.random.Generator):
        perm = rng.permutation(256).astype(np.int64)
        self._perm = np.concatenate([perm, perm])

    def _hash(self, xi, yi, zi):
        p = self._perm
        return p[p[p[xi & 255] + (yi & 255)] + (zi & 255)] % 12

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        """pts is [..., 3]; returns noise of shape pts.shape[:-1]."""
        p = np.asarray(pts, dtype=np.float64)
        pi = np.floor(p).astype(np.int64)
        pf = (p - pi).astype(np.float32)
        u, v, w = _fade(pf[..., 0]), _fade(pf[..., 1]), _fade(pf[..., 2])

        def corner(dx, dy, dz):
            g = _GRADS[self._hash(pi[..., 0] + dx, pi[..., 1] + dy,
                                  pi[..., 2] + dz)]
            off = pf - np.array([dx, dy, dz], dtype=np.float32)
            return (g * off).sum(axis=-1)

        n000, n100 = corner(0, 0, 0), corner(1, 0, 0)
        n010, n110 = corner(0, 1, 0), corner(1, 1, 0)
        n001, n101 = corner(0, 0, 1), corner(1, 0, 1)
        n011, n111 = corner(0, 1, 1), corner(1, 1, 1)

        nx00 = n000 + u * (n100 - n000)
        nx10 = n010 + u * (n110 - n010)
        nx01 = n001 + u * (n101 - n001)
        nx11 = n011 + u * (n111 - n011)
        nxy0 = nx00 + v * (nx10 - nx00)
        nxy1 = nx01 + v * (nx11 - nx01)
        return nxy0 + w * (nxy1 - nxy0)


def fbm(pts: np.ndarray, octaves: int, gain: float, lacunarity: float,
        rng: np.random.Generator) -> np.ndarray:
    """Fractal sum of Perlin octaves, normalized to roughly [-1, 1]."""
    noise = PerlinNoise(rng)
    out = np.zeros(np.asarray(pts).shape[:-1], dtype=np.float32)
    amp, freq, total = 1.0, 1.0, 0.0
    for _ in range(int(octaves)):
        offset = rng.uniform(0.0, 100.0, size=3)
        out += amp * noise(pts * freq + offset)
        total += amp
        amp *= gain
        freq *= lacunarity
    return out / max(total, 1e-9)
