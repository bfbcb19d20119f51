"""Procedural cumulus-like density fields.

A cloud is a union of ellipsoid puffs carved by fractal Perlin noise and
an erosion threshold, with a flat base and a wispy top.  The construction
guarantees: densities in [0,1], a zero shell of >= 2 voxels on every face
(so clamped resampling cannot leak mass), and at least as much mass below
mid-height as above it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyFieldError
from ..rng import stream
from .noise import fbm

__all__ = ["CloudSpec", "generate_cloud", "grid_coords", "DEFAULT_EXTENTS"]

DEFAULT_EXTENTS = (64, 32, 64)
MARGIN = 2  # zero-density shell, voxels per face


@dataclass
class CloudSpec:
    """Deterministic description of one procedural cloud."""

    seed: int
    base_shape: list[tuple[tuple[float, float, float],
                           tuple[float, float, float]]] = field(default_factory=list)
    noise_octaves: int = 3
    noise_gain: float = 0.55
    noise_lacunarity: float = 2.1
    noise_frequency: float = 2.4
    erosion_threshold: float = 0.15
    grid_extents: tuple[int, int, int] = DEFAULT_EXTENTS

    @staticmethod
    def random(seed: int, extents: tuple[int, int, int] = DEFAULT_EXTENTS,
               n_puffs: int | None = None) -> "CloudSpec":
        """Puff layout drawn deterministically from the seed."""
        rng = stream(seed, 0)
        if n_puffs is None:
            n_puffs = int(rng.integers(4, 8))
        puffs = []
        for _ in range(n_puffs):
            center = (float(rng.uniform(-0.40, 0.40)),
                      float(rng.uniform(-0.30, 0.25)),
                      float(rng.uniform(-0.40, 0.40)))
            radii = (float(rng.uniform(0.30, 0.65)),
                     float(rng.uniform(0.30, 0.55)),
                     float(rng.uniform(0.30, 0.65)))
            puffs.append((center, radii))
        return CloudSpec(seed=seed, base_shape=puffs, grid_extents=extents)


def grid_coords(extents: tuple[int, int, int]) -> tuple[np.ndarray, ...]:
    """Node-centered normalized coordinates, one [X,Y,Z] array per axis."""
    axes = [np.linspace(-1.0, 1.0, n, dtype=np.float32) for n in extents]
    return tuple(np.meshgrid(*axes, indexing="ij"))


def _smoothstep(x: np.ndarray) -> np.ndarray:
    t = np.clip(x, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def generate_cloud(spec: CloudSpec) -> np.ndarray:
    """Render the spec to a density grid in [0,1]; deterministic per seed."""
    for n in spec.grid_extents:
        if n < 8:
            raise ValueError(f"grid extents must be >= 8, got {spec.grid_extents}")
    X, Y, Z = spec.grid_extents
    gx, gy, gz = grid_coords(spec.grid_extents)

    envelope = np.zeros((X, Y, Z), dtype=np.float32)
    for center, radii in spec.base_shape:
        if min(radii) <= 0.0:
            continue
        d2 = (((gx - center[0]) / radii[0]) ** 2 +
              ((gy - center[1]) / radii[1]) ** 2 +
              ((gz - center[2]) / radii[2]) ** 2)
        envelope = np.maximum(envelope, 1.0 - d2)
    envelope = np.clip(envelope, 0.0, 1.0) ** 0.45
    if envelope.max() <= 0.0:
        raise EmptyFieldError("cloud envelope is empty (degenerate puff radii)")

    # flat base, wispy top
    base_h, ramp = -0.55, 0.18
    vertical = _smoothstep((gy - base_h) / ramp)
    vertical *= 1.0 - 0.5 * _smoothstep((gy - 0.05) / 0.75)

    pts = np.stack([gx, gy, gz], axis=-1) * spec.noise_frequency
    n01 = 0.5 + 0.5 * fbm(pts, spec.noise_octaves, spec.noise_gain,
                          spec.noise_lacunarity, stream(spec.seed, 1))

    carved = envelope * vertical * (0.45 + 0.55 * n01)
    tau = float(spec.erosion_threshold)
    if tau >= 1.0:
        density = np.zeros_like(carved)
    else:
        density = _smoothstep((carved - tau) / (1.0 - tau))

    # zero shell so clamped resampling never leaks mass
    density[:MARGIN], density[-MARGIN:] = 0.0, 0.0
    density[:, :MARGIN], density[:, -MARGIN:] = 0.0, 0.0
    density[:, :, :MARGIN], density[:, :, -MARGIN:] = 0.0, 0.0

    # cumulus guarantee: mean density below mid-height >= mean above
    lower, upper = density[:, :Y // 2], density[:, Y // 2:]
    m_low, m_up = float(lower.mean()), float(upper.mean())
    if m_up > m_low:
        upper *= 0.0 if m_low == 0.0 else m_low / m_up

    occupancy = float((density > 0.05).mean())
    if occupancy < 0.01:
        raise EmptyFieldError(
            f"generated field is empty: occupancy {occupancy:.4f} < 0.01")
    return density.astype(np.float32)
