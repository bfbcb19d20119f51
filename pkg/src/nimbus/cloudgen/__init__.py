"""Procedural cloud generation and the spatial augmentation family."""

from .clouds import CloudSpec, generate_cloud, grid_coords, DEFAULT_EXTENTS
from .augment import (DIHEDRAL_OPS, dihedral_volume, dihedral_plane,
                      compose_dihedral, rotscale_volume, rotscale_plane,
                      planar_transforms)
from .dataset import CloudInstance, DatasetPlan, build_dataset
from .noise import PerlinNoise, fbm

__all__ = [
    "CloudSpec", "generate_cloud", "grid_coords", "DEFAULT_EXTENTS",
    "DIHEDRAL_OPS", "dihedral_volume", "dihedral_plane", "compose_dihedral",
    "rotscale_volume", "rotscale_plane", "planar_transforms",
    "CloudInstance", "DatasetPlan", "build_dataset", "PerlinNoise", "fbm",
]
