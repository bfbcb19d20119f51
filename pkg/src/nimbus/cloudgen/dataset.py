"""Lazy dataset plans: descriptors for (cloud, planar transform, dihedral op)
triples, split into train/held-out strictly by cloud id."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import child_seed
from .augment import DIHEDRAL_OPS, dihedral_volume, planar_transforms, rotscale_volume
from .clouds import DEFAULT_EXTENTS, CloudSpec, generate_cloud

__all__ = ["CloudInstance", "DatasetPlan", "build_dataset"]


@dataclass(frozen=True)
class CloudInstance:
    """One volume instance; materialized on demand via realize()."""

    cloud_id: int
    spec: CloudSpec
    rotscale: tuple[float, float] | None  # (angle, scale) or None
    dihedral: str
    split: str  # "train" | "heldout"

    def realize(self) -> np.ndarray:
        v = generate_cloud(self.spec)
        if self.rotscale is not None:
            v = rotscale_volume(v, *self.rotscale)
        return dihedral_volume(v, self.dihedral)


@dataclass
class DatasetPlan:
    instances: list[CloudInstance]

    @property
    def train(self) -> list[CloudInstance]:
        return [i for i in self.instances if i.split == "train"]

    @property
    def heldout(self) -> list[CloudInstance]:
        return [i for i in self.instances if i.split == "heldout"]

    def __len__(self) -> int:
        return len(self.instances)


def build_dataset(n_clouds: int, n_xy_transforms: int = 14,
                  include_dihedral: bool = True, master_seed: int = 0,
                  holdout_fraction: float = 0.25,
                  extents: tuple[int, int, int] = DEFAULT_EXTENTS) -> DatasetPlan:
    """Plan n_clouds x n_xy_transforms x (8 if dihedral else 1) instances.

    The split is by cloud id only: no transform of a held-out cloud ever
    appears in the training partition.
    """
    if n_clouds < 1:
        raise ValueError("n_clouds must be >= 1")
    n_held = int(np.floor(n_clouds * holdout_fraction))
    held_ids = set(range(n_clouds - n_held, n_clouds))

    if n_xy_transforms == 1:
        transforms: list[tuple[float, float] | None] = [None]
    else:
        transforms = list(planar_transforms(n_xy_transforms))
    ops = DIHEDRAL_OPS if include_dihedral else ("identity",)

    instances = []
    for cid in range(n_clouds):
        spec = CloudSpec.random(child_seed(master_seed, cid), extents=extents)
        split = "heldout" if cid in held_ids else "train"
        for tr in transforms:
            for op in ops:
                instances.append(CloudInstance(cid, spec, tr, op, split))
    return DatasetPlan(instances)
