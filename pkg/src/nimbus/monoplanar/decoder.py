"""Monoplanar implicit representation and its shared decoder.

A volume is encoded by a single coarse feature plane over the horizontal
(x, z) footprint.  Decoding a position (x, y, z):

* a convolutional upsampler lifts the plane to twice the resolution and
  doubles the channels (C0 -> N);
* the upsampled plane is sampled bicubically at (x, z), giving an
  N-vector that is re-read as a 1D grid over [-1, 1];
* that grid is sampled linearly at the window positions
  ``y - 1 + k * delta`` (k = 0..N-1, delta = 2/(N-1), clamped), so the
  window contents shift with height;
* an MLP with a softplus head maps the N window samples to a density.

All plane operations (upsampling, symmetric 3x3 kernels, bicubic lookup)
commute with flips and transpositions of the plane, which makes the
decoder exactly equivariant to the eight dihedral ops.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import ndtape as nt
from ..ndtape import Tensor

__all__ = ["DecoderConfig", "DecoderParams", "window_positions",
           "upsample_plane", "decode_points", "decode_grid", "decode_density",
           "compression_ratio"]

# dihedral-symmetric 3x3 kernel basis: (center, edge, corner) -> 9 taps
_SYM_BASIS = np.zeros((3, 9), dtype=np.float32)
_SYM_BASIS[0, 4] = 1.0
_SYM_BASIS[1, [1, 3, 5, 7]] = 1.0
_SYM_BASIS[2, [0, 2, 6, 8]] = 1.0


@dataclass
class DecoderConfig:
    latent_channels: int = 8          # C0
    latent_size: tuple[int, int] = (32, 32)
    mlp_hidden: int = 64
    mlp_layers: int = 3

    @property
    def feature_channels(self) -> int:
        """N: upsampled channel count == window sample count."""
        return 2 * self.latent_channels

    def as_dict(self) -> dict:
        return {"latent_channels": self.latent_channels,
                "latent_size": list(self.latent_size),
                "mlp_hidden": self.mlp_hidden,
                "mlp_layers": self.mlp_layers}

    @staticmethod
    def from_dict(d: dict) -> "DecoderConfig":
        return DecoderConfig(latent_channels=d["latent_channels"],
                             latent_size=tuple(d["latent_size"]),
                             mlp_hidden=d["mlp_hidden"],
                             mlp_layers=d["mlp_layers"])


@dataclass
class DecoderParams:
    """Shared upsampler + MLP weights; all tensors carry requires_grad."""

    config: DecoderConfig
    tensors: dict[str, Tensor] = field(default_factory=dict)

    @staticmethod
    def initialize(config: DecoderConfig, rng: np.random.Generator) -> "DecoderParams":
        c0 = config.latent_channels
        c1 = config.feature_channels
        hid = config.mlp_hidden
        t: dict[str, Tensor] = {}

        def par(name, arr):
            t[name] = Tensor(arr.astype(np.float32), requires_grad=True)

        par("up1_w", rng.normal(0, np.sqrt(2.0 / (c0 * 9)), size=(c1, c0, 3)))
        par("up1_b", np.zeros(c1))
        par("up2_w", rng.normal(0, np.sqrt(2.0 / (c1 * 9)), size=(c1, c1, 3)))
        par("up2_b", np.zeros(c1))

        dims = [c1] + [hid] * config.mlp_layers + [1]
        for i, (din, dout) in enumerate(zip(dims[:-1], dims[1:])):
            scale = 0.01 if i == config.mlp_layers else np.sqrt(2.0 / din)
            par(f"mlp_w{i}", rng.normal(0, scale, size=(din, dout)))
            par(f"mlp_b{i}", np.zeros(dout))
        # start the softplus head near zero density
        t[f"mlp_b{config.mlp_layers}"].data[...] = -3.0
        return DecoderParams(config, t)

    def named(self, prefix: str = "dec.") -> dict[str, Tensor]:
        return {prefix + k: v for k, v in self.tensors.items()}

    def state(self) -> dict[str, np.ndarray]:
        return {k: v.data.copy() for k, v in self.tensors.items()}

    @staticmethod
    def from_state(config: DecoderConfig, state: dict) -> "DecoderParams":
        p = DecoderParams(config, {k: Tensor(v, requires_grad=True)
                                   for k, v in state.items()})
        return p


def _sym_kernel(params_3: Tensor) -> Tensor:
    """[O,I,3] symmetric coefficients -> [O,I,3,3] kernel (taped)."""
    o, i, _ = params_3.shape
    flat = nt.reshape(params_3, (o * i, 3))
    k = nt.matmul(flat, Tensor(_SYM_BASIS))
    return nt.reshape(k, (o, i, 3, 3))


def upsample_plane(params: DecoderParams, plane: Tensor) -> Tensor:
    """[C0,H,W] latent plane -> [N,2H,2W] feature plane."""
    t = params.tensors
    c0, h, w = plane.shape
    x = nt.reshape(plane, (1, c0, h, w))
    x = nt.upsample2_bilinear(x)
    x = nt.conv2d(x, _sym_kernel(t["up1_w"]), t["up1_b"])
    x = nt.gelu(x)
    x = nt.conv2d(x, _sym_kernel(t["up2_w"]), t["up2_b"])
    n = params.config.feature_channels
    return nt.reshape(x, (n, 2 * h, 2 * w))


def window_positions(y: np.ndarray, n: int) -> np.ndarray:
    """Window sample positions y - 1 + k*delta, delta = 2/(n-1), unclamped."""
    delta = 2.0 / (n - 1)
    k = np.arange(n, dtype=np.float32)
    return np.asarray(y, dtype=np.float32)[..., None] - 1.0 + k * delta


def _mlp(params: DecoderParams, x: Tensor) -> Tensor:
    t = params.tensors
    L = params.config.mlp_layers
    for i in range(L):
        x = nt.add(nt.matmul(x, t[f"mlp_w{i}"]), t[f"mlp_b{i}"])
        x = nt.gelu(x)
    x = nt.add(nt.matmul(x, t[f"mlp_w{L}"]), t[f"mlp_b{L}"])
    return nt.softplus(x)


def decode_points(theta: Tensor, params: DecoderParams, pts: np.ndarray) -> Tensor:
    """Densities at pts [M,3] in [-1,1]^3 (x, y-vertical, z); returns [M]."""
    pts = np.asarray(pts, dtype=np.float32)
    n = params.config.feature_channels
    feat = upsample_plane(params, theta)
    uv = pts[:, [0, 2]]
    F = nt.plane_bicubic(feat, Tensor(uv))                # [M, N]
    tpos = window_positions(pts[:, 1], n)                 # [M, N]
    samples = nt.vec_linear(F, Tensor(tpos))              # [M, N]
    out = _mlp(params, samples)                           # [M, 1]
    return nt.reshape(out, (pts.shape[0],))


def decode_grid(theta: Tensor, params: DecoderParams,
                extents: tuple[int, int, int]) -> Tensor:
    """Proxy grid: densities at every voxel center, differentiable to theta.

    The plane is sampled once per (x, z) column; the vertical window then
    collapses to a single constant matrix multiply shared by all columns.
    """
    X, Y, Z = extents
    n = params.config.feature_channels
    feat = upsample_plane(params, theta)

    xs = np.linspace(-1.0, 1.0, X, dtype=np.float32)
    zs = np.linspace(-1.0, 1.0, Z, dtype=np.float32)
    ys = np.linspace(-1.0, 1.0, Y, dtype=np.float32)
    gu, gv = np.meshgrid(xs, zs, indexing="ij")
    uv = np.stack([gu.ravel(), gv.ravel()], axis=1)       # [X*Z, 2]
    F = nt.plane_bicubic(feat, Tensor(uv))                # [X*Z, N]

    wins = np.concatenate([nt.window_matrix(window_positions(ys[j], n), n)
                           for j in range(Y)], axis=1)    # [N, Y*N]
    samples = nt.matmul(F, Tensor(wins))                  # [X*Z, Y*N]
    samples = nt.reshape(samples, (X, Z, Y, n))
    samples = nt.transpose(samples, (0, 2, 1, 3))         # [X, Y, Z, N]
    samples = nt.reshape(samples, (X * Y * Z, n))
    out = _mlp(params, samples)
    return nt.reshape(out, (X, Y, Z))


def decode_density(theta: Tensor, params: DecoderParams, p) -> float:
    """Density at a single position (x, y, z)."""
    return float(decode_points(theta, params, np.asarray(p, dtype=np.float32)
                               .reshape(1, 3)).item())


def compression_ratio(config: DecoderConfig,
                      extents: tuple[int, int, int]) -> float:
    """Voxels of the proxy grid per latent parameter."""
    c0 = config.latent_channels
    h, w = config.latent_size
    return float(np.prod(extents)) / float(c0 * h * w)
