"""Fitting the shared decoder and per-volume latents."""

from __future__ import annotations

import numpy as np

from .. import ndtape as nt
from ..errors import NumericalAbort
from ..metrics import compute_metrics
from ..ndtape import Tape, Tensor
from ..optim import Adam
from ..rng import stream
from .decoder import DecoderConfig, DecoderParams, decode_grid, decode_points

__all__ = ["fit_shared_decoder", "encode_volume", "saliency_map",
           "sample_positions", "volume_psnr", "FitResult"]


def _target_at(volume: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Ground-truth densities: clamped trilinear interpolation of the grid."""
    return nt.trilinear3(Tensor(volume), Tensor(pts)).data


def _uniform_pts(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=(n, 3)).astype(np.float32)


def volume_psnr(theta: Tensor, params: DecoderParams,
                volume: np.ndarray) -> float:
    """PSNR of the decoded proxy grid against the reference volume."""
    dec = decode_grid(theta, params, volume.shape).data
    return compute_metrics(volume, dec).psnr


class FitResult:
    def __init__(self, params, latents, loss_log):
        self.params: DecoderParams = params
        self.latents: list[np.ndarray] = latents
        self.loss_log: list[float] = loss_log


def _mse_step(theta: Tensor, params: DecoderParams, volume: np.ndarray,
              pts: np.ndarray, opt: Adam) -> float:
    target = _target_at(volume, pts)
    with Tape() as tape:
        pred = decode_points(theta, params, pts)
        diff = nt.sub(pred, Tensor(target))
        loss = nt.mean_(nt.mul(diff, diff))
        tape.backward(loss)
    val = loss.item()
    if not np.isfinite(val):
        raise NumericalAbort(f"decoder fit diverged: loss={val}")
    opt.step()
    return val


def fit_shared_decoder(volumes: list[np.ndarray], steps: int = 12000,
                       batch: int = 4096, seed: int = 0,
                       lr_latent: float = 1e-2, lr_decoder: float = 1e-3,
                       config: DecoderConfig | None = None,
                       log_every: int = 200) -> FitResult:
    """Jointly fit one decoder and one latent per volume (round-robin).

    Loss is mean squared density error at uniformly sampled positions.
    Divergence (non-finite loss) aborts with diagnostics.
    """
    if len(volumes) < 2:
        raise ValueError("shared fit needs at least 2 volumes")
    config = config or DecoderConfig()
    rng = stream(seed, 0)
    params = DecoderParams.initialize(config, rng)
    c0 = config.latent_channels
    h, w = config.latent_size
    thetas = [Tensor(rng.normal(0, 0.1, size=(c0, h, w)).astype(np.float32),
                     requires_grad=True) for _ in volumes]

    # Adam normalizes gradient scale per-parameter, so distinct step sizes
    # need distinct optimizer instances
    opt_dec = Adam(params.named(), lr=lr_decoder)
    opt_lat = Adam({f"lat{i}": t for i, t in enumerate(thetas)}, lr=lr_latent)

    loss_log: list[float] = []
    window: list[float] = []
    for step in range(steps):
        vi = step % len(volumes)
        pts = _uniform_pts(rng, batch)
        target = _target_at(volumes[vi], pts)
        with Tape() as tape:
            pred = decode_points(thetas[vi], params, pts)
            diff = nt.sub(pred, Tensor(target))
            loss = nt.mean_(nt.mul(diff, diff))
            tape.backward(loss)
        val = loss.item()
        if not np.isfinite(val):
            raise NumericalAbort(f"shared fit diverged at volume {vi}: loss={val}")
        opt_dec.step()
        opt_lat.step()
        window.append(val)
        if (step + 1) % log_every == 0:
            loss_log.append(float(np.mean(window)))
            window.clear()
    if window:
        loss_log.append(float(np.mean(window)))
    return FitResult(params, [t.data.copy() for t in thetas], loss_log)


def saliency_map(grid: np.ndarray) -> np.ndarray:
    """Sampling distribution from a decoded field.

    Magnitude of the spatial finite differences, box-blurred over 3^3,
    mixed 50/50 with a uniform distribution; sums to one.
    """
    g = np.asarray(grid, dtype=np.float32)
    mag = np.zeros_like(g)
    for ax in range(3):
        d = np.abs(np.diff(g, axis=ax))
        pad = [(0, 0)] * 3
        pad[ax] = (0, 1)
        mag += np.pad(d, pad)
    # 3^3 box blur via three axis passes
    for ax in range(3):
        mag = (np.roll(mag, 1, axis=ax) + mag + np.roll(mag, -1, axis=ax)) / 3.0
    total = mag.sum()
    uniform = 1.0 / g.size
    if total <= 0:
        return np.full_like(g, uniform)
    sal = mag / total
    return (0.5 * sal + 0.5 * uniform).astype(np.float32)


def sample_positions(prob: np.ndarray, n: int,
                     rng: np.random.Generator) -> np.ndarray:
    """Draw positions from a voxel distribution with in-cell jitter."""
    flat = prob.ravel().astype(np.float64)
    flat /= flat.sum()
    idx = rng.choice(flat.size, size=n, p=flat)
    X, Y, Z = prob.shape
    ix, rem = np.divmod(idx, Y * Z)
    iy, iz = np.divmod(rem, Z)
    jitter = rng.uniform(-0.5, 0.5, size=(n, 3))
    pts = np.stack([
        -1.0 + 2.0 * (ix + jitter[:, 0]) / (X - 1),
        -1.0 + 2.0 * (iy + jitter[:, 1]) / (Y - 1),
        -1.0 + 2.0 * (iz + jitter[:, 2]) / (Z - 1),
    ], axis=1)
    return np.clip(pts, -1.0, 1.0).astype(np.float32)


def encode_volume(volume: np.ndarray, params: DecoderParams,
                  theta0: np.ndarray | None = None, steps: int = 2000,
                  batch: int = 4096, seed: int = 0, lr: float = 1e-2,
                  sampler: str = "uniform",
                  loss_track: list | None = None) -> np.ndarray:
    """Latent-only gradient descent against a frozen decoder.

    ``sampler`` is 'uniform' or 'saliency'; the saliency map is derived
    from the field decoded at the initial latent.
    """
    config = params.config
    rng = stream(seed, 1)
    c0, (h, w) = config.latent_channels, config.latent_size
    if theta0 is None:
        theta0 = rng.normal(0, 0.1, size=(c0, h, w)).astype(np.float32)
    theta = Tensor(np.array(theta0, dtype=np.float32), requires_grad=True)
    opt = Adam({"theta": theta}, lr=lr)

    prob = None
    if sampler == "saliency":
        prob = saliency_map(decode_grid(theta, params, volume.shape).data)
    elif sampler != "uniform":
        raise ValueError(f"unknown sampler {sampler!r}")

    for _ in range(steps):
        if prob is None:
            pts = _uniform_pts(rng, batch)
        else:
            pts = sample_positions(prob, batch, rng)
        val = _mse_step(theta, params, volume, pts, opt)
        if loss_track is not None:
            loss_track.append(val)
    return theta.data.copy()
