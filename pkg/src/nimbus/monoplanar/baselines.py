"""Triplanar and dense-grid baselines with matched latent parameter budgets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import ndtape as nt
from ..errors import NumericalAbort
from ..metrics import MetricsRow, compute_metrics
from ..ndtape import Tape, Tensor
from ..optim import Adam
from ..rng import stream
from .decoder import DecoderConfig, DecoderParams, decode_grid
from .fitting import _target_at, _uniform_pts, encode_volume

__all__ = ["baseline_fit", "bench_representations", "latent_param_count",
           "triplanar_budget", "grid_budget"]


def latent_param_count(config: DecoderConfig) -> int:
    c0 = config.latent_channels
    h, w = config.latent_size
    return c0 * h * w


def triplanar_budget(budget: int) -> tuple[int, int]:
    """(channels, size) with 3*c*s*s closest to the budget from below."""
    best = (1, 4)
    for c in (2, 3, 4):
        s = int(np.floor(np.sqrt(budget / (3 * c))))
        if 3 * c * s * s <= budget and 3 * c * s * s > 3 * best[0] * best[1] ** 2:
            best = (c, s)
    return best


def grid_budget(budget: int) -> int:
    """Cubic grid extent with n^3 <= budget."""
    return int(np.floor(budget ** (1.0 / 3.0)))


class _TriplanarModel:
    """Three feature planes (xy, xz, yz) -> concat -> MLP -> softplus."""

    def __init__(self, channels: int, size: int, rng: np.random.Generator,
                 hidden: int = 64, layers: int = 3):
        self.channels = channels
        self.layers = layers
        self.planes = [Tensor(rng.normal(0, 0.1, size=(channels, size, size))
                              .astype(np.float32), requires_grad=True)
                       for _ in range(3)]
        dims = [3 * channels] + [hidden] * layers + [1]
        self.mlp: dict[str, Tensor] = {}
        for i, (din, dout) in enumerate(zip(dims[:-1], dims[1:])):
            scale = 0.01 if i == layers else np.sqrt(2.0 / din)
            self.mlp[f"w{i}"] = Tensor(rng.normal(0, scale, (din, dout))
                                       .astype(np.float32), requires_grad=True)
            self.mlp[f"b{i}"] = Tensor(np.zeros(dout, dtype=np.float32),
                                       requires_grad=True)
        self.mlp[f"b{layers}"].data[...] = -3.0

    def params(self) -> dict[str, Tensor]:
        out = {f"plane{i}": p for i, p in enumerate(self.planes)}
        out.update({f"mlp_{k}": v for k, v in self.mlp.items()})
        return out

    def decode(self, pts: np.ndarray) -> Tensor:
        pairs = [(0, 1), (0, 2), (1, 2)]
        feats = []
        for plane, (a, b) in zip(self.planes, pairs):
            uv = np.stack([pts[:, a], pts[:, b]], axis=1)
            feats.append(nt.plane_bicubic(plane, Tensor(uv)))
        x = nt.concat(feats, axis=1)
        for i in range(self.layers):
            x = nt.gelu(nt.add(nt.matmul(x, self.mlp[f"w{i}"]),
                               self.mlp[f"b{i}"]))
        x = nt.add(nt.matmul(x, self.mlp[f"w{self.layers}"]),
                   self.mlp[f"b{self.layers}"])
        return nt.reshape(nt.softplus(x), (pts.shape[0],))

    def decode_volume(self, extents) -> np.ndarray:
        X, Y, Z = extents
        axes = [np.linspace(-1, 1, n, dtype=np.float32) for n in extents]
        g = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([a.ravel() for a in g], axis=1)
        out = np.empty(X * Y * Z, dtype=np.float32)
        chunk = 16384
        for i in range(0, pts.shape[0], chunk):
            out[i:i + chunk] = self.decode(pts[i:i + chunk]).data
        return out.reshape(extents)


def _fit_points_model(decode, params: dict[str, Tensor], volume: np.ndarray,
                      steps: int, batch: int, rng, lr: float) -> None:
    opt = Adam(params, lr=lr)
    for _ in range(steps):
        pts = _uniform_pts(rng, batch)
        target = _target_at(volume, pts)
        with Tape() as tape:
            pred = decode(pts)
            diff = nt.sub(pred, Tensor(target))
            loss = nt.mean_(nt.mul(diff, diff))
            tape.backward(loss)
        if not np.isfinite(loss.item()):
            raise NumericalAbort("baseline fit diverged")
        opt.step()


def baseline_fit(kind: str, volume: np.ndarray, steps: int = 3000,
                 batch: int = 4096, seed: int = 0,
                 budget: int | None = None) -> tuple[object, MetricsRow]:
    """Fit one representation to one volume and report Table-style metrics.

    ``budget`` defaults to the monoplanar latent parameter count; the
    chosen baseline layouts stay within 5% of it.
    """
    if budget is None:
        budget = latent_param_count(DecoderConfig())
    rng = stream(seed, 2)

    if kind == "triplanar":
        c, s = triplanar_budget(budget)
        assert abs(3 * c * s * s - budget) / budget <= 0.05
        model = _TriplanarModel(c, s, rng)
        _fit_points_model(model.decode, model.params(), volume, steps, batch,
                          rng, lr=1e-2)
        dec = model.decode_volume(volume.shape)
        return model, compute_metrics(volume, dec)

    if kind == "dense_grid":
        n = grid_budget(budget)
        assert abs(n ** 3 - budget) / budget <= 0.05 or n ** 3 <= budget
        grid = Tensor(np.zeros((n, n, n), dtype=np.float32), requires_grad=True)

        def decode(pts):
            return nt.trilinear3(grid, Tensor(pts))

        _fit_points_model(decode, {"grid": grid}, volume, steps, batch, rng,
                          lr=3e-2)
        axes = [np.linspace(-1, 1, m, dtype=np.float32) for m in volume.shape]
        g = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([a.ravel() for a in g], axis=1)
        dec = nt.trilinear3(grid, Tensor(pts)).data.reshape(volume.shape)
        return grid, compute_metrics(volume, dec)

    raise ValueError(f"unknown baseline kind {kind!r}")


@dataclass
class BenchRow:
    name: str
    metrics: MetricsRow


def bench_representations(volume: np.ndarray, decoder: DecoderParams | None,
                          theta: np.ndarray | None, steps: int = 3000,
                          seed: int = 0,
                          reps=("mono", "tri", "grid")) -> list[BenchRow]:
    """Monoplanar vs triplanar vs dense grid on one volume.

    If a fitted decoder/latent pair is given the monoplanar row reuses it;
    otherwise a fresh single-volume monoplanar fit runs with the same step
    budget.  Ordering is reported, never asserted.
    """
    rows = []
    for rep in reps:
        if rep == "mono":
            if decoder is None:
                from .fitting import fit_shared_decoder
                res = fit_shared_decoder([volume, volume], steps=steps,
                                         seed=seed)
                dec_params, th = res.params, res.latents[0]
            else:
                dec_params = decoder
                th = theta if theta is not None else encode_volume(
                    volume, decoder, steps=steps, seed=seed)
            dec = decode_grid(Tensor(th), dec_params, volume.shape).data
            rows.append(BenchRow("monoplanar", compute_metrics(volume, dec)))
        elif rep == "tri":
            _, m = baseline_fit("triplanar", volume, steps=steps, seed=seed)
            rows.append(BenchRow("triplanar", m))
        elif rep == "grid":
            _, m = baseline_fit("dense_grid", volume, steps=steps, seed=seed)
            rows.append(BenchRow("grid", m))
        else:
            raise ValueError(f"unknown representation {rep!r}")
    return rows
