"""Monoplanar neural representation, shared decoder, fitting and baselines."""

import json
from pathlib import Path

from ..ndtape import load_container, save_container
from .decoder import (DecoderConfig, DecoderParams, compression_ratio,
                      decode_density, decode_grid, decode_points,
                      upsample_plane, window_positions)
from .fitting import (FitResult, encode_volume, fit_shared_decoder,
                      saliency_map, sample_positions, volume_psnr)
from .latent import LatentStats, transform_latent
from .baselines import (baseline_fit, bench_representations,
                        latent_param_count, triplanar_budget, grid_budget)

__all__ = [
    "DecoderConfig", "DecoderParams", "compression_ratio", "decode_density",
    "decode_grid", "decode_points", "upsample_plane", "window_positions",
    "FitResult", "encode_volume", "fit_shared_decoder", "saliency_map",
    "sample_positions", "volume_psnr", "LatentStats", "transform_latent",
    "baseline_fit", "bench_representations", "latent_param_count",
    "triplanar_budget", "grid_budget", "save_decoder", "load_decoder",
]


def save_decoder(path, params: DecoderParams) -> None:
    """Tensor container + JSON manifest of the architecture."""
    path = Path(path)
    save_container(path, params.state())
    manifest = path.with_suffix(path.suffix + ".json")
    manifest.write_text(json.dumps({"config": params.config.as_dict()},
                                   indent=2, sort_keys=True))


def load_decoder(path) -> DecoderParams:
    path = Path(path)
    manifest = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    config = DecoderConfig.from_dict(manifest["config"])
    return DecoderParams.from_state(config, load_container(path))
