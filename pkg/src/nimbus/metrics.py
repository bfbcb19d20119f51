"""Volume quality metrics: PSNR / RMSE / MAE over the full volume and SSIM
over the center z-slice (a vertical cross-section through the cloud)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["MetricsRow", "compute_metrics", "psnr", "ssim_slice"]

PSNR_CAP_DB = 99.0


@dataclass
class MetricsRow:
    psnr: float
    rmse: float
    mae: float
    ssim: float

    def as_dict(self) -> dict:
        return {"psnr": self.psnr, "rmse": self.rmse,
                "mae": self.mae, "ssim": self.ssim}


def psnr(rmse: float, peak: float) -> float:
    if rmse <= 0.0 or peak <= 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 20.0 * np.log10(peak / rmse))


def _gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    ax = np.arange(size) - size // 2
    g = np.exp(-(ax ** 2) / (2.0 * sigma ** 2))
    win = np.outer(g, g)
    return win / win.sum()


def _filter2(img: np.ndarray, win: np.ndarray) -> np.ndarray:
    """Valid-mode 2D correlation via stride tricks."""
    k = win.shape[0]
    H, W = img.shape
    s = img.strides
    view = np.lib.stride_tricks.as_strided(
        img, shape=(H - k + 1, W - k + 1, k, k), strides=(s[0], s[1], s[0], s[1]))
    return np.einsum("ijkl,kl->ij", view, win)


def ssim_slice(ref: np.ndarray, test: np.ndarray, data_range: float) -> float:
    """SSIM between two 2D slices, 11x11 Gaussian window, standard constants."""
    a = np.asarray(ref, dtype=np.float64)
    b = np.asarray(test, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"slice shapes differ: {a.shape} vs {b.shape}")
    win = _gaussian_window()
    c1 = (0.01 * data_range) ** 2
    c2 = (0.03 * data_range) ** 2
    mu_a = _filter2(a, win)
    mu_b = _filter2(b, win)
    var_a = _filter2(a * a, win) - mu_a ** 2
    var_b = _filter2(b * b, win) - mu_b ** 2
    cov = _filter2(a * b, win) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    return float((num / den).mean())


def compute_metrics(ref: np.ndarray, test: np.ndarray) -> MetricsRow:
    """Table-style metrics; PSNR range is [0, max(ref)] (documented choice)."""
    ref = np.asarray(ref, dtype=np.float32)
    test = np.asarray(test, dtype=np.float32)
    if ref.shape != test.shape:
        raise ValueError(f"extent mismatch: {ref.shape} vs {test.shape}")
    diff = ref.astype(np.float64) - test.astype(np.float64)
    rmse = float(np.sqrt(np.mean(diff ** 2)))
    mae = float(np.mean(np.abs(diff)))
    peak = float(ref.max())
    zc = ref.shape[2] // 2
    ssim = ssim_slice(ref[:, :, zc], test[:, :, zc], data_range=max(peak, 1e-12))
    return MetricsRow(psnr=psnr(rmse, peak), rmse=rmse, mae=mae, ssim=ssim)
