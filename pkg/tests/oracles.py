"""Independent reference implementations used as test oracles.

Everything here is deliberately written in the most literal scalar style
possible and shares no code with the package under test.
"""

from __future__ import annotations

import numpy as np


def finite_diff(f, x: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """Central finite differences of a scalar function, 64-bit accumulation."""
    x = np.asarray(x, dtype=np.float32)
    g = np.zeros(x.size, dtype=np.float64)
    flat = x.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = float(f(x))
        flat[i] = orig - h
        fm = float(f(x))
        flat[i] = orig
        g[i] = (fp - fm) / (2.0 * h)
    return g.reshape(x.shape)


def rel_err(a, b, floor: float = 1e-6) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


def catmull_rom_1d(p0, p1, p2, p3, t):
    return (p1 + 0.5 * t * (p2 - p0 + t * (2 * p0 - 5 * p1 + 4 * p2 - p3 +
            t * (3 * (p1 - p2) + p3 - p0))))


def bicubic_reference(plane: np.ndarray, u: float, v: float) -> np.ndarray:
    """Scalar Catmull-Rom bicubic sample of plane [C,H,W], uv in [-1,1]."""
    C, H, W = plane.shape
    u = min(max(u, -1.0), 1.0)
    v = min(max(v, -1.0), 1.0)
    fr = (u + 1.0) * 0.5 * (H - 1)
    fc = (v + 1.0) * 0.5 * (W - 1)
    ir, ic = int(np.floor(fr)), int(np.floor(fc))
    tr, tc = fr - ir, fc - ic
    out = np.zeros(C)
    for c in range(C):
        rows = []
        for a in (-1, 0, 1, 2):
            r = min(max(ir + a, 0), H - 1)
            taps = [plane[c, r, min(max(ic + b, 0), W - 1)] for b in (-1, 0, 1, 2)]
            rows.append(catmull_rom_1d(*[float(x) for x in taps], tc))
        out[c] = catmull_rom_1d(*rows, tr)
    return out


def trilinear_reference(grid: np.ndarray, p) -> float:
    """Scalar trilinear sample of grid [X,Y,Z] at p in [-1,1]^3."""
    X, Y, Z = grid.shape
    coords = []
    for val, n in zip(p, (X, Y, Z)):
        val = min(max(float(val), -1.0), 1.0)
        x = (val + 1.0) * 0.5 * (n - 1)
        i = min(int(np.floor(x)), n - 2)
        coords.append((i, x - i))
    (ix, fx), (iy, fy), (iz, fz) = coords
    acc = 0.0
    for a in (0, 1):
        for b in (0, 1):
            for c in (0, 1):
                w = ((fx if a else 1 - fx) * (fy if b else 1 - fy) *
                     (fz if c else 1 - fz))
                acc += w * float(grid[ix + a, iy + b, iz + c])
    return acc


def ssim_reference(a: np.ndarray, b: np.ndarray, data_range: float) -> float:
    """Direct SSIM with an 11x11 sigma-1.5 Gaussian window, scalar loops."""
    k = 11
    half = k // 2
    ax = np.arange(k) - half
    g1 = np.exp(-(ax ** 2) / (2 * 1.5 ** 2))
    win = np.outer(g1, g1)
    win /= win.sum()
    c1 = (0.01 * data_range) ** 2
    c2 = (0.03 * data_range) ** 2
    H, W = a.shape
    vals = []
    for i in range(half, H - half):
        for j in range(half, W - half):
            pa = a[i - half:i + half + 1, j - half:j + half + 1].astype(np.float64)
            pb = b[i - half:i + half + 1, j - half:j + half + 1].astype(np.float64)
            mu_a = (win * pa).sum()
            mu_b = (win * pb).sum()
            va = (win * pa * pa).sum() - mu_a ** 2
            vb = (win * pb * pb).sum() - mu_b ** 2
            cab = (win * pa * pb).sum() - mu_a * mu_b
            vals.append(((2 * mu_a * mu_b + c1) * (2 * cab + c2)) /
                        ((mu_a ** 2 + mu_b ** 2 + c1) * (va + vb + c2)))
    return float(np.mean(vals))
