"""Optional fused elementwise kernels (numba), with numpy fallbacks.

Only elementwise maps live here — no reductions — so parallel execution
stays bitwise deterministic.
"""

from __future__ import annotations

import numpy as np

_C1 = np.float32(np.sqrt(2.0 / np.pi))
_C2 = np.float32(np.sqrt(2.0 / np.pi) * 0.044715)

try:
    from numba import njit, prange

    @njit("void(float32[::1], float32[::1], float32[::1])",
          cache=True, parallel=True, fastmath=False)
    def _gelu_fwd(x, th, out):
        for i in prange(x.shape[0]):
            v = x[i]
            t = np.tanh(v * (_C1 + _C2 * v * v))
            th[i] = t
            out[i] = v * np.float32(0.5) * (np.float32(1.0) + t)

    @njit("void(float32[::1], float32[::1], float32[::1], float32[::1])",
          cache=True, parallel=True, fastmath=False)
    def _gelu_bwd(x, th, g, out):
        for i in prange(x.shape[0]):
            v = x[i]
            t = th[i]
            du = _C1 + np.float32(3.0) * _C2 * v * v
            half1p = np.float32(0.5) * (np.float32(1.0) + t)
            d = half1p + v * ((np.float32(0.5) - np.float32(0.5) * t * t) * du)
            out[i] = g[i] * d

    HAVE_NUMBA = True
except Exception:  # pragma: no cover - numba always present in CI image
    HAVE_NUMBA = False


def _flat(x: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.float32).reshape(-1)


def gelu_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Returns (out, tanh-intermediate)."""
    if HAVE_NUMBA:
        xf = _flat(x)
        th = np.empty_like(xf)
        out = np.empty_like(xf)
        _gelu_fwd(xf, th, out)
        return out.reshape(x.shape), th.reshape(x.shape)
    th = np.tanh(x * (_C1 + _C2 * x * x))
    return x * (np.float32(0.5) * (np.float32(1.0) + th)), th


def gelu_backward(x: np.ndarray, th: np.ndarray, g: np.ndarray) -> np.ndarray:
    if HAVE_NUMBA:
        out = np.empty(x.size, dtype=np.float32)
        _gelu_bwd(_flat(x), _flat(th), _flat(g), out)
        return out.reshape(x.shape)
    du = _C1 + np.float32(3.0) * _C2 * x * x
    half1p = np.float32(0.5) * (np.float32(1.0) + th)
    d = half1p + x * ((np.float32(0.5) - np.float32(0.5) * th * th) * du)
    return g * d
