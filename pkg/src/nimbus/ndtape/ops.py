"""Primitive operations recorded on the tape.

Conventions: float32 storage, float64 accumulation inside reductions,
numpy-style broadcasting for elementwise binaries (gradients are summed
back over broadcast axes).  Convolutions are stride-1 with zero 'same'
padding, kernel size 1 or 3 — exactly what the decoder and denoiser need.
"""

from __future__ import annotations

import numpy as np

from .tensor import ContractViolation, Tape, Tensor, active_tape, as_tensor

__all__ = [
    "add", "sub", "mul", "div", "neg", "exp", "log", "sqrt", "absval",
    "clamp", "relu", "gelu", "softplus", "matmul", "reshape", "transpose",
    "concat", "narrow", "sum_", "mean_", "conv2d", "avg_pool2",
    "upsample2_bilinear",
]


def _record(name, inputs, out_data, backward_fn, forced_grad=False):
    tape = active_tape()
    needs = forced_grad or any(t.requires_grad for t in inputs)
    out = Tensor(out_data)
    if tape is not None and needs:
        out.requires_grad = True
        tape.record(name, inputs, out, backward_fn)
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Reduce a broadcasted gradient back to the original input shape."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (gs, s) in enumerate(zip(g.shape, shape)) if s == 1 and gs != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


# ---------------------------------------------------------------------------
# elementwise

def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = a.data + b.data

    def bwd(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _record("add", (a, b), out, bwd)


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = a.data - b.data

    def bwd(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _record("sub", (a, b), out, bwd)


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = a.data * b.data

    def bwd(g):
        return (_unbroadcast(g * b.data, a.shape),
                _unbroadcast(g * a.data, b.shape))

    return _record("mul", (a, b), out, bwd)


def div(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = a.data / b.data

    def bwd(g):
        return (_unbroadcast(g / b.data, a.shape),
                _unbroadcast(-g * a.data / (b.data * b.data), b.shape))

    return _record("div", (a, b), out, bwd)


def neg(a):
    a = as_tensor(a)
    return _record("neg", (a,), -a.data, lambda g: (-g,))


def exp(a):
    a = as_tensor(a)
    out = np.exp(a.data)
    return _record("exp", (a,), out, lambda g: (g * out,))


def log(a):
    a = as_tensor(a)
    return _record("log", (a,), np.log(a.data), lambda g: (g / a.data,))


def sqrt(a):
    a = as_tensor(a)
    out = np.sqrt(a.data)
    return _record("sqrt", (a,), out, lambda g: (g * (0.5 / out),))


def absval(a):
    a = as_tensor(a)
    return _record("abs", (a,), np.abs(a.data), lambda g: (g * np.sign(a.data),))


def clamp(a, lo=None, hi=None):
    a = as_tensor(a)
    out = np.clip(a.data, lo, hi)
    inside = np.ones_like(a.data, dtype=bool)
    if lo is not None:
        inside &= a.data >= lo
    if hi is not None:
        inside &= a.data <= hi

    def bwd(g):
        return (np.where(inside, g, 0.0),)

    return _record("clamp", (a,), out, bwd)


def relu(a):
    a = as_tensor(a)
    mask = a.data > 0
    return _record("relu", (a,), np.where(mask, a.data, 0.0), lambda g: (g * mask,))


def gelu(a):
    """tanh-approximate GELU (fused kernel; see _kernels)."""
    from . import _kernels

    a = as_tensor(a)
    x = a.data
    out, th = _kernels.gelu_forward(x)

    def bwd(g):
        return (_kernels.gelu_backward(x, th, g),)

    return _record("gelu", (a,), out, bwd)


def softplus(a):
    a = as_tensor(a)
    x = a.data
    out = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))

    def bwd(g):
        sig = 1.0 / (1.0 + np.exp(-x))
        return (g * sig,)

    return _record("softplus", (a,), out, bwd)


# ---------------------------------------------------------------------------
# structure

def reshape(a, shape):
    a = as_tensor(a)
    shape = tuple(shape)
    return _record("reshape", (a,), a.data.reshape(shape),
                   lambda g: (g.reshape(a.shape),))


def transpose(a, axes):
    a = as_tensor(a)
    axes = tuple(axes)
    inv = tuple(np.argsort(axes))
    return _record("transpose", (a,), np.ascontiguousarray(a.data.transpose(axes)),
                   lambda g: (g.transpose(inv),))


def concat(tensors, axis: int):
    tensors = [as_tensor(t) for t in tensors]
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def bwd(g):
        return tuple(np.split(g, splits, axis=axis))

    return _record("concat", tuple(tensors), out, bwd)


def narrow(a, axis: int, start: int, length: int):
    """Contiguous slice along one axis."""
    a = as_tensor(a)
    sl = [slice(None)] * a.ndim
    sl[axis] = slice(start, start + length)
    sl = tuple(sl)
    out = np.ascontiguousarray(a.data[sl])

    def bwd(g):
        full = np.zeros(a.shape, dtype=np.float32)
        full[sl] = g
        return (full,)

    return _record("narrow", (a,), out, bwd)


# ---------------------------------------------------------------------------
# reductions (float64 accumulation)

def sum_(a, axis=None, keepdims=False):
    a = as_tensor(a)
    out = a.data.sum(axis=axis, keepdims=keepdims, dtype=np.float64).astype(np.float32)

    def bwd(g):
        if axis is None:
            return (np.broadcast_to(g, a.shape).astype(np.float32),)
        gg = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(gg, a.shape).astype(np.float32),)

    return _record("sum", (a,), out, bwd)


def mean_(a, axis=None, keepdims=False):
    a = as_tensor(a)
    if axis is None:
        n = a.size
    else:
        n = int(np.prod([a.shape[ax] for ax in np.atleast_1d(axis)]))
    out = a.data.mean(axis=axis, keepdims=keepdims, dtype=np.float64).astype(np.float32)

    def bwd(g):
        if axis is None:
            return ((np.broadcast_to(g, a.shape) / n).astype(np.float32),)
        gg = g if keepdims else np.expand_dims(g, axis)
        return ((np.broadcast_to(gg, a.shape) / n).astype(np.float32),)

    return _record("mean", (a,), out, bwd)


# ---------------------------------------------------------------------------
# linear algebra

def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ContractViolation(
            f"matmul shape mismatch: {a.shape} x {b.shape}")
    out = a.data @ b.data

    def bwd(g):
        return g @ b.data.T, a.data.T @ g

    return _record("matmul", (a, b), out, bwd)


# ---------------------------------------------------------------------------
# convolution stack

def _im2col(xp: np.ndarray, k: int) -> np.ndarray:
    """xp is the zero-padded input [B,C,H+2p,W+2p]; returns [B,H,W,C,k,k]."""
    B, C, Hp, Wp = xp.shape
    H, W = Hp - k + 1, Wp - k + 1
    s = xp.strides
    view = np.lib.stride_tricks.as_strided(
        xp, shape=(B, C, H, W, k, k), strides=(s[0], s[1], s[2], s[3], s[2], s[3]))
    return np.ascontiguousarray(view.transpose(0, 2, 3, 1, 4, 5))


def conv2d(x, w, b=None):
    """Stride-1 'same' convolution; x [B,C,H,W], w [O,C,k,k], k in {1,3}."""
    x, w = as_tensor(x), as_tensor(w)
    if x.ndim != 4 or w.ndim != 4 or x.shape[1] != w.shape[1]:
        raise ContractViolation(
            f"conv2d shape mismatch: input {x.shape}, kernel {w.shape}")
    k = w.shape[2]
    if k not in (1, 3) or w.shape[3] != k:
        raise ContractViolation(f"conv2d supports 1x1/3x3 kernels, got {w.shape}")
    B, C, H, W = x.shape
    O = w.shape[0]
    p = k // 2
    if p:
        xp = np.zeros((B, C, H + 2 * p, W + 2 * p), dtype=np.float32)
        xp[:, :, p:-p, p:-p] = x.data
    else:
        xp = x.data
    cols = _im2col(xp, k).reshape(B * H * W, C * k * k)
    # true convolution: correlate with the spatially flipped kernel
    wmat = np.ascontiguousarray(w.data[:, :, ::-1, ::-1]).reshape(O, C * k * k)
    out = (cols @ wmat.T).reshape(B, H, W, O).transpose(0, 3, 1, 2)
    out = np.ascontiguousarray(out)
    inputs = [x, w]
    if b is not None:
        b = as_tensor(b)
        out += b.data.reshape(1, O, 1, 1)
        inputs.append(b)

    def bwd(g):
        gmat = np.ascontiguousarray(g.transpose(0, 2, 3, 1)).reshape(B * H * W, O)
        gw = (gmat.T @ cols).reshape(O, C, k, k)[:, :, ::-1, ::-1].copy()
        # dx: 'same' correlation of g with the O<->C swapped kernel
        wt = np.ascontiguousarray(w.data.transpose(1, 0, 2, 3))
        if p:
            gp = np.zeros((B, O, H + 2 * p, W + 2 * p), dtype=np.float32)
            gp[:, :, p:-p, p:-p] = g
        else:
            gp = g
        gcols = _im2col(gp, k).reshape(B * H * W, O * k * k)
        gx = (gcols @ wt.reshape(C, O * k * k).T).reshape(B, H, W, C)
        gx = np.ascontiguousarray(gx.transpose(0, 3, 1, 2))
        grads = [gx, gw]
        if b is not None:
            grads.append(g.sum(axis=(0, 2, 3), dtype=np.float64).astype(np.float32))
        return tuple(grads)

    return _record("conv2d", tuple(inputs), out, bwd)


def avg_pool2(x):
    x = as_tensor(x)
    B, C, H, W = x.shape
    if H % 2 or W % 2:
        raise ContractViolation(f"avg_pool2 needs even extents, got {x.shape}")
    out = x.data.reshape(B, C, H // 2, 2, W // 2, 2).mean(axis=(3, 5))

    def bwd(g):
        gx = np.repeat(np.repeat(g, 2, axis=2), 2, axis=3) * 0.25
        return (gx.astype(np.float32),)

    return _record("avg_pool2", (x,), out.astype(np.float32), bwd)


_UP_CACHE: dict[int, np.ndarray] = {}


def _up_matrix(n: int) -> np.ndarray:
    """[2n, n] bilinear 2x interpolation weights (half-pixel, edge-clamped).

    Symmetric under index reversal, which is what makes the decoder
    equivariant to plane flips.
    """
    m = _UP_CACHE.get(n)
    if m is None:
        m = np.zeros((2 * n, n), dtype=np.float32)
        for p in range(2 * n):
            s = np.clip((p + 0.5) / 2.0 - 0.5, 0.0, n - 1.0)
            i0 = int(np.floor(s))
            i1 = min(i0 + 1, n - 1)
            f = s - i0
            m[p, i0] += 1.0 - f
            m[p, i1] += f
        _UP_CACHE[n] = m
    return m


def upsample2_bilinear(x):
    x = as_tensor(x)
    B, C, H, W = x.shape
    uh, uw = _up_matrix(H), _up_matrix(W)
    out = np.einsum("ph,bchw->bcpw", uh, x.data)
    out = np.einsum("qw,bcpw->bcpq", uw, out).astype(np.float32)

    def bwd(g):
        gx = np.einsum("qw,bcpq->bcpw", uw, g)
        gx = np.einsum("ph,bcpw->bchw", uh, gx)
        return (gx.astype(np.float32),)

    return _record("upsample2", (x,), out, bwd)
