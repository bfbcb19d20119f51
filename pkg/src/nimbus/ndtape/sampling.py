"""Differentiable interpolation primitives.

All samplers use node-centered coordinates: a normalized coordinate of -1
maps to index 0 and +1 to index n-1, so grids reproduce their node values
exactly and out-of-domain positions clamp to the border.
"""

from __future__ import annotations

import numpy as np

from .tensor import ContractViolation, Tensor, as_tensor
from .ops import _record

__all__ = ["plane_bicubic", "bilinear_wrap", "vec_linear", "trilinear3",
           "window_matrix"]


def _catmull_rom(t: np.ndarray):
    """Weights and d/dt for stencil points at offsets -1, 0, 1, 2."""
    t2 = t * t
    t3 = t2 * t
    w = np.stack([
        -0.5 * t3 + t2 - 0.5 * t,
        1.5 * t3 - 2.5 * t2 + 1.0,
        -1.5 * t3 + 2.0 * t2 + 0.5 * t,
        0.5 * t3 - 0.5 * t2,
    ], axis=-1)
    dw = np.stack([
        -1.5 * t2 + 2.0 * t - 0.5,
        4.5 * t2 - 5.0 * t,
        -4.5 * t2 + 4.0 * t + 0.5,
        1.5 * t2 - t,
    ], axis=-1)
    return w, dw


def _scatter_plane(shape, rows, cols, weights) -> np.ndarray:
    """Accumulate weights[c, m] over flat plane indices; returns [C, H, W]."""
    C, H, W = shape
    flat = (rows * W + cols).ravel()
    out = np.empty((C, H, W), dtype=np.float32)
    for c in range(C):
        out[c] = np.bincount(flat, weights=np.broadcast_to(
            weights[c], flat.shape), minlength=H * W).reshape(H, W)
    return out


def plane_bicubic(plane, uv) -> Tensor:
    """Catmull-Rom bicubic sample of plane [C,H,W] at uv [M,2] in [-1,1]^2.

    Returns [M,C]; differentiable w.r.t. both the plane and uv.  Border
    stencils clamp; uv outside the domain clamps too.
    """
    plane, uv = as_tensor(plane), as_tensor(uv)
    C, H, W = plane.shape
    if H < 4 or W < 4:
        raise ContractViolation(f"plane_bicubic needs H,W >= 4, got {plane.shape}")
    if not np.all(np.isfinite(uv.data)):
        raise ContractViolation("plane_bicubic: non-finite uv coordinates")
    u = np.clip(uv.data[:, 0].astype(np.float64), -1.0, 1.0)
    v = np.clip(uv.data[:, 1].astype(np.float64), -1.0, 1.0)
    fr = (u + 1.0) * 0.5 * (H - 1)
    fc = (v + 1.0) * 0.5 * (W - 1)
    ir = np.floor(fr).astype(np.int64)
    ic = np.floor(fc).astype(np.int64)
    tr = (fr - ir).astype(np.float32)
    tc = (fc - ic).astype(np.float32)
    wr, dwr = _catmull_rom(tr)        # [M,4]
    wc, dwc = _catmull_rom(tc)
    rows = np.clip(ir[:, None] + np.arange(-1, 3), 0, H - 1)   # [M,4]
    cols = np.clip(ic[:, None] + np.arange(-1, 3), 0, W - 1)

    M = u.shape[0]
    out = np.zeros((M, C), dtype=np.float32)
    for a in range(4):
        row_acc = np.zeros((C, M), dtype=np.float32)
        for b in range(4):
            row_acc += plane.data[:, rows[:, a], cols[:, b]] * wc[:, b]
        out += (row_acc * wr[:, a]).T

    def bwd(g):
        gT = g.T  # [C, M]
        gplane = np.zeros((C, H, W), dtype=np.float32)
        flatHW = H * W
        # accumulate all 16 taps into one scatter per channel
        idx = np.empty((M, 16), dtype=np.int64)
        wgt = np.empty((M, 16), dtype=np.float32)
        kk = 0
        for a in range(4):
            for b in range(4):
                idx[:, kk] = rows[:, a] * W + cols[:, b]
                wgt[:, kk] = wr[:, a] * wc[:, b]
                kk += 1
        flat = idx.ravel()
        for c in range(C):
            gplane[c] = np.bincount(
                flat, weights=(wgt * gT[c][:, None]).ravel(),
                minlength=flatHW).reshape(H, W)
        # uv gradient via the weight derivatives (zero where clamped)
        du = np.zeros(M, dtype=np.float32)
        dv = np.zeros(M, dtype=np.float32)
        for a in range(4):
            for b in range(4):
                taps = plane.data[:, rows[:, a], cols[:, b]]  # [C,M]
                coeff = (gT * taps).sum(axis=0)
                du += coeff * dwr[:, a] * wc[:, b]
                dv += coeff * wr[:, a] * dwc[:, b]
        inside_u = (np.abs(uv.data[:, 0]) <= 1.0)
        inside_v = (np.abs(uv.data[:, 1]) <= 1.0)
        guv = np.stack([du * (0.5 * (H - 1)) * inside_u,
                        dv * (0.5 * (W - 1)) * inside_v], axis=1)
        return gplane, guv.astype(np.float32)

    return _record("plane_bicubic", (plane, uv), out, bwd)


def bilinear_wrap(plane, uv01, wrap_cols: bool = True) -> Tensor:
    """Bilinear sample of plane [C,H,W] at uv01 [M,2] in [0,1]^2.

    Rows (first coordinate) are edge-clamped; columns wrap around when
    ``wrap_cols`` — the lat-long environment convention.  Column texels are
    cell-centered so a constant map samples to that constant everywhere.
    """
    plane, uv01 = as_tensor(plane), as_tensor(uv01)
    C, H, W = plane.shape
    r = np.clip(uv01.data[:, 0].astype(np.float64), 0.0, 1.0) * (H - 1)
    i0 = np.floor(r).astype(np.int64)
    i0 = np.clip(i0, 0, max(H - 2, 0))
    fr = (r - i0).astype(np.float32)
    i1 = np.minimum(i0 + 1, H - 1)

    c = uv01.data[:, 1].astype(np.float64) * W - 0.5
    j0 = np.floor(c).astype(np.int64)
    fcw = (c - j0).astype(np.float32)
    if wrap_cols:
        j0m = np.mod(j0, W)
        j1m = np.mod(j0 + 1, W)
    else:
        j0m = np.clip(j0, 0, W - 1)
        j1m = np.clip(j0 + 1, 0, W - 1)

    w00 = (1 - fr) * (1 - fcw)
    w01 = (1 - fr) * fcw
    w10 = fr * (1 - fcw)
    w11 = fr * fcw
    out = (plane.data[:, i0, j0m] * w00 + plane.data[:, i0, j1m] * w01 +
           plane.data[:, i1, j0m] * w10 + plane.data[:, i1, j1m] * w11).T

    def bwd(g):
        gT = g.T
        rows = np.stack([i0, i0, i1, i1])
        cols = np.stack([j0m, j1m, j0m, j1m])
        wts = np.stack([w00, w01, w10, w11])
        flat = (rows * W + cols).ravel()
        gplane = np.empty((C, H, W), dtype=np.float32)
        for ch in range(C):
            gplane[ch] = np.bincount(flat, weights=(wts * gT[ch]).ravel(),
                                     minlength=H * W).reshape(H, W)
        return gplane, None

    return _record("bilinear_wrap", (plane, uv01), out.astype(np.float32), bwd)


def vec_linear(F, t) -> Tensor:
    """Sample each feature row as a 1D grid over [-1,1].

    F is [M,C]; t is [M,N] positions (clamped to [-1,1]); output [M,N].
    """
    F, t = as_tensor(F), as_tensor(t)
    M, C = F.shape
    if C < 2:
        raise ContractViolation(f"vec_linear needs >= 2 entries, got {F.shape}")
    p = np.clip(t.data.astype(np.float64), -1.0, 1.0)
    x = (p + 1.0) * 0.5 * (C - 1)
    i0 = np.clip(np.floor(x).astype(np.int64), 0, C - 2)
    f = (x - i0).astype(np.float32)
    rows = np.arange(M, dtype=np.int64)[:, None]
    v0 = F.data[rows, i0]
    v1 = F.data[rows, i0 + 1]
    out = v0 * (1 - f) + v1 * f

    def bwd(g):
        flat0 = (rows * C + i0).ravel()
        flat1 = (rows * C + i0 + 1).ravel()
        gF = (np.bincount(flat0, weights=(g * (1 - f)).ravel(), minlength=M * C) +
              np.bincount(flat1, weights=(g * f).ravel(), minlength=M * C))
        gF = gF.reshape(M, C).astype(np.float32)
        inside = np.abs(t.data) <= 1.0
        gt = g * (v1 - v0) * (0.5 * (C - 1)) * inside
        return gF, gt.astype(np.float32)

    return _record("vec_linear", (F, t), out, bwd)


def window_matrix(t: np.ndarray, C: int) -> np.ndarray:
    """Constant [C, K] matrix so that F @ W == vec_linear at fixed positions t.

    Used by the grid decoder where the window positions are shared across
    thousands of plane samples; the sample then becomes a single matmul.
    """
    p = np.clip(np.asarray(t, dtype=np.float64).ravel(), -1.0, 1.0)
    x = (p + 1.0) * 0.5 * (C - 1)
    i0 = np.clip(np.floor(x).astype(np.int64), 0, C - 2)
    f = x - i0
    K = p.shape[0]
    m = np.zeros((C, K), dtype=np.float32)
    cols = np.arange(K)
    np.add.at(m, (i0, cols), 1.0 - f)
    np.add.at(m, (i0 + 1, cols), f)
    return m


def trilinear3(grid, pts) -> Tensor:
    """Trilinear sample of grid [X,Y,Z] at pts [M,3] in [-1,1]^3 (clamped)."""
    grid, pts = as_tensor(grid), as_tensor(pts)
    X, Y, Z = grid.shape
    if min(X, Y, Z) < 2:
        raise ContractViolation(f"trilinear3 needs extents >= 2, got {grid.shape}")
    q = np.clip(pts.data.astype(np.float64), -1.0, 1.0)
    ex = (q[:, 0] + 1.0) * 0.5 * (X - 1)
    ey = (q[:, 1] + 1.0) * 0.5 * (Y - 1)
    ez = (q[:, 2] + 1.0) * 0.5 * (Z - 1)
    ix = np.clip(np.floor(ex).astype(np.int64), 0, X - 2)
    iy = np.clip(np.floor(ey).astype(np.int64), 0, Y - 2)
    iz = np.clip(np.floor(ez).astype(np.int64), 0, Z - 2)
    fx = (ex - ix).astype(np.float32)
    fy = (ey - iy).astype(np.float32)
    fz = (ez - iz).astype(np.float32)

    g = grid.data
    c000 = g[ix, iy, iz]
    c001 = g[ix, iy, iz + 1]
    c010 = g[ix, iy + 1, iz]
    c011 = g[ix, iy + 1, iz + 1]
    c100 = g[ix + 1, iy, iz]
    c101 = g[ix + 1, iy, iz + 1]
    c110 = g[ix + 1, iy + 1, iz]
    c111 = g[ix + 1, iy + 1, iz + 1]

    c00 = c000 * (1 - fz) + c001 * fz
    c01 = c010 * (1 - fz) + c011 * fz
    c10 = c100 * (1 - fz) + c101 * fz
    c11 = c110 * (1 - fz) + c111 * fz
    c0 = c00 * (1 - fy) + c01 * fy
    c1 = c10 * (1 - fy) + c11 * fy
    out = c0 * (1 - fx) + c1 * fx

    def bwd(gout):
        wx = np.stack([1 - fx, fx])
        wy = np.stack([1 - fy, fy])
        wz = np.stack([1 - fz, fz])
        size = X * Y * Z
        acc = np.zeros(size, dtype=np.float64)
        for a in range(2):
            for b in range(2):
                for c in range(2):
                    flat = ((ix + a) * Y + (iy + b)) * Z + (iz + c)
                    w = wx[a] * wy[b] * wz[c] * gout
                    acc += np.bincount(flat, weights=w, minlength=size)
        ggrid = acc.reshape(X, Y, Z).astype(np.float32)
        # point gradients: zero where the coordinate clamped
        dx = (c1 - c0) * (0.5 * (X - 1)) * (np.abs(pts.data[:, 0]) <= 1.0)
        dy0 = (c01 - c00) * (1 - fx) + (c11 - c10) * fx
        dy = dy0 * (0.5 * (Y - 1)) * (np.abs(pts.data[:, 1]) <= 1.0)
        dz0 = ((c001 - c000) * (1 - fy) + (c011 - c010) * fy) * (1 - fx) + \
              ((c101 - c100) * (1 - fy) + (c111 - c110) * fy) * fx
        dz = dz0 * (0.5 * (Z - 1)) * (np.abs(pts.data[:, 2]) <= 1.0)
        gpts = np.stack([dx * gout, dy * gout, dz * gout], axis=1)
        return ggrid, gpts.astype(np.float32)

    return _record("trilinear3", (grid, pts), out.astype(np.float32), bwd)
