import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nimbus import ndtape as nt
from oracles import bicubic_reference, finite_diff, rel_err, trilinear_reference


def tape_grad(build_loss, *params):
    """Run build_loss under a fresh tape; returns grads of params."""
    tensors = [nt.Tensor(p, requires_grad=True) for p in params]
    with nt.Tape() as tape:
        loss = build_loss(*tensors)
        tape.backward(loss)
    return [t.grad for t in tensors]


def check_against_fd(build_loss, *params, rtol=1e-3, h=1e-2):
    """Compare tape gradients to central differences.

    Mixed tolerance: relative 1e-3 for probes above the float32 noise
    floor of the difference quotient (eps32 * |loss| / 2h), absolute slack
    at the floor itself.
    """
    grads = tape_grad(build_loss, *params)
    loss0 = abs(float(build_loss(*[nt.Tensor(q) for q in params]).item()))
    atol = 20.0 * np.finfo(np.float32).eps * (1.0 + loss0) / (2.0 * h)
    for p, g in zip(params, grads):
        def f(x, _p=p):
            saved = _p.copy()
            _p[...] = x
            out = float(build_loss(*[nt.Tensor(q) for q in params]).item())
            _p[...] = saved
            return out
        fd = finite_diff(f, p, h=h)
        err = np.abs(g.astype(np.float64) - fd)
        bound = atol + rtol * np.maximum(np.abs(g), np.abs(fd))
        assert (err <= bound).all(), \
            f"gradient mismatch: max excess {(err - bound).max():.3g}"


class TestElementwise:
    def test_matmul_identity(self):
        a = nt.Tensor([[1.0, 2.0], [3.0, 4.0]])
        out = nt.matmul(a, nt.Tensor(np.eye(2)))
        assert np.allclose(out.data, a.data)

    def test_softplus_zero(self):
        assert abs(nt.softplus(nt.Tensor(0.0)).item() - np.log(2.0)) < 1e-6

    def test_conv_impulse_identity(self):
        img = np.zeros((1, 1, 7, 7), dtype=np.float32)
        img[0, 0, 3, 3] = 1.0
        k = np.arange(9, dtype=np.float32).reshape(1, 1, 3, 3)
        out = nt.conv2d(nt.Tensor(img), nt.Tensor(k))
        assert np.allclose(out.data[0, 0, 2:5, 2:5], k[0, 0])

    def test_shape_mismatch_raises(self):
        with pytest.raises(nt.ContractViolation) as exc:
            nt.matmul(nt.Tensor(np.ones((2, 3))), nt.Tensor(np.ones((2, 3))))
        assert "(2, 3)" in str(exc.value)

    def test_grad_sum_square(self):
        (g,) = tape_grad(lambda x: nt.sum_(nt.mul(x, x)),
                         np.array([1.0, 2.0, 3.0], dtype=np.float32))
        assert np.allclose(g, [2.0, 4.0, 6.0])

    def test_grad_independent_param_is_none(self):
        x = nt.Tensor([1.0, 2.0], requires_grad=True)
        p = nt.Tensor([5.0], requires_grad=True)
        with nt.Tape() as tape:
            loss = nt.sum_(nt.mul(x, x))
            _ = nt.mul(p, 2.0)  # recorded but not on the loss path
            tape.backward(loss)
        assert p.grad is None

    def test_backward_nonscalar_raises(self):
        x = nt.Tensor([1.0, 2.0], requires_grad=True)
        with nt.Tape() as tape:
            y = nt.mul(x, x)
            with pytest.raises(nt.ContractViolation):
                tape.backward(y)


class TestFiniteDifferences:
    def setup_method(self):
        self.rng = np.random.default_rng(11)

    def test_matmul_chain(self):
        a = self.rng.normal(size=(3, 4)).astype(np.float32)
        b = self.rng.normal(size=(4, 2)).astype(np.float32)
        c = self.rng.normal(size=(2, 3)).astype(np.float32)
        check_against_fd(
            lambda a, b, c: nt.sum_(nt.mul(nt.matmul(nt.matmul(a, b), c),
                                           nt.matmul(nt.matmul(a, b), c))),
            a, b, c)

    def test_nonlinearities(self):
        x = self.rng.normal(size=(8,)).astype(np.float32)
        check_against_fd(lambda x: nt.sum_(nt.gelu(x)), x.copy())
        check_against_fd(lambda x: nt.sum_(nt.softplus(x)), x.copy())
        check_against_fd(lambda x: nt.sum_(nt.exp(nt.mul(x, 0.5))), x.copy())

    def test_conv_avgpool_upsample(self):
        x = self.rng.normal(size=(2, 3, 8, 8)).astype(np.float32)
        w = (self.rng.normal(size=(4, 3, 3, 3)) * 0.3).astype(np.float32)
        b = self.rng.normal(size=(4,)).astype(np.float32)

        def loss(x, w, b):
            y = nt.conv2d(x, w, b)
            y = nt.avg_pool2(y)
            y = nt.upsample2_bilinear(y)
            return nt.sum_(nt.mul(y, y))

        check_against_fd(loss, x, w, b)

    def test_bicubic_grad(self):
        plane = self.rng.normal(size=(2, 6, 7)).astype(np.float32)
        uv = (self.rng.uniform(-0.9, 0.9, size=(5, 2))).astype(np.float32)
        check_against_fd(
            lambda p, q: nt.mean_(nt.mul(nt.plane_bicubic(p, q),
                                         nt.plane_bicubic(p, q))),
            plane, uv, h=1e-3)

    def test_trilinear_grad(self):
        grid = self.rng.normal(size=(4, 5, 4)).astype(np.float32)
        # keep probes off cell boundaries: trilinear kinks break central FD
        pts = (self.rng.uniform(-0.8, 0.8, size=(9, 3))).astype(np.float32)
        check_against_fd(
            lambda g, p: nt.mean_(nt.mul(nt.trilinear3(g, p), 2.0)),
            grid, pts, h=1e-3)

    def test_vec_linear_grad(self):
        F = self.rng.normal(size=(6, 5)).astype(np.float32)
        t = self.rng.uniform(-0.9, 0.9, size=(6, 3)).astype(np.float32)
        check_against_fd(lambda F, t: nt.mean_(nt.mul(nt.vec_linear(F, t),
                                                      nt.vec_linear(F, t))),
                         F, t, h=1e-3)

    def test_backward_linearity(self):
        # grad of (L1 + L2) equals grad L1 + grad L2 on a random graph
        x = self.rng.normal(size=(5,)).astype(np.float32)

        def l1(t):
            return nt.sum_(nt.mul(t, t))

        def l2(t):
            return nt.sum_(nt.gelu(t))

        (g_both,) = tape_grad(lambda t: nt.add(l1(t), l2(t)), x.copy())
        (g1,) = tape_grad(l1, x.copy())
        (g2,) = tape_grad(l2, x.copy())
        assert np.allclose(g_both, g1 + g2, atol=1e-5)


class TestInterpolators:
    def test_bicubic_constant_and_node(self):
        plane = np.full((3, 5, 5), 2.5, dtype=np.float32)
        uv = np.array([[0.3, -0.7], [1.0, 1.0], [-1.0, 0.2]], dtype=np.float32)
        out = nt.plane_bicubic(nt.Tensor(plane), nt.Tensor(uv))
        assert np.allclose(out.data, 2.5, atol=1e-5)

        rng = np.random.default_rng(3)
        plane = rng.normal(size=(1, 6, 6)).astype(np.float32)
        # texel centers: uv = -1 + 2*i/(n-1)
        uv = np.array([[-1 + 2 * 2 / 5, -1 + 2 * 4 / 5]], dtype=np.float32)
        out = nt.plane_bicubic(nt.Tensor(plane), nt.Tensor(uv))
        assert abs(out.data[0, 0] - plane[0, 2, 4]) < 1e-5

    def test_bicubic_matches_reference(self):
        rng = np.random.default_rng(4)
        plane = rng.normal(size=(2, 8, 9)).astype(np.float32)
        for _ in range(20):
            u, v = rng.uniform(-1.1, 1.1, size=2)
            ref = bicubic_reference(plane, u, v)
            out = nt.plane_bicubic(nt.Tensor(plane),
                                   nt.Tensor([[u, v]])).data[0]
            assert np.allclose(out, ref, atol=1e-4)

    def test_bicubic_nonfinite_uv_raises(self):
        with pytest.raises(nt.ContractViolation):
            nt.plane_bicubic(nt.Tensor(np.zeros((1, 5, 5))),
                             nt.Tensor([[np.nan, 0.0]]))

    def test_vec_linear_endpoints_and_nodes(self):
        F = np.array([[0.0, 1.0, 0.0]], dtype=np.float32)
        t = np.array([[-1.0, 1.0, 0.0, -0.5]], dtype=np.float32)
        out = nt.vec_linear(nt.Tensor(F), nt.Tensor(t)).data[0]
        assert np.allclose(out, [0.0, 0.0, 1.0, 0.5], atol=1e-6)
        # clamping absorbs out-of-range
        t2 = np.array([[-3.0, 3.0]], dtype=np.float32)
        out2 = nt.vec_linear(nt.Tensor(F), nt.Tensor(t2)).data[0]
        assert np.allclose(out2, [0.0, 0.0], atol=1e-6)

    def test_trilinear_constant_vertex_reference(self):
        grid = np.full((3, 4, 5), 0.7, dtype=np.float32)
        pts = np.array([[0.1, -0.4, 0.9]], dtype=np.float32)
        assert abs(nt.trilinear3(nt.Tensor(grid), nt.Tensor(pts)).item() - 0.7) < 1e-6

        rng = np.random.default_rng(5)
        grid = rng.normal(size=(4, 4, 4)).astype(np.float32)
        # vertex (2,1,3) in normalized coords
        p = np.array([[-1 + 2 * 2 / 3, -1 + 2 * 1 / 3, 1.0]], dtype=np.float32)
        out = nt.trilinear3(nt.Tensor(grid), nt.Tensor(p)).item()
        assert abs(out - grid[2, 1, 3]) < 1e-5

        for _ in range(20):
            p = rng.uniform(-1.2, 1.2, size=3)
            ref = trilinear_reference(grid, p)
            out = nt.trilinear3(nt.Tensor(grid),
                                nt.Tensor(p[None].astype(np.float32))).item()
            assert abs(out - ref) < 1e-5

    def test_window_matrix_matches_vec_linear(self):
        rng = np.random.default_rng(6)
        F = rng.normal(size=(7, 6)).astype(np.float32)
        t = np.linspace(-1.2, 1.2, 5).astype(np.float32)
        m = nt.window_matrix(t, 6)
        via_mat = F @ m
        via_op = nt.vec_linear(nt.Tensor(F),
                               nt.Tensor(np.tile(t, (7, 1)))).data
        assert np.allclose(via_mat, via_op, atol=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(2, 6),
       st.floats(-1.0, 1.0, allow_nan=False))
def test_interpolators_reproduce_constants(h, w, u):
    plane = np.full((1, max(h, 4), max(w, 4)), 3.25, dtype=np.float32)
    out = nt.plane_bicubic(nt.Tensor(plane), nt.Tensor([[u, -u]]))
    assert abs(out.data[0, 0] - 3.25) < 1e-5
    vec = np.full((1, h), -0.5, dtype=np.float32)
    out2 = nt.vec_linear(nt.Tensor(vec), nt.Tensor([[u]]))
    assert abs(out2.data[0, 0] + 0.5) < 1e-6


class TestSerialize:
    def test_tensor_roundtrip(self, tmp_path):
        rng = np.random.default_rng(7)
        arr = rng.normal(size=(3, 4, 5)).astype(np.float32)
        p = tmp_path / "t.nt"
        nt.save_tensor(p, nt.Tensor(arr))
        back = nt.load_tensor(p)
        assert back.shape == (3, 4, 5)
        assert np.array_equal(back, arr)
        raw = p.read_bytes()
        assert raw[:4] == b"NT01"
        assert int.from_bytes(raw[4:8], "little") == 3

    def test_container_roundtrip_canonical(self, tmp_path):
        rng = np.random.default_rng(8)
        d = {"b": rng.normal(size=(2, 2)).astype(np.float32),
             "a": rng.normal(size=(5,)).astype(np.float32)}
        p1, p2 = tmp_path / "c1.ntc", tmp_path / "c2.ntc"
        nt.save_container(p1, d)
        nt.save_container(p2, dict(reversed(list(d.items()))))
        assert p1.read_bytes() == p2.read_bytes()
        back = nt.load_container(p1)
        assert set(back) == {"a", "b"}
        assert np.array_equal(back["b"], d["b"])
