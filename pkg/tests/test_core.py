"""Grid, sampling, quadrature, and translation-weight layer."""

import math

import numpy as np
import pytest
import scipy.integrate
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from loopgamma import (DomainError, MeasureConfig, Path, SmoothLoop,
                       UsageError, bridge_mass, check_translation_exact,
                       cm_weight, heat_kernel, loop_from_json, loop_to_json,
                       make_grid, path_from_json, path_log_density,
                       path_to_json, quad, sample_bridge, sample_wiener,
                       shifted_path, stieltjes, zero_loop)

TWO_PI = 2.0 * math.pi


class TestGrid:
    def test_nodes_m4(self):
        g = make_grid(4)
        assert np.allclose(g.nodes, [0, math.pi / 2, math.pi,
                                     3 * math.pi / 2, TWO_PI], atol=1e-15)
        assert g.nodes[0] == 0.0
        assert g.nodes[-1] == TWO_PI

    def test_du(self):
        assert make_grid(2).du == pytest.approx(math.pi, rel=1e-15)
        g = make_grid(7)
        assert g.du * g.m == pytest.approx(TWO_PI, rel=1e-15)
        assert np.all(np.diff(g.nodes) > 0)

    def test_too_small(self):
        with pytest.raises(UsageError):
            make_grid(1)
        with pytest.raises(UsageError):
            make_grid(0)

    def test_non_integer(self):
        with pytest.raises(UsageError):
            make_grid(2.5)


class TestHeatKernel:
    def test_closed_forms(self):
        assert heat_kernel(0.0, TWO_PI, 1.0) == pytest.approx(1.0 / TWO_PI, rel=1e-14)
        assert heat_kernel(0.0, 1.0, 1.0) == pytest.approx(1.0 / math.sqrt(TWO_PI), rel=1e-14)

    def test_normalization(self):
        for s, t in [(2.0, 1.0), (TWO_PI, 0.2), (0.5, 3.0)]:
            total, _ = scipy.integrate.quad(lambda x: heat_kernel(x, s, t),
                                            -np.inf, np.inf)
            assert abs(total - 1.0) < 1e-10

    def test_matches_normal_density(self):
        # independent oracle: scipy's normal pdf with variance t*s
        for x in (-1.3, 0.0, 0.7, 2.2):
            ours = heat_kernel(x, 1.5, 0.7)
            ref = scipy.stats.norm.pdf(x, scale=math.sqrt(1.5 * 0.7))
            assert ours == pytest.approx(ref, rel=1e-13)

    def test_rejects_bad_scale(self):
        with pytest.raises(UsageError):
            heat_kernel(0.0, -1.0, 1.0)
        with pytest.raises(UsageError):
            heat_kernel(0.0, 1.0, 0.0)


class TestBridgeMass:
    def test_closed_forms(self):
        cfg1 = MeasureConfig(t=1.0)
        assert bridge_mass(0.0, cfg1) == pytest.approx(1.0 / TWO_PI, rel=1e-14)
        assert bridge_mass(1.0, cfg1) == pytest.approx(
            math.exp(-1.0 / (4.0 * math.pi)) / TWO_PI, rel=1e-14)

    def test_is_heat_kernel_slice(self, cfg):
        for X in (-2.0, 0.3, 5.0):
            assert bridge_mass(X, cfg) == heat_kernel(X, TWO_PI, cfg.t)

    def test_normalization(self, cfg):
        total, _ = scipy.integrate.quad(lambda X: bridge_mass(X, cfg),
                                        -np.inf, np.inf)
        assert abs(total - 1.0) < 1e-10


class TestQuad:
    def test_constant(self, grid):
        assert quad(np.ones(grid.m + 1), grid) == pytest.approx(TWO_PI, rel=1e-15)

    def test_odd_symmetry(self, grid):
        assert abs(quad(np.sin(grid.nodes), grid)) < 1e-12

    def test_cos_squared(self, grid):
        assert quad(np.cos(grid.nodes) ** 2, grid) == pytest.approx(math.pi, abs=1e-6)

    def test_affine_exact(self, grid):
        u = grid.nodes
        got = quad(3.0 * u - 1.0, grid)
        assert got == pytest.approx(3.0 * TWO_PI ** 2 / 2.0 - TWO_PI, rel=1e-14)

    def test_batched(self, grid):
        batch = np.stack([np.ones(grid.m + 1), np.sin(grid.nodes)])
        out = quad(batch, grid)
        assert out.shape == (2,)
        assert out[0] == pytest.approx(TWO_PI, rel=1e-15)

    def test_shape_mismatch(self, grid):
        with pytest.raises(UsageError):
            quad(np.ones(grid.m), grid)


class TestStieltjes:
    def test_unit_derivative_telescopes(self, grid, cfg):
        x = sample_wiener(grid, cfg, seed=4, index=0)
        got = stieltjes(np.ones(grid.m + 1), x)
        assert got == pytest.approx(float(x.values[-1]), rel=1e-12)

    def test_zero_derivative(self, grid, cfg):
        x = sample_wiener(grid, cfg, seed=4, index=1)
        assert stieltjes(np.zeros(grid.m + 1), x) == 0.0

    def test_left_sum_m4(self):
        # y'(u) = u against x(u) = u: sum_{k=1..4} u_{k-1} * du = 3 pi^2 / 2
        g = make_grid(4)
        x = Path(grid=g, values=g.nodes.copy(), kind="free")
        got = stieltjes(g.nodes, x)
        assert got == pytest.approx(3.0 * math.pi ** 2 / 2.0, rel=1e-14)

    def test_grid_mismatch(self, grid, cfg):
        x = sample_wiener(grid, cfg, seed=4, index=0)
        with pytest.raises(UsageError):
            stieltjes(np.ones(grid.m), x)


class TestSampling:
    def test_deterministic(self, grid, cfg):
        a = sample_wiener(grid, cfg, seed=7, index=3)
        b = sample_wiener(grid, cfg, seed=7, index=3)
        assert np.array_equal(a.values, b.values)
        c = sample_wiener(grid, cfg, seed=7, index=4)
        assert not np.array_equal(a.values, c.values)
        d = sample_wiener(grid, cfg, seed=8, index=3)
        assert not np.array_equal(a.values, d.values)

    def test_starts_at_zero(self, grid, cfg):
        assert sample_wiener(grid, cfg, seed=1, index=0).values[0] == 0.0

    def test_bridge_endpoint_exact(self, grid, cfg):
        for X in (-1.5, 0.0, 0.73):
            p = sample_bridge(grid, cfg, X, seed=2, index=5)
            assert float(p.values[-1]) == X
            assert p.kind == "bridge"

    def test_increment_law(self, grid, cfg):
        # mean/variance of each increment within 4 SE at N = 1e5
        n = 100_000
        vals = np.stack([sample_wiener(grid, cfg, seed=10, index=i).values
                         for i in range(0, n, n // 256)])
        # statistically cheaper: use a contiguous block of sampled paths
        from loopgamma.core import free_values_chunk
        rows = []
        for c in range(n // 1024):
            rows.append(free_values_chunk(grid, cfg, 10, c, 1024))
        vals = np.concatenate(rows)
        inc = np.diff(vals, axis=1)
        var = cfg.t * grid.du
        se_mean = math.sqrt(var / n)
        se_var = var * math.sqrt(2.0 / n)
        assert np.max(np.abs(inc.mean(axis=0))) < 4.0 * se_mean
        assert np.max(np.abs(inc.var(axis=0, ddof=1) - var)) < 4.0 * se_var

    def test_free_covariance(self, grid):
        cfg1 = MeasureConfig(t=1.0)
        n = 60_000
        from loopgamma.core import free_values_chunk
        vals = np.concatenate([free_values_chunk(grid, cfg1, 3, c, 1024)
                               for c in range(n // 1024)])
        n = vals.shape[0]
        endpoint_var = vals[:, -1].var(ddof=1)
        se = TWO_PI * math.sqrt(2.0 / n)
        assert abs(endpoint_var - TWO_PI) < 3.0 * se
        i, j = grid.m // 4, grid.m // 2  # u = pi/2 and pi
        cov = np.cov(vals[:, i], vals[:, j])[0, 1]
        want = min(grid.nodes[i], grid.nodes[j])
        assert abs(cov - want) < 4.0 * want * math.sqrt(2.0 / n) + 0.05

    def test_bridge_covariance(self, grid):
        cfg1 = MeasureConfig(t=1.0)
        n = 60_000
        from loopgamma.core import bridge_values_chunk
        vals = np.concatenate([bridge_values_chunk(grid, cfg1, 0.0, 5, c, 1024)
                               for c in range(n // 1024)])
        n = vals.shape[0]
        mid = grid.m // 2
        var_mid = vals[:, mid].var(ddof=1)
        want = math.pi / 2.0  # t(min(pi,pi) - pi^2/2pi) = pi/2
        assert abs(var_mid - want) < 4.0 * want * math.sqrt(2.0 / n)

    def test_path_validation(self, grid):
        with pytest.raises(UsageError):
            Path(grid=grid, values=np.ones(grid.m + 1), kind="free")
        with pytest.raises(UsageError):
            Path(grid=grid, values=np.zeros(grid.m), kind="free")
        v = np.zeros(grid.m + 1)
        with pytest.raises(UsageError):
            Path(grid=grid, values=v, kind="circle")


class TestTranslationWeight:
    def test_zero_shift(self, grid, cfg):
        x = sample_wiener(grid, cfg, seed=11, index=0)
        assert cm_weight(zero_loop(grid), x, cfg) == 1.0

    def test_exact_identity_sweep(self, grid, cfg, cm_loop):
        rng = np.random.default_rng(21)
        worst = 0.0
        for i in range(100):
            x = sample_wiener(grid, cfg, seed=30, index=i)
            y = cm_loop(grid, rng)
            worst = max(worst, abs(check_translation_exact(x, y, cfg)))
        assert worst <= 1e-12

    def test_zero_shift_residual_zero(self, grid, cfg):
        x = sample_wiener(grid, cfg, seed=12, index=0)
        assert check_translation_exact(x, zero_loop(grid), cfg) == 0.0

    def test_forward_backward_consistency(self, grid, cfg, trig):
        # w(y, x) * w(-y, x+y) = 1 exactly (cocycle of the shift), and on
        # the unshifted path the weights combine to -(1/t) int y'^2 du
        y = trig(grid, sin=[0.7, -0.2], ramp=0.5)
        x = sample_wiener(grid, cfg, seed=13, index=2)
        ym = SmoothLoop(grid=grid, values=-y.values, d1=-y.d1)
        fwd = math.log(cm_weight(y, x, cfg))
        assert fwd + math.log(cm_weight(ym, shifted_path(x, y), cfg)) == \
            pytest.approx(0.0, abs=1e-12)
        slopes = np.diff(y.values) / grid.du
        want = -float(np.sum(slopes ** 2)) * grid.du / cfg.t
        assert fwd + math.log(cm_weight(ym, x, cfg)) == \
            pytest.approx(want, abs=1e-12)

    def test_weight_mean_one(self, grid, cfg, trig):
        from loopgamma import Functional, expect
        y = trig(grid, sin=[0.4], ramp=0.3)
        yv = y.values

        def fn(values, x0):
            from loopgamma import cm_log_weight_values
            return np.exp(cm_log_weight_values(yv, values, grid, cfg)).astype(complex)

        est = expect(Functional(fn=fn), "free", grid, cfg, 20_000, seed=17)
        assert abs(est.mean - 1.0) <= 3.0 * est.stderr

    def test_requires_based_shift(self, grid, cfg, trig):
        y = trig(grid, const=1.0, sin=[0.5])
        x = sample_wiener(grid, cfg, seed=14, index=0)
        with pytest.raises(UsageError):
            cm_weight(y, x, cfg)


class TestDensity:
    def test_against_scipy(self, cfg):
        # independent oracle: sum of normal increment log-pdfs
        g = make_grid(8)
        x = sample_wiener(g, cfg, seed=19, index=0)
        inc = np.diff(x.values)
        ref = scipy.stats.norm.logpdf(inc, scale=math.sqrt(cfg.t * g.du)).sum()
        assert path_log_density(x, cfg) == pytest.approx(float(ref), rel=1e-12)

    def test_shifted_path_kinds(self, grid, cfg, trig):
        y = trig(grid, sin=[0.3], ramp=1.0)
        b = sample_bridge(grid, cfg, 0.5, seed=20, index=0)
        sb = shifted_path(b, y)
        assert sb.kind == "bridge"
        assert sb.endpoint == pytest.approx(0.5 + y.values[-1], rel=1e-12)


class TestSerialization:
    def test_path_roundtrip(self, grid, cfg):
        # wire format is {grid_m, t, values}; kind is not carried
        p = sample_bridge(grid, cfg, -0.7, seed=23, index=1)
        q, cfg2 = path_from_json(path_to_json(p, cfg))
        assert np.array_equal(p.values, q.values)
        assert q.kind == "free" and cfg2.t == cfg.t

    def test_loop_roundtrip(self, grid, trig):
        y = trig(grid, cos=[0.2], sin=[1.0, 0.0, 0.3])
        z = loop_from_json(loop_to_json(y))
        assert np.array_equal(y.values, z.values)
        assert np.array_equal(y.d1, z.d1)


class TestMeasureConfig:
    def test_rejects_bad_t(self):
        with pytest.raises(DomainError):
            MeasureConfig(t=0.0)
        with pytest.raises(DomainError):
            MeasureConfig(t=-1.0)
        with pytest.raises(DomainError):
            MeasureConfig(t=float("nan"))


@settings(max_examples=30, deadline=None)
@given(coeffs=st.lists(st.floats(-2.0, 2.0), min_size=1, max_size=4),
       ramp=st.floats(-3.0, 3.0), idx=st.integers(0, 50))
def test_cm_identity_property(coeffs, ramp, idx):
    """The discrete log-density translation identity holds for any shift."""
    grid = make_grid(32)
    cfg = MeasureConfig(t=0.5)
    u = grid.nodes
    vals = sum(c * np.sin((j + 1) * u) for j, c in enumerate(coeffs))
    vals = vals + ramp * u / TWO_PI
    d1 = sum(c * (j + 1) * np.cos((j + 1) * u) for j, c in enumerate(coeffs))
    d1 = d1 + ramp / TWO_PI
    y = SmoothLoop(grid=grid, values=vals, d1=d1)
    x = sample_wiener(grid, cfg, seed=77, index=idx)
    assert abs(check_translation_exact(x, y, cfg)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-5.0, 5.0), b=st.floats(-5.0, 5.0))
def test_quad_linearity_property(a, b):
    grid = make_grid(16)
    rng = np.random.default_rng(3)
    f = rng.normal(size=grid.m + 1)
    g = rng.normal(size=grid.m + 1)
    lhs = quad(a * f + b * g, grid)
    rhs = a * quad(f, grid) + b * quad(g, grid)
    assert lhs == pytest.approx(rhs, abs=1e-12)
