"""Group algebra, the represented operators, and their Lie brackets."""

import numpy as np
import pytest

from loopgamma import (
    DomainError,
    Functional,
    GroupElement,
    RepContext,
    SmoothLoop,
    UsageError,
    apply_rep,
    check_commutators,
    check_homomorphism,
    check_intertwiner,
    check_opposite_charge,
    check_unitarity,
    cocycle,
    element_from_json,
    element_to_json,
    identity_element,
    intertwiner,
    inverse,
    lie_D,
    lie_T,
    multiply,
    quad,
    sample_wiener,
    zero_loop,
)
from loopgamma.repops import _default_probe


@pytest.fixture(scope="module")
def ctx(grid, cfg):
    return RepContext(grid=grid, cfg=cfg, lam=0.5j, k=1.0)


@pytest.fixture(scope="module")
def paths(grid, cfg):
    return [sample_wiener(grid, cfg, seed=40, index=i) for i in range(3)]


def random_element(grid, rng, with_b=True):
    n = 3
    vals = np.zeros(grid.m + 1)
    d1 = np.zeros(grid.m + 1)
    d2 = np.zeros(grid.m + 1)
    u = grid.nodes
    for j in range(1, n + 1):
        a, c = rng.uniform(-0.5, 0.5, 2)
        vals += a * np.sin(j * u) + c * np.cos(j * u)
        d1 += a * j * np.cos(j * u) - c * j * np.sin(j * u)
        d2 += -a * j * j * np.sin(j * u) - c * j * j * np.cos(j * u)
    alpha = SmoothLoop(grid=grid, values=vals, d1=d1, d2=d2)
    if with_b:
        bv = rng.uniform(-0.5, 0.5) * (1.0 - np.cos(u))
        b = SmoothLoop.from_samples(grid, bv)
    else:
        b = zero_loop(grid)
    return GroupElement(alpha=alpha, b=b, s=float(rng.uniform(-1, 1)))


def max_element_diff(g1: GroupElement, g2: GroupElement) -> float:
    return max(float(np.max(np.abs(g1.alpha.values - g2.alpha.values))),
               float(np.max(np.abs(g1.b.values - g2.b.values))),
               abs(g1.s - g2.s))


class TestGroupAlgebra:
    def test_identity_neutral(self, grid):
        rng = np.random.default_rng(0)
        g = random_element(grid, rng)
        e = identity_element(grid)
        k = 1.3
        assert max_element_diff(multiply(g, e, k), g) <= 1e-14
        assert max_element_diff(multiply(e, g, k), g) <= 1e-14

    def test_associativity(self, grid):
        rng = np.random.default_rng(1)
        k = 0.7
        for _ in range(10):
            g1, g2, g3 = (random_element(grid, rng) for _ in range(3))
            left = multiply(multiply(g1, g2, k), g3, k)
            right = multiply(g1, multiply(g2, g3, k), k)
            assert max_element_diff(left, right) <= 1e-12

    def test_inverse_roundtrip(self, grid):
        rng = np.random.default_rng(2)
        e = identity_element(grid)
        for k in (0.0, 1.0, 2.5):
            g = random_element(grid, rng)
            assert max_element_diff(multiply(g, inverse(g, k), k), e) <= 1e-12
            assert max_element_diff(multiply(inverse(g, k), g, k), e) <= 1e-12

    def test_cocycle_sin_cos(self, grid, trig):
        g1 = GroupElement(alpha=trig(grid, sin=[1.0]), b=zero_loop(grid), s=0.0)
        g2 = GroupElement(alpha=trig(grid, cos=[1.0]), b=zero_loop(grid), s=0.0)
        # int sin * (cos)' du = -int sin^2 du = -pi, exact for the trapezoid
        for k in (1.0, 2.5):
            assert cocycle(g1, g2, k) == pytest.approx(-k * np.pi, abs=1e-10)

    def test_cocycle_antisymmetric_part(self, grid, trig):
        # c(g1,g2) + c(g2,g1) = k * [alpha1 alpha2] around the loop = 0
        g1 = GroupElement(alpha=trig(grid, sin=[0.8, 0.1]), b=zero_loop(grid), s=0.0)
        g2 = GroupElement(alpha=trig(grid, cos=[0.5], sin=[0.0, 0.3]),
                          b=zero_loop(grid), s=0.0)
        total = cocycle(g1, g2, 1.0) + cocycle(g2, g1, 1.0)
        assert abs(total) <= 1e-10

    def test_alpha_must_close(self, grid, trig):
        with pytest.raises(UsageError):
            GroupElement(alpha=trig(grid, ramp=1.0), b=zero_loop(grid), s=0.0)

    def test_json_roundtrip(self, grid):
        rng = np.random.default_rng(3)
        g = random_element(grid, rng)
        back, k = element_from_json(element_to_json(g, k=1.5), grid)
        assert k == 1.5
        assert np.array_equal(back.alpha.values, g.alpha.values)
        assert np.array_equal(back.alpha.d1, g.alpha.d1)
        assert np.array_equal(back.b.values, g.b.values)
        assert back.s == g.s


class TestRepContext:
    def test_scalar_lambda_broadcast(self, grid, cfg):
        ctx = RepContext(grid=grid, cfg=cfg, lam=0.3j)
        assert ctx.lam.shape == (grid.m + 1,)
        assert np.all(ctx.lam == 0.3j)

    def test_unitary_needs_imaginary(self, grid, cfg):
        with pytest.raises(DomainError):
            RepContext(grid=grid, cfg=cfg, lam=-1.0)
        # the same profile is fine in semigroup mode
        RepContext(grid=grid, cfg=cfg, lam=-1.0, mode="semigroup")

    def test_validation(self, grid, cfg):
        with pytest.raises(UsageError):
            RepContext(grid=grid, cfg=cfg, lam=np.ones(3) * 1j)
        with pytest.raises(UsageError):
            RepContext(grid=grid, cfg=cfg, lam=np.nan)
        with pytest.raises(UsageError):
            RepContext(grid=grid, cfg=cfg, lam=1j, mode="projective")

    def test_semigroup_guard(self, grid, cfg, trig):
        ctx = RepContext(grid=grid, cfg=cfg, lam=-1.0, mode="semigroup")
        good = GroupElement(alpha=zero_loop(grid),
                            b=trig(grid, const=1.0, cos=[-1.0]), s=0.0)
        apply_rep(good, ctx, _default_probe(grid))  # b >= 0, passes the guard
        bad = GroupElement(alpha=zero_loop(grid),
                           b=trig(grid, const=-1.0, cos=[1.0]), s=0.0)
        with pytest.raises(DomainError, match="node"):
            apply_rep(bad, ctx, _default_probe(grid))


class TestApplyRep:
    def test_identity_element_acts_trivially(self, grid, ctx, paths):
        f = _default_probe(grid)
        rf = apply_rep(identity_element(grid), ctx, f)
        vals = np.stack([p.values for p in paths])
        for x0 in (0.0, 0.6):
            assert np.array_equal(rf.fn(vals, x0), f.fn(vals, x0))

    def test_constant_alpha_shifts_x0(self, grid, ctx, paths, trig):
        c = 0.8
        g = GroupElement(alpha=trig(grid, const=c), b=zero_loop(grid), s=0.0)
        f = _default_probe(grid)
        rf = apply_rep(g, ctx, f)
        vals = np.stack([p.values for p in paths])
        assert np.array_equal(rf.fn(vals, 0.3), f.fn(vals, 0.3 + c))

    def test_b_only_preserves_modulus(self, grid, ctx, paths, trig):
        g = GroupElement(alpha=zero_loop(grid),
                         b=trig(grid, const=1.0, cos=[-1.0]), s=0.7)
        f = _default_probe(grid)
        rf = apply_rep(g, ctx, f)
        vals = np.stack([p.values for p in paths])
        diff = np.abs(rf.fn(vals, 0.2)) - np.abs(f.fn(vals, 0.2))
        assert np.max(np.abs(diff)) <= 1e-14

    def test_matches_direct_formula(self, grid, cfg, ctx, paths, trig):
        # recompute the operator from its pieces: slope half-weight,
        # endpoint-minus-pairing phase, trapezoid multiplier
        g = GroupElement(alpha=trig(grid, sin=[0.6], cos=[0.2], const=0.1),
                         b=trig(grid, const=0.5, cos=[-0.5]), s=0.4)
        f = _default_probe(grid)
        rf = apply_rep(g, ctx, f)
        vals = np.stack([p.values for p in paths])
        x0 = 0.25
        at = g.alpha.values - g.alpha.values[0]
        sk = np.diff(at) / grid.du
        dx = np.diff(vals, axis=-1)
        logw = (-(sk * dx).sum(-1) / cfg.t
                - (sk ** 2).sum() * grid.du / (2.0 * cfg.t))
        phi = (at[-1] * vals[..., -1]
               - (grid.trap_weights * g.alpha.d1 * vals).sum(-1))
        mult = (grid.trap_weights * ctx.lam * g.b.values
                * np.exp(vals + x0)).sum(-1)
        want = (np.exp(1j * g.s) * np.exp(0.5 * logw) * np.exp(-1j * ctx.k * phi)
                * np.exp(mult) * f.fn(vals + at, x0 + g.alpha.values[0]))
        assert np.max(np.abs(rf.fn(vals, x0) - want)) <= 1e-13

    def test_grid_mismatch(self, grid, cfg, ctx):
        from loopgamma import make_grid
        other = make_grid(32)
        g = identity_element(other)
        with pytest.raises(UsageError):
            apply_rep(g, ctx, _default_probe(other))


class TestHomomorphism:
    def test_composition(self, grid, ctx, paths):
        rng = np.random.default_rng(4)
        for k in (0.0, 1.0):
            c = ctx.with_charge(k)
            g1 = random_element(grid, rng)
            g2 = random_element(grid, rng)
            assert check_homomorphism(g1, g2, c, paths) <= 1e-10

    def test_opposite_charge_commutes(self, grid, ctx, paths):
        rng = np.random.default_rng(5)
        g1 = random_element(grid, rng, with_b=False)
        g2 = random_element(grid, rng, with_b=False)
        assert check_opposite_charge(g1, g2, ctx, paths) <= 1e-10

    def test_opposite_charge_needs_zero_b(self, grid, ctx, paths):
        rng = np.random.default_rng(6)
        g1 = random_element(grid, rng, with_b=True)
        g2 = random_element(grid, rng, with_b=False)
        with pytest.raises(UsageError):
            check_opposite_charge(g1, g2, ctx, paths)


class TestUnitarity:
    def test_inner_products_preserved(self, grid, ctx, trig):
        g = GroupElement(alpha=trig(grid, sin=[1.0]),
                         b=trig(grid, const=1.0, cos=[-1.0]), s=0.3)
        f = _default_probe(grid)
        w = grid.trap_weights * np.sin(2.0 * grid.nodes)
        h = Functional(fn=lambda v, x0: np.exp(1j * (v @ w)) * np.exp(-0.2 * x0 * x0),
                       bounded=True)
        rep = check_unitarity(g, ctx, f, h, N=2000, seed=20)
        assert rep.passed
        assert abs(rep.details["diff"]) <= 3.0 * rep.stderr

    def test_requires_unitary_mode(self, grid, cfg, trig):
        ctx = RepContext(grid=grid, cfg=cfg, lam=-0.5, mode="semigroup")
        g = GroupElement(alpha=zero_loop(grid),
                         b=trig(grid, const=1.0, cos=[-1.0]), s=0.0)
        f = _default_probe(grid)
        with pytest.raises(DomainError):
            check_unitarity(g, ctx, f, f, N=100, seed=0)


class TestIntertwiner:
    def test_carries_sector(self, grid, ctx, paths, trig):
        X1, X2 = 0.9, 0.2
        xi = trig(grid, sin=[0.3], ramp=X1 - X2)
        g = GroupElement(alpha=trig(grid, sin=[0.5]),
                         b=trig(grid, const=0.4, cos=[-0.4]), s=0.1)
        assert check_intertwiner(X1, X2, xi, ctx.with_charge(0.0), g,
                                 paths) <= 1e-10

    def test_independent_of_profile(self, grid, ctx, paths, trig):
        # any xi with the right endpoints works, not just one profile
        X1, X2 = 0.9, 0.2
        g = GroupElement(alpha=trig(grid, sin=[0.5]),
                         b=trig(grid, const=0.4, cos=[-0.4]), s=0.1)
        for xi in (trig(grid, ramp=X1 - X2),
                   trig(grid, sin=[-0.4, 0.2], ramp=X1 - X2)):
            assert check_intertwiner(X1, X2, xi, ctx.with_charge(0.0), g,
                                     paths) <= 1e-10

    def test_endpoint_mismatch_rejected(self, grid, ctx, paths, trig):
        xi = trig(grid, ramp=0.5)
        g = identity_element(grid)
        with pytest.raises(UsageError):
            check_intertwiner(0.9, 0.2, xi, ctx, g, paths)

    def test_composition_exact(self, grid, ctx, paths, trig):
        # U_{xi2} U_{xi1 - xi2} = U_{xi1} pointwise
        xi1 = trig(grid, sin=[0.4], ramp=0.7)
        xi2 = trig(grid, sin=[0.1], ramp=0.3)
        xi12 = trig(grid, sin=[0.3], ramp=0.4)  # xi1 - xi2
        f = _default_probe(grid)
        lhs = intertwiner(xi2, ctx)(intertwiner(xi12, ctx)(f))
        rhs = intertwiner(xi1, ctx)(f)
        vals = np.stack([p.values for p in paths])
        assert np.max(np.abs(lhs.fn(vals, 0.0) - rhs.fn(vals, 0.0))) <= 1e-12


class TestLieGenerators:
    def test_T_is_multiplication(self, grid, ctx, paths, trig):
        b = trig(grid, const=1.0, cos=[-1.0])
        vals = np.stack([p.values for p in paths])
        got = lie_T(b, ctx).fn(vals, 0.4)
        want = np.array([quad(ctx.lam * b.values * np.exp(p.values + 0.4), grid)
                         for p in paths])
        assert np.max(np.abs(got - want)) <= 1e-14

    def test_D_matches_analytic_derivative(self, grid, cfg, ctx, paths, trig):
        # on f = 1 the generator is the half-weight derivative minus
        # i k times the phase pairing, both linear in alpha
        alpha = trig(grid, sin=[1.0])
        one = Functional(fn=lambda v, x0: np.ones(v.shape[:-1], dtype=complex),
                         bounded=True, differentiable=True)
        vals = np.stack([p.values for p in paths])
        at = alpha.values - alpha.values[0]
        sk = np.diff(at) / grid.du
        dx = np.diff(vals, axis=-1)
        halfdot = -(sk * dx).sum(-1) / (2.0 * cfg.t)
        phi = (at[-1] * vals[..., -1]
               - (grid.trap_weights * alpha.d1 * vals).sum(-1))
        analytic = halfdot - 1j * ctx.k * phi
        got = lie_D(alpha, ctx, one, eps=1e-3).fn(vals, 0.0)
        assert np.max(np.abs(got - analytic)) <= 1e-4
        rich = lie_D(alpha, ctx, one, eps=1e-2, richardson=True).fn(vals, 0.0)
        assert np.max(np.abs(rich - analytic)) <= 1e-6

    def test_D_is_second_order(self, grid, ctx, paths, trig):
        alpha = trig(grid, sin=[1.0])
        one = Functional(fn=lambda v, x0: np.ones(v.shape[:-1], dtype=complex),
                         bounded=True, differentiable=True)
        vals = np.stack([p.values for p in paths])
        ref = lie_D(alpha, ctx, one, eps=1e-4, richardson=True).fn(vals, 0.0)
        e1 = np.max(np.abs(lie_D(alpha, ctx, one, eps=1e-2).fn(vals, 0.0) - ref))
        e2 = np.max(np.abs(lie_D(alpha, ctx, one, eps=5e-3).fn(vals, 0.0) - ref))
        assert 3.5 <= e1 / e2 <= 4.5

    def test_D_rejects_nondifferentiable(self, grid, ctx, trig):
        f = Functional(fn=lambda v, x0: np.abs(v[..., 0]).astype(complex))
        with pytest.raises(UsageError):
            lie_D(trig(grid, sin=[1.0]), ctx, f)
        with pytest.raises(UsageError):
            lie_D(trig(grid, sin=[1.0]), ctx, _default_probe(grid), eps=0.0)


class TestCommutators:
    def test_central_constant(self, grid, ctx, paths, trig):
        res = check_commutators(trig(grid, sin=[1.0]), trig(grid, cos=[1.0]),
                                trig(grid, const=1.0, cos=[-1.0]), ctx, paths)
        assert res["central_pass"]
        # |[D_sin, D_cos]| = 2|k| |int cos' sin du| = 2 pi at k = 1
        assert abs(res["central_measured"]) == pytest.approx(2.0 * np.pi,
                                                             abs=1e-3)
        assert abs(res["central_measured"].real) <= 1e-3  # purely central
        assert res["central_sign"] != 0
        assert res["dt_pass"] and res["dt_residual"] <= 1e-6
        assert res["opposite_charge_pass"]

    def test_charge_zero_has_no_center(self, grid, ctx, paths, trig):
        res = check_commutators(trig(grid, sin=[1.0]), trig(grid, cos=[1.0]),
                                trig(grid, const=1.0, cos=[-1.0]),
                                ctx.with_charge(0.0), paths)
        assert res["central_pass"]
        assert abs(res["central_measured"]) <= 1e-6
        assert res["central_predicted_magnitude"] == 0.0
        assert res["central_sign"] == 0
