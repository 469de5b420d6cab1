"""Central extension of the loop ax+b group and its path-space operators.

Group elements are triples (alpha, b, s): the exponent loop, the offset
loop, and the central coordinate.  The product twists the s-coordinates by
the cocycle k * int alpha1 * alpha2' du.

The operator attached to (alpha, b, s) acts on functionals of (path, x0):
a phase e^{is}, the Cameron-Martin half-weight of the based part of alpha,
the central phase, the multiplier exp(int lambda b e^{x+x0} du), and the
argument shift (x + alpha_based, x0 + alpha(0)).  Two discretization rules
keep the algebra exact:

* the half-weight uses increment slopes, so its square is exactly the
  translation weight of the sampled walk and operator products compose
  with no quadrature error;
* the central phase uses the integrated-by-parts pairing
  alpha_based(2pi) x(2pi) - int alpha' x du, which is linear in the path,
  so products of operators reproduce the group cocycle to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import (Grid, MeasureConfig, SmoothLoop, cm_log_weight_values,
                   quad, zero_loop)
from .errors import DomainError, UsageError
from .montecarlo import CheckReport, Functional, mc_run, _run_with_rerun


@dataclass(frozen=True, eq=False)
class GroupElement:
    """One element (alpha, b, s) of the centrally extended loop group."""

    alpha: SmoothLoop
    b: SmoothLoop
    s: float

    def __post_init__(self):
        if self.alpha.grid.m != self.b.grid.m:
            raise UsageError("alpha and b live on different grids")
        if not self.alpha.is_loop:
            raise UsageError("alpha must close up: alpha(0) = alpha(2*pi)")
        if not self.b.is_loop:
            raise UsageError("b must close up: b(0) = b(2*pi)")
        object.__setattr__(self, "s", float(self.s))

    @property
    def grid(self) -> Grid:
        return self.alpha.grid

    @property
    def alpha0(self) -> float:
        """Constant part alpha(0); the x0 slot absorbs it."""
        return float(self.alpha.values[0])

    @property
    def alpha_based(self) -> np.ndarray:
        """alpha - alpha(0), the Cameron-Martin direction of the shift."""
        return self.alpha.values - self.alpha.values[0]


def identity_element(grid: Grid) -> GroupElement:
    z = zero_loop(grid)
    return GroupElement(alpha=z, b=z, s=0.0)


def cocycle(g1: GroupElement, g2: GroupElement, k: float) -> float:
    """Central twist k * int alpha1(u) alpha2'(u) du of the product g1*g2."""
    return float(k * quad(g1.alpha.values * g2.alpha.d1, g1.grid).real)


def multiply(g1: GroupElement, g2: GroupElement, k: float) -> GroupElement:
    """(alpha1+alpha2, e^{alpha1} b2 + b1, s1+s2 + cocycle)."""
    if g1.grid.m != g2.grid.m:
        raise UsageError("group elements live on different grids")
    g = g1.grid
    alpha = SmoothLoop(
        grid=g, values=g1.alpha.values + g2.alpha.values,
        d1=g1.alpha.d1 + g2.alpha.d1,
        d2=(None if g1.alpha.d2 is None or g2.alpha.d2 is None
            else g1.alpha.d2 + g2.alpha.d2))
    b = SmoothLoop.from_samples(
        g, np.exp(g1.alpha.values) * g2.b.values + g1.b.values)
    return GroupElement(alpha=alpha, b=b, s=g1.s + g2.s + cocycle(g1, g2, k))


def inverse(g: GroupElement, k: float) -> GroupElement:
    """Two-sided inverse in the extension: both products give (0, 0, 0)."""
    alpha = SmoothLoop(
        grid=g.grid, values=-g.alpha.values, d1=-g.alpha.d1,
        d2=None if g.alpha.d2 is None else -g.alpha.d2)
    b = SmoothLoop.from_samples(
        g.grid, -np.exp(-g.alpha.values) * g.b.values)
    s = -g.s + float(k * quad(g.alpha.values * g.alpha.d1, g.grid).real)
    return GroupElement(alpha=alpha, b=b, s=s)


def element_to_json(g: GroupElement, k: float | None = None) -> dict:
    doc = {"alpha": g.alpha.values.tolist(), "b": g.b.values.tolist(),
           "s": g.s, "k": k}
    doc["alpha_d1"] = g.alpha.d1.tolist()
    if g.alpha.d2 is not None:
        doc["alpha_d2"] = g.alpha.d2.tolist()
    return doc


def element_from_json(doc: dict, grid: Grid) -> tuple[GroupElement, float | None]:
    a = np.asarray(doc["alpha"], dtype=float)
    d1 = np.asarray(doc["alpha_d1"], dtype=float) if "alpha_d1" in doc else None
    d2 = np.asarray(doc["alpha_d2"], dtype=float) if "alpha_d2" in doc else None
    if d1 is None:
        alpha = SmoothLoop.from_samples(grid, a)
    else:
        alpha = SmoothLoop(grid=grid, values=a, d1=d1, d2=d2)
    b = SmoothLoop.from_samples(grid, np.asarray(doc["b"], dtype=float))
    return GroupElement(alpha=alpha, b=b, s=float(doc["s"])), doc.get("k")


# ---------------------------------------------------------------------------
# representation context and operators

@dataclass(frozen=True)
class RepContext:
    """Charge k, multiplier profile lambda(u), measure, and operating mode.

    Unitary mode demands purely imaginary lambda; semigroup mode instead
    demands Re(lambda(u)) * b(u) <= 0 per applied element, checked by
    semigroup_guard.
    """

    grid: Grid
    cfg: MeasureConfig
    lam: np.ndarray
    k: float = 0.0
    mode: str = "unitary"

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=complex)
        if lam.ndim == 0:
            lam = np.full(self.grid.m + 1, complex(lam))
        if lam.shape != (self.grid.m + 1,):
            raise UsageError(
                f"lambda needs {self.grid.m + 1} samples, got {lam.shape}")
        if not np.all(np.isfinite(lam)):
            raise UsageError("lambda samples must be finite")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "k", float(self.k))
        if self.mode not in ("unitary", "semigroup"):
            raise UsageError(f"mode must be 'unitary' or 'semigroup', got {self.mode!r}")
        if self.mode == "unitary" and not np.all(lam.real == 0.0):
            raise DomainError(
                "unitary mode needs purely imaginary lambda; "
                "use mode='semigroup' for decaying multipliers")

    def with_charge(self, k: float) -> "RepContext":
        return replace(self, k=k)

    def with_lambda(self, lam) -> "RepContext":
        return replace(self, lam=lam)


def semigroup_guard(ctx: RepContext, g: GroupElement,
                    x0_range: tuple[float, float] = (-1.0, 1.0)) -> None:
    """Convergence/contraction sign condition for non-unitary multipliers.

    Needs mu(u) = -Re(lambda(u)) b(u) e^{x0} >= 0 for every node and every
    x0; e^{x0} > 0, so the x0 range only enters the error report.
    """
    prod = ctx.lam.real * g.b.values
    bad = np.flatnonzero(prod > 0.0)
    if bad.size:
        j = int(bad[np.argmax(prod[bad])])
        raise DomainError(
            "semigroup condition violated: Re(lambda)*b = "
            f"{prod[j]:.6g} > 0 at node u = {ctx.grid.nodes[j]:.6f} "
            f"(x0 in [{x0_range[0]}, {x0_range[1]}])")


def apply_rep(g: GroupElement, ctx: RepContext, f: Functional) -> Functional:
    """The operator of g on functionals of (path, x0); returns a Functional.

    (rho(g) f)(x, x0) = e^{is} * half-weight(alpha_based, x)
        * e^{-ik (alpha_based(2pi) x(2pi) - int alpha' x du)}
        * e^{int lambda b e^{x + x0} du}
        * f(x + alpha_based, x0 + alpha(0)).
    """
    if g.grid.m != ctx.grid.m:
        raise UsageError("element and context live on different grids")
    if ctx.mode == "semigroup":
        semigroup_guard(ctx, g)
    grid, cfg = ctx.grid, ctx.cfg
    at = g.alpha_based
    at_end = float(at[-1])
    d1 = g.alpha.d1
    lam_b = ctx.lam * g.b.values
    k = ctx.k
    phase_s = np.exp(1j * g.s)
    a0 = g.alpha0
    base = f.fn

    def fn(values, x0):
        half = 0.5 * cm_log_weight_values(at, values, grid, cfg)
        phi = at_end * values[..., -1] - quad(d1 * values, grid)
        mult = quad(lam_b * np.exp(values + x0), grid)
        return (phase_s * np.exp(half) * np.exp(-1j * k * phi)
                * np.exp(mult) * base(values + at, x0 + a0))

    return Functional(fn=fn, bounded=False, differentiable=f.differentiable)


def _default_probe(grid: Grid) -> Functional:
    """Bounded probe functional sensitive to both the path and x0 slots."""
    eta = np.cos(grid.nodes) + 0.5 * np.sin(2.0 * grid.nodes)
    w = grid.trap_weights * eta

    def fn(values, x0):
        return np.exp(1j * (values @ w)) * np.exp(1j * x0 - 0.1 * x0 * x0)

    return Functional(fn=fn, bounded=True, differentiable=True)


def _as_values(paths) -> np.ndarray:
    if hasattr(paths, "values"):
        return np.asarray(paths.values)[None, :]
    arr = np.asarray([p.values if hasattr(p, "values") else p for p in paths]) \
        if isinstance(paths, (list, tuple)) else np.asarray(paths)
    if arr.ndim == 1:
        arr = arr[None, :]
    return arr


def _max_abs_diff(fa: Functional, fb: Functional, paths, x0s) -> float:
    vals = _as_values(paths)
    worst = 0.0
    for x0 in np.atleast_1d(x0s):
        d = np.abs(fa.fn(vals, float(x0)) - fb.fn(vals, float(x0)))
        worst = max(worst, float(np.max(d)))
    return worst


def check_homomorphism(g1: GroupElement, g2: GroupElement, ctx: RepContext,
                       paths, f: Functional | None = None,
                       x0s=(0.0, 0.4, -1.1)) -> float:
    """Max over pinned paths of |rho(g1)(rho(g2) f) - rho(g1 g2) f|.

    Algebraic identity of the discretization; the residual is rounding
    noise, gated at 1e-10 by the callers.
    """
    f = f or _default_probe(ctx.grid)
    lhs = apply_rep(g1, ctx, apply_rep(g2, ctx, f))
    rhs = apply_rep(multiply(g1, g2, ctx.k), ctx, f)
    return _max_abs_diff(lhs, rhs, paths, x0s)


def check_opposite_charge(g1: GroupElement, g2: GroupElement, ctx: RepContext,
                          paths, f: Functional | None = None,
                          x0s=(0.0, 0.7)) -> float:
    """Commutation of charge k and charge -k operators for b = 0 elements."""
    for g in (g1, g2):
        if np.any(g.b.values != 0.0):
            raise UsageError("opposite-charge commutation needs b = 0 elements")
    f = f or _default_probe(ctx.grid)
    plus, minus = ctx, ctx.with_charge(-ctx.k)
    lhs = apply_rep(g1, plus, apply_rep(g2, minus, f))
    rhs = apply_rep(g2, minus, apply_rep(g1, plus, f))
    return _max_abs_diff(lhs, rhs, paths, x0s)


# x0 quadrature used by the inner-product checks.  The profiles supplied in
# the tests decay like exp(-x0^2), so the trapezoid tail error over this
# window is far below Monte Carlo resolution.
X0_WINDOW = 8.0
X0_NODES = 41


def _x0_rule():
    xs = np.linspace(-X0_WINDOW, X0_WINDOW, X0_NODES)
    w = np.full(xs.shape, xs[1] - xs[0])
    w[0] = w[-1] = 0.5 * (xs[1] - xs[0])
    return xs, w


def check_unitarity(g: GroupElement, ctx: RepContext, f: Functional,
                    h: Functional, N: int, seed: int,
                    workers: int | None = None) -> CheckReport:
    """<rho(g) f, rho(g) h> vs <f, h> over the walk law times dx0.

    Both inner products are estimated on the same sampled paths, with the
    x0 integral done by a fixed trapezoid rule; gate 3 SE on the paired
    difference, one retry at 4N.
    """
    if ctx.mode != "unitary":
        raise DomainError("unitarity is only claimed for imaginary lambda")
    rf = apply_rep(g, ctx, f)
    rh = apply_rep(g, ctx, h)
    xs, wq = _x0_rule()

    def eval_block(block):
        lhs = np.zeros(block.shape[0], dtype=complex)
        rhs = np.zeros(block.shape[0], dtype=complex)
        for x0, w in zip(xs, wq):
            lhs += w * np.conj(rf.fn(block, x0)) * rh.fn(block, x0)
            rhs += w * np.conj(f.fn(block, x0)) * h.fn(block, x0)
        return np.stack([lhs, rhs, lhs - rhs])

    def run(n):
        ests = mc_run(eval_block, "free", ctx.grid, ctx.cfg, n, seed, workers)
        return ests[0], ests[1], ests[2]

    lhs, rhs, diff, passed, n_used = _run_with_rerun(run, N, 0.0)
    return CheckReport(check="unitarity", lhs=lhs.mean, rhs=rhs.mean,
                       stderr=diff.stderr, passed=passed, n=n_used, seed=seed,
                       details={"diff": diff.mean})


# ---------------------------------------------------------------------------
# equivalence of endpoint sectors

def intertwiner(xi: SmoothLoop, ctx: RepContext) -> Functional:
    """U_xi f = f(. + xi) times the Cameron-Martin half-weight of xi.

    Identities exact in the discrete algebra: U_{xi2} U_{xi1 - xi2} = U_{xi1},
    and U_xi conjugates the multiplier profile lambda to e^{xi} lambda.
    """
    if xi.values[0] != 0.0:
        raise UsageError("intertwiner shifts must vanish at u = 0")
    grid, cfg = ctx.grid, ctx.cfg
    xv = xi.values

    def make(f: Functional) -> Functional:
        def fn(values, x0):
            half = 0.5 * cm_log_weight_values(xv, values, grid, cfg)
            return np.exp(half) * f.fn(values + xv, x0)
        return Functional(fn=fn, bounded=False, differentiable=f.differentiable)

    return make


def check_intertwiner(X1: float, X2: float, xi: SmoothLoop, ctx: RepContext,
                      g: GroupElement, paths, f: Functional | None = None,
                      x0s=(0.0, 0.5)) -> float:
    """Residual of U_xi rho_lambda(g) = rho_{e^xi lambda}(g) U_xi on paths.

    xi carries the endpoint-X1 sector onto the endpoint-X2 sector, so it
    must run from 0 to X1 - X2.  The relation is an identity of the
    charge-zero operator algebra; with k != 0 the two sides can differ by
    the constant character e^{ik int alpha' xi du}, which vanishes for the
    pinned test data used here.
    """
    if xi.values[0] != 0.0:
        raise UsageError("xi must vanish at u = 0")
    if abs(float(xi.values[-1]) - (X1 - X2)) > 1e-12:
        raise UsageError(
            f"xi(2*pi) = {xi.values[-1]:.6g} does not match X1 - X2 = {X1 - X2:.6g}")
    f = f or _default_probe(ctx.grid)
    U = intertwiner(xi, ctx)
    ctx2 = ctx.with_lambda(ctx.lam * np.exp(xi.values))
    lhs = U(apply_rep(g, ctx, f))
    rhs = apply_rep(g, ctx2, U(f))
    return _max_abs_diff(lhs, rhs, paths, x0s)


# ---------------------------------------------------------------------------
# Lie generators

def lie_T(b: SmoothLoop, ctx: RepContext) -> Functional:
    """Multiplication by int lambda(u) b(u) e^{x(u)+x0} du."""
    lam_b = ctx.lam * b.values
    grid = ctx.grid

    def fn(values, x0):
        return quad(lam_b * np.exp(values + x0), grid)

    return Functional(fn=fn, bounded=False, differentiable=True)


def lie_D(alpha: SmoothLoop, ctx: RepContext, f: Functional,
          eps: float = 1e-4, richardson: bool = False) -> Functional:
    """Generator along alpha by a central difference of one-parameter flows.

    D f = (rho(e^{eps alpha}) f - rho(e^{-eps alpha}) f) / (2 eps), bias
    O(eps^2); the Richardson option combines eps and eps/2 for O(eps^4).
    """
    if not f.differentiable:
        raise UsageError("lie_D needs a differentiable-flagged functional")
    if not (eps > 0.0):
        raise UsageError(f"step must be positive, got {eps}")

    def central(e: float) -> Functional:
        ga = GroupElement(alpha=alpha.scaled(e), b=zero_loop(alpha.grid), s=0.0)
        gb = GroupElement(alpha=alpha.scaled(-e), b=zero_loop(alpha.grid), s=0.0)
        fa, fb = apply_rep(ga, ctx, f), apply_rep(gb, ctx, f)

        def fn(values, x0):
            return (fa.fn(values, x0) - fb.fn(values, x0)) / (2.0 * e)
        return Functional(fn=fn, bounded=False, differentiable=f.differentiable)

    if not richardson:
        return central(eps)
    d1, d2 = central(eps), central(eps / 2.0)

    def fn(values, x0):
        return (4.0 * d2.fn(values, x0) - d1.fn(values, x0)) / 3.0

    return Functional(fn=fn, bounded=False, differentiable=f.differentiable)


def check_commutators(alpha1: SmoothLoop, alpha2: SmoothLoop, b: SmoothLoop,
                      ctx: RepContext, paths, eps: float = 1e-4,
                      x0s=(0.0,), fd_tol: float = 1e-3,
                      tb_tol: float = 1e-6) -> dict:
    """Finite-difference Lie brackets against the algebra's predictions.

    Reports the measured central constant of [D_{alpha1}, D_{alpha2}]
    (magnitude gated against 2|k| |int alpha1' alpha2 du|, sign recorded),
    the residual of [D_alpha, T_b] = T_{alpha b}, and the opposite-charge
    bracket [D_{k}, D_{-k}] which must vanish.
    """
    grid = ctx.grid
    one = Functional(fn=lambda values, x0: np.ones(values.shape[:-1], dtype=complex),
                     bounded=True, differentiable=True)
    vals = _as_values(paths)

    def bracket_DD(ca: RepContext, cb: RepContext) -> np.ndarray:
        res = None
        for x0 in np.atleast_1d(x0s):
            d2f = lie_D(alpha2, cb, one, eps)
            d1f = lie_D(alpha1, ca, one, eps)
            lhs = lie_D(alpha1, ca, d2f, eps).fn(vals, float(x0))
            rhs = lie_D(alpha2, cb, d1f, eps).fn(vals, float(x0))
            cur = lhs - rhs
            res = cur if res is None else np.concatenate([res, cur])
        return res

    cvals = bracket_DD(ctx, ctx)
    c_measured = complex(np.mean(cvals))
    c_spread = float(np.max(np.abs(cvals - c_measured)))
    predicted = 2.0 * abs(ctx.k) * abs(float(quad(alpha1.d1 * alpha2.values, grid).real))
    central_ok = (abs(abs(c_measured) - predicted) <= fd_tol
                  and c_spread <= fd_tol)

    # [D_alpha1, T_b] f = T_{alpha1 b} f on a probe functional
    probe = _default_probe(grid)
    tb = lie_T(b, ctx)
    tb_f = Functional(fn=lambda values, x0: tb.fn(values, x0) * probe.fn(values, x0),
                      bounded=False, differentiable=True)
    ab = SmoothLoop.from_samples(grid, alpha1.values * b.values)
    tab = lie_T(ab, ctx)
    dt_res = 0.0
    for x0 in np.atleast_1d(x0s):
        x0 = float(x0)
        lhs = (lie_D(alpha1, ctx, tb_f, eps).fn(vals, x0)
               - tb.fn(vals, x0) * lie_D(alpha1, ctx, probe, eps).fn(vals, x0))
        rhs = tab.fn(vals, x0) * probe.fn(vals, x0)
        dt_res = max(dt_res, float(np.max(np.abs(lhs - rhs))))

    opp = bracket_DD(ctx, ctx.with_charge(-ctx.k))
    opp_res = float(np.max(np.abs(opp)))

    return {
        "central_measured": c_measured,
        "central_predicted_magnitude": predicted,
        "central_sign": int(np.sign(c_measured.imag)) if abs(c_measured.imag) > fd_tol / 10 else 0,
        "central_spread": c_spread,
        "central_pass": bool(central_ok),
        "dt_residual": dt_res,
        "dt_pass": bool(dt_res <= tb_tol),
        "opposite_charge_residual": opp_res,
        "opposite_charge_pass": bool(opp_res <= fd_tol),
        "eps": eps,
    }
