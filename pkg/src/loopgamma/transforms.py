"""Laplace-line transforms and the Gamma-kernel form of the multiplier action.

The multiplication-and-shift operators, conjugated by a bilateral Laplace
transform, become integral operators whose kernel is a classical Gamma
function of the transform variable difference.  This module realizes both
routes on sampled line functions and compares them: once for the scalar
ax+b model (check_prop22) and once for the x0 slot of the loop operators at
a frozen path (check_theorem52).

The Gamma kernel has a simple pole where the two transform variables meet.
The quadrature splits it as Gamma(zeta) = [Gamma(zeta) - 1/zeta] + 1/zeta;
the smooth part is integrated directly and the pole contributes a principal
value plus the half-residue pi*phi(z) picked out by the i0 prescription
that the convergent route induces.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import (Grid, MeasureConfig, Path, SmoothLoop, bridge_mass,
                   cm_log_weight_values, quad)
from .errors import AccuracyError, DomainError, UsageError
from .gammareg import gamma_classical
from .montecarlo import (CheckReport, Functional, MCEstimate, expect,
                         gaussian_moment_oracle)
from .repops import GroupElement, RepContext

# edge decay demanded of sampled line functions, relative to their peak
EDGE_TOL = 1e-13


@dataclass(frozen=True)
class LineFunction:
    """Complex samples on a uniform grid over [-half_width, half_width].

    Values must have effectively died out at the window edges (outermost
    two nodes below EDGE_TOL relative to the peak), so that window
    truncation is below every tolerance used here.
    """

    half_width: float
    values: np.ndarray

    def __post_init__(self):
        if not (np.isfinite(self.half_width) and self.half_width > 0.0):
            raise UsageError(f"half_width must be positive, got {self.half_width}")
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim != 1 or vals.size < 9 or vals.size % 2 == 0:
            raise UsageError("values must be a 1-d odd-length array, >= 9 samples")
        if not np.all(np.isfinite(vals)):
            raise UsageError("line function samples must be finite")
        edge = max(np.max(np.abs(vals[:2])), np.max(np.abs(vals[-2:])))
        if edge > EDGE_TOL * max(1.0, float(np.max(np.abs(vals)))):
            raise UsageError(
                f"samples do not vanish at the window edges (edge magnitude "
                f"{edge:.3g}); enlarge half_width")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def dt(self) -> float:
        return 2.0 * self.half_width / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n)

    @classmethod
    def from_callable(cls, half_width: float, n: int, fn) -> "LineFunction":
        nodes = np.linspace(-half_width, half_width, n)
        return cls(half_width, np.asarray([fn(t) for t in nodes], dtype=complex))


def _trap_weights(n: int, dt: float) -> np.ndarray:
    w = np.full(n, dt)
    w[0] = w[-1] = 0.5 * dt
    return w


def _transform_values(values: np.ndarray, half_width: float, out_nodes,
                      sign: float) -> np.ndarray:
    """(1/sqrt(2pi)) int e^{sign*i*out*t} v(t) dt at out_nodes, trapezoid."""
    n = values.size
    t = np.linspace(-half_width, half_width, n)
    damped = values * _trap_weights(n, t[1] - t[0])
    phase = np.exp(sign * 1j * np.outer(np.asarray(out_nodes, dtype=float), t))
    return (phase @ damped) / math.sqrt(2.0 * math.pi)


def bilateral_laplace(f: LineFunction, contour: float = 0.0) -> LineFunction:
    """Transform along the line Im p = contour, sampled at p = r + i*contour.

    F(p) = (1/sqrt(2pi)) int e^{ipt} f(t) dt.  Raises an accuracy error when
    the transform has not decayed inside the window (the inverse would then
    truncate it).
    """
    vals = _transform_values(f.values * np.exp(-contour * f.nodes),
                             f.half_width, f.nodes, +1.0)
    edge = max(np.max(np.abs(vals[:2])), np.max(np.abs(vals[-2:])))
    if edge > EDGE_TOL * max(1.0, float(np.max(np.abs(vals)))):
        raise AccuracyError(
            "transform does not decay inside the window; enlarge half_width "
            "or move the contour", achieved=float(edge))
    return LineFunction(f.half_width, vals)


def inverse_bilateral_laplace(F: LineFunction, contour: float = 0.0) -> LineFunction:
    """Inverse along the same contour: (1/sqrt(2pi)) int e^{-ipt} F(p) dr.

    With p = r + i*contour the factor e^{-ipt} = e^{-irt} e^{contour*t}
    re-inflates what the forward contour damped.
    """
    vals = _transform_values(F.values, F.half_width, F.nodes, -1.0) \
        * np.exp(contour * F.nodes)
    edge = max(np.max(np.abs(vals[:2])), np.max(np.abs(vals[-2:])))
    if edge > EDGE_TOL * max(1.0, float(np.max(np.abs(vals)))):
        raise AccuracyError(
            "inverse transform does not decay inside the window",
            achieved=float(edge))
    return LineFunction(F.half_width, vals)


def _interp_shifted(f: LineFunction, shift: float) -> np.ndarray:
    """Samples of f(t + shift) on f's own grid, zero outside the window.

    Mass of f that the shift would move out of the window must already be
    negligible; the check rejects profiles that lose support.
    """
    nodes = f.nodes
    peak = max(1.0, float(np.max(np.abs(f.values))))
    lost = np.abs(nodes + shift) > f.half_width
    src_lost = (nodes < -f.half_width + shift) if shift > 0 else \
               (nodes > f.half_width + shift)
    if np.any(src_lost) and np.max(np.abs(f.values[src_lost])) > 1e-12 * peak:
        raise UsageError(
            f"support overflow: shift {shift:.4g} pushes the profile out of "
            f"the window [-{f.half_width}, {f.half_width}]")
    re = np.interp(nodes + shift, nodes, f.values.real, left=0.0, right=0.0)
    im = np.interp(nodes + shift, nodes, f.values.imag, left=0.0, right=0.0)
    out = re + 1j * im
    out[lost] = 0.0
    return out


def rep_finite(a: float, b: float, lam: complex, f: LineFunction) -> LineFunction:
    """The scalar ax+b model operator R_lam(a, b) f(t) = e^{lam b e^t} f(t + ln a).

    Unimodular (hence unitary on the line) exactly when lam*b is imaginary.
    Off-grid shifts are linearly interpolated; shifts that push the support
    of f out of the window are rejected.
    """
    a = float(a)
    if not (np.isfinite(a) and a > 0.0):
        raise DomainError(f"dilation a must be positive, got {a}")
    b = float(b)
    lam = complex(lam)
    if not (np.isfinite(b) and np.isfinite(lam.real) and np.isfinite(lam.imag)):
        raise DomainError("b and lam must be finite")
    expo = lam * b * np.exp(f.nodes)
    if np.max(expo.real) > 690.0:
        raise DomainError(
            "multiplier overflows on the window; Re(lam*b) must be <= 0 "
            "when the window reaches large t")
    return LineFunction(f.half_width, np.exp(expo) * _interp_shifted(f, math.log(a)))


# ---------------------------------------------------------------------------
# the Gamma-kernel route

def _simpson_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (h / 3.0)


def _gamma_smooth_table(n: int, h: float) -> np.ndarray:
    """Gamma(i*d*h) - 1/(i*d*h) for node offsets d = -(n-1)..(n-1)."""
    out = np.empty(2 * n - 1, dtype=complex)
    for j, d in enumerate(range(-(n - 1), n)):
        if d == 0:
            out[j] = -np.euler_gamma
        else:
            zeta = 1j * d * h
            out[j] = gamma_classical(zeta) - 1.0 / zeta
    return out


def gamma_kernel_transform(psi_values: np.ndarray, half_width: float,
                           base: complex, shift: float,
                           z_indices) -> np.ndarray:
    """G(z) = (1/2pi) int psi(v) e^{-i*shift*v} base^{i(v-z)} Gamma(i(z-v)) dv.

    This is the convergent multiply-and-shift route written as a kernel:
    the pole of Gamma at v = z carries the boundary-value prescription
    1/(i(z-v) + 0), i.e. a principal value plus pi * (integrand at v = z).
    base must stay off the branch cut (-inf, 0] of the principal power.

    The pole split Gamma = [Gamma - 1/zeta] + 1/zeta only happens inside a
    width-1 window around v = z; outside it the product of the Gamma decay
    and the power growth is integrated whole, which keeps the quadrature
    conditioned for bases of large argument (imaginary multipliers).
    """
    base = complex(base)
    if base == 0.0 or (base.imag == 0.0 and base.real < 0.0):
        raise DomainError(f"kernel base {base} lies on the power branch cut")
    psi = np.asarray(psi_values, dtype=complex)
    n = psi.size
    v = np.linspace(-half_width, half_width, n)
    h = v[1] - v[0]
    logb = cmath.log(base)
    smooth_tab = _gamma_smooth_table(n, h)
    offs = np.arange(-(n - 1), n)
    with np.errstate(divide="ignore", invalid="ignore"):
        full_tab = smooth_tab + 1.0 / (1j * offs * h)
    full_tab[n - 1] = 0.0  # unused: the pole node is always in the window
    k_half = max(2, int(round(1.0 / h)))
    idx = np.arange(n)
    out = np.empty(len(z_indices), dtype=complex)
    for col, iz in enumerate(z_indices):
        iz = int(iz)
        k1 = k_half + ((iz - k_half) % 2)
        k2 = k_half + ((iz + k_half) % 2)
        if iz - k1 < 2 or iz + k2 > n - 3:
            raise UsageError("report nodes must sit well inside the window")
        z = v[iz]
        phi = psi * np.exp(-1j * shift * v) * np.exp(1j * (v - z) * logb)
        gam = full_tab[iz - idx + n - 1]
        lo, hi = iz - k1, iz + k2
        left = np.sum(_simpson_weights(lo + 1, h) * gam[:lo + 1] * phi[:lo + 1])
        right = np.sum(_simpson_weights(n - hi, h) * gam[hi:] * phi[hi:])
        win = slice(lo, hi + 1)
        win_w = _simpson_weights(hi - lo + 1, h)
        smooth = np.sum(win_w * smooth_tab[iz - idx[win] + n - 1] * phi[win])
        dq = np.empty(hi - lo + 1, dtype=complex)
        rel = idx[win] != iz
        dq[rel] = (phi[win][rel] - phi[iz]) / (v[win][rel] - z)
        dq[iz - lo] = (phi[iz + 1] - phi[iz - 1]) / (2.0 * h)
        pv = np.sum(win_w * dq) + phi[iz] * math.log(k2 / k1)
        out[col] = (left + right + smooth + 1j * pv
                    + math.pi * phi[iz]) / (2.0 * math.pi)
    return out


def _report_indices(n: int, span_nodes: int, count: int) -> np.ndarray:
    center = n // 2
    span = min(span_nodes, center - 2)
    return np.unique(np.linspace(center - span, center + span, count).round().astype(int))


def check_prop22(a: float, b: float, lam: float, f: LineFunction,
                 n_report: int = 33, tol: float = 1e-4) -> CheckReport:
    """Transform-conjugated multiplier operator against its Gamma kernel.

    Route A evaluates L R_lam(a,b) L^{-1} f directly; route B integrates
    the kernel (1/2pi) Gamma(i(t1-t2)) a^{-i t2} (-lam b)^{i(t2-t1)} against
    f.  Requires -lam*b > 0, where the multiplier route converges.  Both
    routes share the inverse transform of f, and the comparison is relative
    to the peak of route A over the report band.
    """
    a = float(a)
    b = float(b)
    lam = float(lam)
    if not a > 0.0:
        raise DomainError(f"dilation a must be positive, got {a}")
    if not -lam * b > 0.0:
        raise DomainError(
            f"Gamma-kernel route needs -lam*b > 0, got lam={lam}, b={b}")
    hfun = inverse_bilateral_laplace(f)
    rep = rep_finite(a, b, lam, hfun)
    z_idx = _report_indices(f.n, int(round(4.0 / f.dt)), n_report)
    z = f.nodes[z_idx]
    route_a = _transform_values(rep.values, rep.half_width, z, +1.0)
    # resample f through the same inverse so both routes share one profile
    f_fine = _transform_values(hfun.values, hfun.half_width, hfun.nodes, +1.0)
    route_b = gamma_kernel_transform(f_fine, f.half_width, -lam * b,
                                     math.log(a), z_idx)
    scale = float(np.max(np.abs(route_a)))
    resid = float(np.max(np.abs(route_a - route_b))) / scale
    worst = int(np.argmax(np.abs(route_a - route_b)))
    return CheckReport(
        check="prop22-dual-route", lhs=complex(route_a[worst]),
        rhs=complex(route_b[worst]), stderr=0.0, passed=bool(resid <= tol),
        n=len(z_idx), seed=0,
        details={"residual": resid, "z": z.tolist(),
                 "route_transform": route_a.tolist(),
                 "route_kernel": route_b.tolist()})


def check_theorem52(x: Path, g: GroupElement, ctx: RepContext,
                    psi: LineFunction, path_profile: Functional | None = None,
                    n_report: int = 25, tol: float = 1e-4) -> CheckReport:
    """The x0-slot of the loop operator at a frozen path, two ways.

    At fixed path x the operator acts on an x0 profile phi as
    P(x) * e^{E e^{x0}} phi(x0 + alpha(0)) with E = int lam b e^x du and P
    the phase-and-weight prefactor.  Route A transforms that action of
    L^{-1} psi directly; route B applies the Gamma kernel with base -E and
    shift alpha(0) to psi.  Valid whenever E stays off [0, inf), where the
    principal power of -E is taken; e.g. decaying multipliers (E < 0) and
    imaginary ones.

    For imaginary E the direct route must resolve the multiplier
    oscillation of frequency |E| e^{x0} wherever the profile lives, so psi
    should be chosen wide enough (narrow in the line variable) for the
    sampling to keep up; decaying multipliers have no such constraint.
    """
    grid, cfg = ctx.grid, ctx.cfg
    if x.grid.m != grid.m or g.grid.m != grid.m:
        raise UsageError("path, element and context live on different grids")
    E = complex(quad(ctx.lam * g.b.values * np.exp(x.values), grid))
    if E.imag == 0.0 and E.real >= 0.0:
        raise DomainError(
            f"multiplier pairing {E} sits on the positive axis, outside the "
            "sector where the kernel route converges")
    at = g.alpha_based
    half = 0.5 * float(cm_log_weight_values(at, x.values, grid, cfg))
    phase = float(at[-1]) * float(x.values[-1]) - float(quad(g.alpha.d1 * x.values, grid))
    prefactor = cmath.exp(1j * g.s) * math.exp(half) * cmath.exp(-1j * ctx.k * phase)
    if path_profile is not None:
        prefactor *= complex(path_profile.fn(x.values + at, 0.0))

    phi = inverse_bilateral_laplace(psi)
    shifted = _interp_shifted(phi, g.alpha0)
    mvals = np.exp(E * np.exp(phi.nodes)) * shifted
    z_idx = _report_indices(psi.n, int(round(4.0 / psi.dt)), n_report)
    z = psi.nodes[z_idx]
    route_a = prefactor * _transform_values(mvals, phi.half_width, z, +1.0)
    psi_fine = _transform_values(phi.values, phi.half_width, phi.nodes, +1.0)
    route_b = prefactor * gamma_kernel_transform(psi_fine, psi.half_width,
                                                 -E, g.alpha0, z_idx)
    scale = float(np.max(np.abs(route_a)))
    resid = float(np.max(np.abs(route_a - route_b))) / scale
    worst = int(np.argmax(np.abs(route_a - route_b)))
    return CheckReport(
        check="theorem52-dual-route", lhs=complex(route_a[worst]),
        rhs=complex(route_b[worst]), stderr=0.0, passed=bool(resid <= tol),
        n=len(z_idx), seed=0,
        details={"residual": resid, "pairing": E, "z": z.tolist(),
                 "route_transform": route_a.tolist(),
                 "route_kernel": route_b.tolist()})


# ---------------------------------------------------------------------------
# Fourier-Wiener transform

def fourier_wiener_check(eta, zeta, cfg: MeasureConfig, grid: Grid | None = None,
                         tol: float = 1e-10) -> CheckReport:
    """Unitarity of F f(y) = int f(x + iy) dw^{2t}(x) on exponential vectors.

    For f_eta = e^{<eta, .>} the transform is again an exponential vector
    times a Gaussian moment at doubled variance, so both inner products
    against the variance-t law reduce to the moment oracle and the check is
    deterministic.  Profiles may be real loops or complex sample arrays
    (pass grid explicitly for raw arrays).
    """
    if isinstance(eta, SmoothLoop):
        grid = eta.grid
    elif isinstance(zeta, SmoothLoop):
        grid = zeta.grid
    elif grid is None:
        raise UsageError("raw profile arrays need an explicit grid")
    ev = np.asarray(eta.values if isinstance(eta, SmoothLoop) else eta,
                    dtype=complex)
    zv = np.asarray(zeta.values if isinstance(zeta, SmoothLoop) else zeta,
                    dtype=complex)
    if ev.shape != (grid.m + 1,) or zv.shape != (grid.m + 1,):
        raise UsageError(f"profiles need {grid.m + 1} samples")
    cfg2 = MeasureConfig(t=2.0 * cfg.t)

    def mom(values, c):
        return gaussian_moment_oracle(values, "bridge", grid, c, X=0.0)

    ebar = np.conj(ev)
    lhs = (np.conj(mom(ev, cfg2)) * mom(zv, cfg2)
           * mom(1j * (zv - ebar), cfg))
    rhs = mom(ebar + zv, cfg)
    resid = abs(lhs - rhs) / abs(rhs)
    return CheckReport(check="fourier-wiener", lhs=lhs, rhs=rhs, stderr=0.0,
                       passed=bool(resid <= tol), n=grid.m, seed=0,
                       details={"residual": float(resid)})


def mathcalF_eval(f: Functional, p: SmoothLoop, cfg: MeasureConfig,
                  N: int, seed: int, workers: int | None = None) -> MCEstimate:
    """Pairing-transform sample: mass * E_bridge[e^{i <p, x>} f(x)] at X = 0.

    The direction profile must vanish at both endpoints so the pairing is
    a functional of the pinned path alone.  For f = 1 the value is the
    bridge mass times e^{-Q(p)/2} with Q the bridge covariance form.
    """
    grid = p.grid
    peak = max(1.0, float(np.max(np.abs(p.values))))
    if max(abs(p.values[0]), abs(p.values[-1])) > 1e-12 * peak:
        raise DomainError("transform profile must vanish at u = 0 and u = 2*pi")
    wp = grid.trap_weights * p.values
    base = f.fn

    def fn(values, x0):
        return np.exp(1j * (values @ wp)) * base(values, x0)

    g = Functional(fn=fn, bounded=f.bounded, differentiable=f.differentiable)
    est = expect(g, ("bridge", 0.0), grid, cfg, N, seed, workers=workers)
    mass = bridge_mass(0.0, cfg)
    return MCEstimate(mean=est.mean * mass, stderr=est.stderr * mass,
                      n=est.n, seed=est.seed)
