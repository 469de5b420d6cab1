"""Classical and Gaussian-regularized Gamma functions by quadrature.

gamma_reg evaluates

    Gamma_{mu,t}(z) = int_R exp(-mu e^x + z x - x^2 / (2t)) dx.

The real exponent phi(x) = -mu e^x + Re(z) x - x^2/(2t) is strictly concave
(phi'' = -mu e^x - 1/t < 0), so the peak is a unique root of phi' and the
integrand decays at least exponentially once phi has dropped; the
integration window is solved from that drop rather than fixed, and the
leftover tails are bounded by the tangent-line integral e^{phi}/|phi'| at
the cut points.

It satisfies mu Gamma(z+1) = z Gamma(z) - (1/t) Gamma'(z), which follows
from integrating d/dx of the integrand, and converges for t -> infinity to
mu^{-(z+1)} Gamma(z+1) (substitute s = mu e^x with the Gaussian factor
dropped).  A different limit value appears in some accounts; check_large_t
reports both, and the convergence test gates on the substitution value.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad as _quad
from scipy.optimize import brentq

from .errors import AccuracyError, DomainError

# standard 9-term Lanczos coefficients for g = 7
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma_classical(z: complex) -> complex:
    """Gamma(z) for complex z by Lanczos with reflection for Re z < 1/2."""
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == int(z.real):
        raise DomainError(f"Gamma pole at z = {int(z.real)}")
    if z.real < 0.5:
        # reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        return math.pi / (cmath.sin(math.pi * z) * gamma_classical(1.0 - z))
    z -= 1.0
    x = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        x += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * cmath.exp(-t) * x


@dataclass(frozen=True)
class RegGammaParams:
    """Arguments of the regularized integral: weight mu, width t, argument z.

    mu = 0 degenerates to a pure Gaussian integral and is admitted for the
    normalization self-test; negative mu diverges and is rejected.
    """

    mu: float
    t: float
    z: complex

    def __post_init__(self):
        if not (np.isfinite(self.mu) and self.mu >= 0.0):
            raise DomainError(f"mu must be nonnegative, got {self.mu}")
        if not (np.isfinite(self.t) and self.t > 0.0):
            raise DomainError(f"t must be positive, got {self.t}")
        z = complex(self.z)
        if not (np.isfinite(z.real) and np.isfinite(z.imag)):
            raise DomainError("z must be finite")
        object.__setattr__(self, "z", z)


def _log_peak_window(mu: float, t: float, a: float) -> tuple[float, float, float, float]:
    """Peak location/value of phi and a window where it has dropped by 45.

    Returns (x_star, phi_star, lo, hi).  45 nats below the peak leaves
    relative tails under 1e-15 once |phi'| >= 1 at the cuts.
    """
    def phi(x):
        return -mu * math.exp(min(x, 700.0)) + a * x - x * x / (2.0 * t)

    def dphi(x):
        return -mu * math.exp(min(x, 700.0)) + a - x / t

    if mu == 0.0:
        x_star = a * t
    else:
        lo, hi = -1.0, 1.0
        while dphi(lo) <= 0.0:
            lo = 2.0 * lo - 1.0
        while dphi(hi) >= 0.0:
            hi = 2.0 * hi + 1.0
        x_star = brentq(dphi, lo, hi, xtol=1e-12)
    phi_star = phi(x_star)
    drop = 45.0
    step = max(1.0, math.sqrt(2.0 * drop * t))
    hi = x_star + step
    while phi_star - phi(hi) < drop or abs(dphi(hi)) < 1.0:
        hi += step
    lo = x_star - step
    while phi_star - phi(lo) < drop or abs(dphi(lo)) < 1.0:
        lo -= step
    return x_star, phi_star, lo, hi


def _reg_integral(p: RegGammaParams, moment: int) -> complex:
    """int x^moment exp(-mu e^x + z x - x^2/2t) dx with scaled quadrature."""
    a, b = p.z.real, p.z.imag
    x_star, phi_star, lo, hi = _log_peak_window(p.mu, p.t, a)

    def f(x, part):
        val = cmath.exp(-p.mu * math.exp(min(x, 700.0)) + p.z * x
                        - x * x / (2.0 * p.t) - phi_star) * x ** moment
        return val.real if part == 0 else val.imag

    pieces = [0.0, 0.0]
    errs = [0.0, 0.0]
    # z real makes the integrand real; skip the vanishing imaginary part
    parts = (0,) if b == 0.0 else (0, 1)
    for part in parts:
        pieces[part], errs[part] = _quad(f, lo, hi, args=(part,), limit=400,
                                         epsabs=1e-12, epsrel=1e-10)
    val = (pieces[0] + 1j * pieces[1]) * cmath.exp(phi_star)
    err = (errs[0] + errs[1]) * math.exp(phi_star)
    scale = abs(val) + math.exp(phi_star) * math.sqrt(2.0 * math.pi * p.t)
    if not (np.isfinite(val.real) and np.isfinite(val.imag)) or err > 1e-9 * scale:
        raise AccuracyError(
            f"quadrature tolerance not reached (abs error {err:.3g})",
            achieved=err)
    return val


def gamma_reg(p: RegGammaParams) -> complex:
    """The regularized Gamma integral at (mu, t, z)."""
    return _reg_integral(p, 0)


def gamma_reg_prime(p: RegGammaParams) -> complex:
    """d/dz of gamma_reg, by differentiating under the integral (factor x)."""
    return _reg_integral(p, 1)


def check_recurrence(p: RegGammaParams) -> float:
    """Relative residual of mu G(z+1) = z G(z) - (1/t) G'(z)."""
    g = gamma_reg(p)
    g1 = gamma_reg(RegGammaParams(mu=p.mu, t=p.t, z=p.z + 1.0))
    gp = gamma_reg_prime(p)
    return abs(p.mu * g1 - p.z * g + gp / p.t) / abs(g)


def check_large_t_limit(z: complex, mu: float,
                        ts=(1e2, 1e3, 1e4)) -> dict:
    """Convergence of Gamma_{mu,t}(z+1) as t grows, against the limit oracle.

    The oracle is the substitution value L = mu^{-(z+1)} Gamma(z+1); the
    alternative printed value mu^{-z} Gamma(z) is reported alongside (the
    two coincide at mu = 1, z = 1).  Reports per-t values, errors against
    L, whether the error shrinks monotonically, and whether the final
    error is within 1e-2.
    """
    z = complex(z)
    if (z + 1.0).real <= 0.0:
        raise DomainError("limit integral diverges unless Re(z + 1) > 0")
    if mu <= 0.0:
        raise DomainError(f"limit needs mu > 0, got {mu}")
    oracle = mu ** (-(z + 1.0)) * gamma_classical(z + 1.0)
    try:
        printed = mu ** (-z) * gamma_classical(z)
    except DomainError:
        printed = None
    values = [gamma_reg(RegGammaParams(mu=mu, t=float(t), z=z + 1.0)) for t in ts]
    errors = [abs(v - oracle) for v in values]
    monotone = all(errors[i + 1] < errors[i] for i in range(len(errors) - 1))
    rates = [math.log(errors[i] / errors[i + 1]) / math.log(ts[i + 1] / ts[i])
             for i in range(len(errors) - 1)
             if errors[i + 1] > 0.0 and errors[i] > 0.0]
    return {
        "ts": [float(t) for t in ts],
        "values": values,
        "oracle": oracle,
        "printed_alternative": printed,
        "errors": errors,
        "monotone": bool(monotone),
        "rates": rates,
        "converged": bool(errors[-1] <= 1e-2),
    }


def laplace_kernel_value(w: float) -> complex:
    """(1/2pi) int e^{i w eta} e^{-e^eta} d eta, equal to Gamma(iw)/(2pi).

    The printed integral only converges after splitting off the
    non-decaying eta -> -infinity part: with s = e^eta,

      int_0^1 (e^{-s} - 1) s^{iw-1} ds + 1/(iw) + int_1^inf e^{-s} s^{iw-1} ds,

    both remaining integrals absolutely convergent.  The lower piece is
    integrated back in the eta variable where the oscillation has a
    uniform frequency.
    """
    w = float(w)
    if w == 0.0:
        raise DomainError("kernel value has a pole at w = 0")

    def lower(r, part):
        # s = e^{-r}: (e^{-s} - 1) s^{iw-1} ds = (e^{-e^{-r}} - 1) e^{-iwr} dr
        val = (math.exp(-math.exp(-r)) - 1.0) * cmath.exp(-1j * w * r)
        return val.real if part == 0 else val.imag

    def upper(s, part):
        val = math.exp(-s) * cmath.exp((1j * w - 1.0) * math.log(s))
        return val.real if part == 0 else val.imag

    total = 1.0 / (1j * w)
    for fn, a, b in ((lower, 0.0, 36.0), (upper, 1.0, np.inf)):
        re, ere = _quad(fn, a, b, args=(0,), limit=400, epsabs=1e-13)
        im, eim = _quad(fn, a, b, args=(1,), limit=400, epsabs=1e-13)
        # quad's estimate is pessimistic by orders of magnitude here; the
        # gate only catches genuine breakdown
        if ere + eim > 1e-7:
            raise AccuracyError(
                f"oscillatory quadrature error {ere + eim:.3g} too large",
                achieved=ere + eim)
        total += re + 1j * im
    return total / (2.0 * math.pi)
