"""Deterministic Monte Carlo over path space and measure-level checks.

The engine evaluates functionals over paths produced by the counter based
sampler in core.  Work is split into the sampler's fixed chunks; each chunk
is reduced with numpy's pairwise summation and the per-chunk partials are
combined in chunk order with compensated (Kahan) addition.  The result is
bit identical for any worker count, which the report files rely on.

Statistical identity checks share two conventions:

* paired estimators: both sides of an identity are evaluated on the same
  sampled paths (common random numbers), and the gate is applied to the
  pathwise difference, |mean| <= 3 * stderr (+ a stated deterministic
  slack when a quadrature enters);
* a failed gate is retried once at four times the sample count before the
  check is reported as failed.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (CHUNK, TWO_PI, Grid, MeasureConfig, Path, SmoothLoop,
                   bridge_mass, bridge_values_chunk, cm_log_weight_values,
                   free_values_chunk, path_log_density, quad, shifted_path,
                   cm_weight, _check_seed)
from .errors import EvaluationError, UsageError

Sampler = "free | ('bridge', X)"


@dataclass(frozen=True)
class MCEstimate:
    """Mean, standard error, sample count and seed of one estimator."""

    mean: complex
    stderr: float
    n: int
    seed: int


@dataclass(frozen=True)
class Functional:
    """A functional of (path values, x0), vectorized over leading axes.

    `fn(values, x0)` receives node values shaped (..., m+1) and the real
    auxiliary coordinate x0, and must return complex values shaped (...).
    Flags record whether the functional is uniformly bounded and whether
    directional derivatives may be taken through it.
    """

    fn: Callable[[np.ndarray, float], np.ndarray]
    bounded: bool = False
    differentiable: bool = False

    def evaluate(self, values: np.ndarray, x0: float = 0.0) -> np.ndarray:
        return np.asarray(self.fn(values, x0))

    def __call__(self, path: Path, x0: float = 0.0) -> complex:
        return complex(np.asarray(self.fn(path.values[None, :], x0)).reshape(-1)[0])


def constant_functional(c: complex) -> Functional:
    c = complex(c)
    return Functional(fn=lambda values, x0: np.full(values.shape[:-1], c, dtype=complex),
                      bounded=True, differentiable=True)


def exp_pairing_functional(eta, grid: Grid) -> Functional:
    """f(x) = exp(int eta(u) x(u) du), the exponential of the trapezoid pairing."""
    eta = np.asarray(eta.values if isinstance(eta, SmoothLoop) else eta)
    if eta.shape != (grid.m + 1,):
        raise UsageError(f"profile needs {grid.m + 1} samples, got {eta.shape}")
    w = grid.trap_weights * eta

    def fn(values, x0):
        return np.exp(values @ w.astype(complex))

    return Functional(fn=fn, bounded=bool(np.all(eta.real == 0.0)), differentiable=True)


def node_value_functional(grid: Grid, u: float) -> Functional:
    """f(x) = x(u) for a grid node u."""
    j = int(round(u / grid.du))
    if not (0 <= j <= grid.m) or abs(grid.nodes[j] - u) > 1e-9:
        raise UsageError(f"u = {u} is not a grid node")
    return Functional(fn=lambda values, x0: values[..., j].astype(complex),
                      bounded=False, differentiable=True)


def with_x0_profile(base: Functional, phi: Callable[[float], complex]) -> Functional:
    """Product functional f(x, x0) = base(x) * phi(x0)."""
    return Functional(fn=lambda values, x0: base.fn(values, x0) * phi(x0),
                      bounded=base.bounded, differentiable=base.differentiable)


# ---------------------------------------------------------------------------
# engine

def worker_count(workers: int | None = None) -> int:
    """Explicit worker count, else the LOOPGAMMA_THREADS override, else 1."""
    if workers is None:
        raw = os.environ.get("LOOPGAMMA_THREADS", "1")
        try:
            workers = int(raw)
        except ValueError:
            raise UsageError(f"LOOPGAMMA_THREADS must be an integer, got {raw!r}")
    if workers < 1:
        raise UsageError(f"worker count must be at least 1, got {workers}")
    return int(workers)


def _chunk_values_fn(sampler, grid: Grid, cfg: MeasureConfig, seed: int):
    if sampler == "free":
        return lambda c, rows: free_values_chunk(grid, cfg, seed, c, rows)
    if (isinstance(sampler, tuple) and len(sampler) == 2 and sampler[0] == "bridge"
            and np.isfinite(sampler[1])):
        X = float(sampler[1])
        return lambda c, rows: bridge_values_chunk(grid, cfg, X, seed, c, rows)
    raise UsageError(f"sampler must be 'free' or ('bridge', X), got {sampler!r}")


def _kahan_total(parts: Sequence[float]) -> float:
    total = 0.0
    comp = 0.0
    for p in parts:
        y = p - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def _locate_failure(eval_block, block: np.ndarray, base_index: int,
                    err: BaseException):
    for j in range(block.shape[0]):
        try:
            eval_block(block[j:j + 1])
        except Exception as single:
            raise EvaluationError(base_index + j, single) from err
    raise EvaluationError(base_index, err) from err


def mc_run(eval_block, sampler, grid: Grid, cfg: MeasureConfig, N: int,
           seed: int, workers: int | None = None) -> list[MCEstimate]:
    """Estimate the expectations of the rows returned by eval_block.

    eval_block(values) maps a block of paths (rows, m+1) to a complex array
    (k, rows); the result is one MCEstimate per row, reduced
    deterministically regardless of worker count.
    """
    seed = _check_seed(seed)
    if N < 1:
        raise UsageError(f"sample count must be positive, got {N}")
    chunk_values = _chunk_values_fn(sampler, grid, cfg, seed)
    nchunks = (N + CHUNK - 1) // CHUNK

    def work(c: int):
        rows = min(CHUNK, N - c * CHUNK)
        block = chunk_values(c, rows)
        try:
            vals = np.asarray(eval_block(block))
        except Exception as err:
            _locate_failure(eval_block, block, c * CHUNK, err)
        if vals.ndim == 1:
            vals = vals[None, :]
        if vals.shape[-1] != rows:
            raise UsageError(
                f"integrand returned {vals.shape[-1]} values for {rows} paths")
        vals = vals.astype(complex, copy=False)
        sums = vals.sum(axis=-1)
        sqs = (vals.real ** 2 + vals.imag ** 2).sum(axis=-1)
        return sums, sqs

    nworkers = worker_count(workers)
    if nworkers == 1 or nchunks == 1:
        partials = [work(c) for c in range(nchunks)]
    else:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            partials = list(pool.map(work, range(nchunks)))

    k = partials[0][0].shape[0]
    out = []
    for i in range(k):
        re = _kahan_total([p[0][i].real for p in partials])
        im = _kahan_total([p[0][i].imag for p in partials])
        sq = _kahan_total([p[1][i] for p in partials])
        mean = complex(re / N, im / N)
        if N > 1:
            var = max(sq - N * (mean.real ** 2 + mean.imag ** 2), 0.0) / (N - 1)
        else:
            var = 0.0
        out.append(MCEstimate(mean=mean, stderr=float(np.sqrt(var / N)),
                              n=N, seed=seed))
    return out


def expect(f: Functional, sampler, grid: Grid, cfg: MeasureConfig, N: int,
           seed: int, x0: float = 0.0, workers: int | None = None) -> MCEstimate:
    """Monte Carlo expectation of f under the chosen path law.

    Free sampling integrates against the unit-mass walk law; bridge
    sampling is probability normalized (multiply by bridge_mass for the
    measure-weighted value).
    """
    return mc_run(lambda block: f.fn(block, x0)[None, :], sampler, grid, cfg,
                  N, seed, workers)[0]


# ---------------------------------------------------------------------------
# closed-form Gaussian moments

def gaussian_moment_oracle(eta, kind: str, grid: Grid, cfg: MeasureConfig,
                           X: float = 0.0) -> complex:
    """Closed form of E[exp(int eta(u) x(u) du)] for the sampled Gaussian laws.

    Uses the same trapezoid pairing as the estimators and the exact discrete
    covariance of the sampler (t*min(s,u) free, t*(min(s,u) - s*u/(2*pi))
    pinned), so Monte Carlo estimates match it with no discretization bias.
    """
    eta = np.asarray(eta.values if isinstance(eta, SmoothLoop) else eta)
    if eta.shape != (grid.m + 1,):
        raise UsageError(f"profile needs {grid.m + 1} samples, got {eta.shape}")
    u = grid.nodes
    w = grid.trap_weights
    cov = np.minimum.outer(u, u)
    mean_term = 0.0 + 0.0j
    if kind == "bridge":
        cov = cov - np.outer(u, u) / TWO_PI
        mean_term = np.sum(w * eta * (u / TWO_PI) * X)
    elif kind != "free":
        raise UsageError(f"kind must be 'free' or 'bridge', got {kind!r}")
    weta = w * eta
    qform = weta @ (cfg.t * cov) @ weta
    return complex(np.exp(mean_term + 0.5 * qform))


# ---------------------------------------------------------------------------
# reports and gates

@dataclass(frozen=True)
class CheckReport:
    """Outcome of one identity check: both sides, error scale, verdict."""

    check: str
    lhs: complex
    rhs: complex
    stderr: float
    passed: bool
    n: int = 0
    seed: int = 0
    details: dict = field(default_factory=dict)


def _paired_gate(diff: MCEstimate, slack: float = 0.0) -> bool:
    return abs(diff.mean) <= 3.0 * diff.stderr + slack


def _run_with_rerun(run, N: int, slack: float):
    lhs, rhs, diff = run(N)
    if _paired_gate(diff, slack):
        return lhs, rhs, diff, True, N
    lhs, rhs, diff = run(4 * N)
    return lhs, rhs, diff, _paired_gate(diff, slack), 4 * N


def check_translation(f: Functional, y: SmoothLoop, sampler, grid: Grid,
                      cfg: MeasureConfig, N: int, seed: int,
                      workers: int | None = None, x0: float = 0.0) -> CheckReport:
    """Shift invariance of the path law under x -> x + y with its weight.

    Free law: E[f(x)] vs E[f(x + y) w(y, x)] on common paths.  Pinned law:
    the measure-weighted expectation at endpoint X + y(2*pi) vs the weighted
    shifted integrand at endpoint X, again on common underlying normals.
    Gate: |paired difference| <= 3 * stderr, one retry at 4N.
    """
    if y.values[0] != 0.0:
        raise UsageError("translation shifts must vanish at u = 0")
    ratio = grid.nodes / TWO_PI
    if sampler == "free":
        def eval_block(block):
            lhs = f.fn(block, x0)
            w = np.exp(cm_log_weight_values(y.values, block, grid, cfg))
            rhs = f.fn(block + y.values, x0) * w
            return np.stack([lhs, rhs, lhs - rhs])
        label = "translation-free"
    else:
        _ = _chunk_values_fn(sampler, grid, cfg, 0)  # validate shape of sampler
        X = float(sampler[1])
        Y = float(y.values[-1])
        mass_to = bridge_mass(X + Y, cfg)
        mass_from = bridge_mass(X, cfg)

        def eval_block(block):
            # bridge at X + Y from the same normals is block + (u/2pi) * Y
            lhs = mass_to * f.fn(block + ratio * Y, x0)
            w = np.exp(cm_log_weight_values(y.values, block, grid, cfg))
            rhs = mass_from * f.fn(block + y.values, x0) * w
            return np.stack([lhs, rhs, lhs - rhs])
        label = "translation-bridge"

    def run(n):
        ests = mc_run(eval_block, sampler, grid, cfg, n, seed, workers)
        return ests[0], ests[1], ests[2]

    lhs, rhs, diff, passed, n_used = _run_with_rerun(run, N, 0.0)
    return CheckReport(check=label, lhs=lhs.mean, rhs=rhs.mean,
                       stderr=diff.stderr, passed=passed, n=n_used, seed=seed,
                       details={"diff": diff.mean,
                                "lhs_stderr": lhs.stderr,
                                "rhs_stderr": rhs.stderr})


def check_translation_exact(path: Path, y: SmoothLoop, cfg: MeasureConfig) -> float:
    """Residual of log p(x) - log p(x+y) + log w(y, x); identically 0.

    The increment-slope representation of y' makes this an algebraic
    identity of the discrete model, so the residual is pure roundoff.
    """
    shifted = shifted_path(path, y)
    return float(path_log_density(path, cfg) - path_log_density(shifted, cfg)
                 + np.log(cm_weight(y, path, cfg)))


def check_direct_integral(f: Functional, grid: Grid, cfg: MeasureConfig,
                          N: int, seed: int, x_nodes: int = 61,
                          workers: int | None = None, x0: float = 0.0,
                          quad_slack: float = 1e-6) -> CheckReport:
    """Free expectation vs endpoint quadrature of pinned expectations.

    The free law disintegrates over the endpoint: E_free[f] equals the
    integral over X of bridge_mass(X) times the pinned expectation at X.
    The X integral is a trapezoid over |X| <= 6*sqrt(2*pi*t) (tail mass
    below 1e-8); all pinned laws reuse the free normals, so the gate runs
    on the pathwise difference plus the stated quadrature slack.
    """
    if x_nodes < 5:
        raise UsageError(f"need at least 5 endpoint nodes, got {x_nodes}")
    sigma = np.sqrt(TWO_PI * cfg.t)
    xs = np.linspace(-6.0 * sigma, 6.0 * sigma, int(x_nodes))
    wq = np.full(xs.shape, xs[1] - xs[0])
    wq[0] = wq[-1] = 0.5 * (xs[1] - xs[0])
    masses = np.array([bridge_mass(X, cfg) for X in xs])
    ratio = grid.nodes / TWO_PI

    def eval_block(block):
        lhs = f.fn(block, x0)
        end = block[:, -1:]
        rhs = np.zeros(block.shape[0], dtype=complex)
        for X, w, mass in zip(xs, wq, masses):
            pinned = block - ratio * (end - X)
            pinned[:, -1] = X
            rhs = rhs + (w * mass) * f.fn(pinned, x0)
        return np.stack([lhs, rhs, lhs - rhs])

    def run(n):
        ests = mc_run(eval_block, "free", grid, cfg, n, seed, workers)
        return ests[0], ests[1], ests[2]

    lhs, rhs, diff, passed, n_used = _run_with_rerun(run, N, quad_slack)
    return CheckReport(check="direct-integral", lhs=lhs.mean, rhs=rhs.mean,
                       stderr=diff.stderr, passed=passed, n=n_used, seed=seed,
                       details={"diff": diff.mean, "x_nodes": int(x_nodes),
                                "quad_slack": quad_slack})
