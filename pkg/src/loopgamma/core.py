"""Circle grids, Gaussian path measures, and translation weights.

Conventions fixed here and used by every other module:

* the parameter interval is [0, 2*pi], discretized by m+1 equally spaced
  nodes u_k = 2*pi*k/m with spacing du = 2*pi/m;
* a free path is the random walk x_0 = 0, x_k = x_{k-1} + sqrt(t*du)*xi_k
  with iid standard normal xi_k; increments have variance t*du, so the
  endpoint x(2*pi) is N(0, 2*pi*t) and Cov(x(s), x(u)) = t*min(s, u);
* the transition kernel matching that walk is
  heat_kernel(x, s, t) = exp(-x**2/(2*t*s)) / sqrt(2*pi*t*s);
* a pinned path (bridge) with endpoint X subtracts the linear endpoint
  correction (u/(2*pi))*(x(2*pi) - X) from a free path.  For Gaussian
  increments this is exactly the conditional law given x(2*pi) = X, with
  covariance t*(min(s,u) - s*u/(2*pi));
* du-integrals are trapezoid sums (quad); dx-integrals against a path are
  left endpoint sums over increments (stieltjes);
* in translation weights the derivative of a shift y is represented by its
  increment slopes diff(y)/du.  With that representation the discrete
  density identity log p(x) - log p(x+y) + log cm_weight(y, x) == 0 holds
  to machine precision, not merely in the continuum limit.

Sampling is counter based: path number `index` under a given seed is a
fixed function of (seed, index) alone.  Paths are produced in chunks of
CHUNK consecutive indices, each chunk drawn from its own Philox stream
(stream c starts at counter c * 2**192), so parallel evaluation cannot
reorder draws and results are identical for any worker count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, UsageError

TWO_PI = 2.0 * np.pi

# Fixed chunk width of the deterministic sampler.  Changing it changes which
# normals belong to which path, so it is part of the reproducibility contract.
CHUNK = 1024


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform nodes u_k = 2*pi*k/m, k = 0..m."""

    m: int
    nodes: np.ndarray
    du: float

    @property
    def trap_weights(self) -> np.ndarray:
        w = np.full(self.m + 1, self.du)
        w[0] = w[-1] = 0.5 * self.du
        return w


def make_grid(m: int) -> Grid:
    """Build the uniform circle grid with m intervals (m >= 2)."""
    if not isinstance(m, (int, np.integer)) or isinstance(m, bool):
        raise UsageError(f"grid size must be an integer, got {m!r}")
    if m < 2:
        raise UsageError(f"grid size must be at least 2, got {m}")
    nodes = np.linspace(0.0, TWO_PI, int(m) + 1)
    return Grid(m=int(m), nodes=_readonly(nodes), du=TWO_PI / int(m))


@dataclass(frozen=True)
class MeasureConfig:
    """Variance scale t of the path measure (increments are N(0, t*du))."""

    t: float

    def __post_init__(self):
        if not np.isfinite(self.t) or self.t <= 0.0:
            raise DomainError(f"measure scale t must be finite and positive, got {self.t}")


@dataclass(frozen=True, eq=False)
class Path:
    """A sampled path: values at the grid nodes, starting at 0."""

    grid: Grid
    values: np.ndarray
    kind: str = "free"  # "free" or "bridge"
    endpoint: float | None = None  # pinned endpoint when kind == "bridge"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.m + 1,):
            raise UsageError(
                f"path needs {self.grid.m + 1} node values, got shape {v.shape}"
            )
        if v[0] != 0.0:
            raise UsageError(f"paths start at 0, got x(0) = {v[0]}")
        if self.kind not in ("free", "bridge"):
            raise UsageError(f"unknown path kind {self.kind!r}")
        object.__setattr__(self, "values", _readonly(v))


def _fd_derivative(values: np.ndarray, du: float) -> np.ndarray:
    # second order finite differences, one sided at the ends
    return np.gradient(values, du, edge_order=2)


@dataclass(frozen=True, eq=False)
class SmoothLoop:
    """Deterministic profile on the grid with derivative samples.

    Used for group directions alpha, multipliers b, translation shifts y,
    and pairing profiles eta.  `d1` (and optionally `d2`) hold derivative
    samples at the nodes; when not supplied they are filled by second order
    finite differences, which is enough for statistical checks but not for
    the exact algebraic ones, so analytic derivatives are preferred.
    """

    grid: Grid
    values: np.ndarray
    d1: np.ndarray
    d2: np.ndarray | None = None

    def __post_init__(self):
        n = self.grid.m + 1
        v = np.asarray(self.values)
        d1 = np.asarray(self.d1)
        if v.shape != (n,) or d1.shape != (n,):
            raise UsageError(f"profile needs {n} samples, got {v.shape} and {d1.shape}")
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(d1))):
            raise UsageError("profile samples must be finite")
        object.__setattr__(self, "values", _readonly(v))
        object.__setattr__(self, "d1", _readonly(d1))
        if self.d2 is not None:
            d2 = np.asarray(self.d2)
            if d2.shape != (n,):
                raise UsageError(f"second derivative needs {n} samples, got {d2.shape}")
            object.__setattr__(self, "d2", _readonly(d2))

    @classmethod
    def from_samples(cls, grid: Grid, values, d1=None, d2=None) -> "SmoothLoop":
        values = np.asarray(values, dtype=float)
        if d1 is None:
            d1 = _fd_derivative(values, grid.du)
        return cls(grid=grid, values=values, d1=np.asarray(d1, dtype=float),
                   d2=None if d2 is None else np.asarray(d2, dtype=float))

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable, d1: Callable | None = None,
                      d2: Callable | None = None) -> "SmoothLoop":
        u = grid.nodes
        values = np.asarray(fn(u), dtype=float) + np.zeros_like(u)
        d1v = _fd_derivative(values, grid.du) if d1 is None else np.asarray(d1(u), dtype=float) + np.zeros_like(u)
        d2v = None if d2 is None else np.asarray(d2(u), dtype=float) + np.zeros_like(u)
        return cls(grid=grid, values=values, d1=d1v, d2=d2v)

    @property
    def is_loop(self) -> bool:
        scale = 1.0 + float(np.max(np.abs(self.values)))
        return abs(float(self.values[0] - self.values[-1])) <= 1e-9 * scale

    @property
    def is_cameron_martin(self) -> bool:
        return self.values[0] == 0.0

    def based(self) -> np.ndarray:
        """Samples of the profile minus its value at u = 0."""
        return self.values - self.values[0]

    def scaled(self, c: float) -> "SmoothLoop":
        """The profile c * this, derivatives scaled along."""
        return SmoothLoop(grid=self.grid, values=c * self.values,
                          d1=c * self.d1,
                          d2=None if self.d2 is None else c * self.d2)


def zero_loop(grid: Grid) -> SmoothLoop:
    z = np.zeros(grid.m + 1)
    return SmoothLoop(grid=grid, values=z, d1=z.copy(), d2=z.copy())


def heat_kernel(x, s: float, t: float):
    """Transition density of the walk: N(0, t*s) density at x."""
    if s <= 0.0 or t <= 0.0:
        raise UsageError(f"heat kernel needs s > 0 and t > 0, got s={s}, t={t}")
    x = np.asarray(x, dtype=float)
    out = np.exp(-(x * x) / (2.0 * t * s)) / np.sqrt(TWO_PI * t * s)
    return out if out.ndim else float(out)


def bridge_mass(X: float, cfg: MeasureConfig) -> float:
    """Total mass of the measure pinned at x(2*pi) = X: heat_kernel(X, 2*pi, t)."""
    return float(heat_kernel(X, TWO_PI, cfg.t))


def quad(values, grid: Grid):
    """Trapezoid du-integral over [0, 2*pi]; exact for affine integrands.

    Accepts batched samples (..., m+1) and integrates the last axis.
    """
    values = np.asarray(values)
    if values.shape[-1] != grid.m + 1:
        raise UsageError(
            f"integrand has {values.shape[-1]} samples, grid has {grid.m + 1} nodes"
        )
    out = np.trapezoid(values, dx=grid.du, axis=-1)
    return out if np.ndim(out) else out.item()


def stieltjes(d1, path: Path) -> float:
    """Left endpoint sum of derivative samples against path increments.

    Computes sum_k d1[k-1] * (x_k - x_{k-1}), the Ito-style reading of
    the integral of y' dx on the grid.
    """
    d1 = np.asarray(d1.d1 if isinstance(d1, SmoothLoop) else d1)
    if d1.shape[-1] != path.grid.m + 1:
        raise UsageError(
            f"derivative samples have {d1.shape[-1]} nodes, grid has {path.grid.m + 1}"
        )
    out = np.sum(d1[..., :-1] * np.diff(path.values), axis=-1)
    return out if np.ndim(out) else out.item()


def increment_slopes(values, du: float) -> np.ndarray:
    """Per-interval slopes diff(values)/du, the exact discrete derivative."""
    return np.diff(np.asarray(values), axis=-1) / du


def cm_log_weight_values(y_values: np.ndarray, path_values: np.ndarray,
                         grid: Grid, cfg: MeasureConfig):
    """log of the translation weight, batched over leading path axes.

    The shift derivative is taken as increment slopes of y, which makes
    log p(x) - log p(x+y) + (this value) vanish identically in the
    discrete Gaussian model.
    """
    s = increment_slopes(y_values, grid.du)
    dx = np.diff(np.asarray(path_values), axis=-1)
    a = np.sum(s * dx, axis=-1)
    b = np.sum(s * s, axis=-1) * grid.du
    return -(a / cfg.t) - b / (2.0 * cfg.t)


def cm_weight(y: SmoothLoop, path: Path, cfg: MeasureConfig) -> float:
    """Translation weight exp(-(1/t) int y'dx - (1/(2t)) int y'^2 du).

    Requires y(0) = 0 so that translated paths still start at 0.
    """
    if y.values[0] != 0.0:
        raise UsageError(f"translation shifts must vanish at u = 0, got {y.values[0]}")
    return float(np.exp(cm_log_weight_values(y.values, path.values, path.grid, cfg)))


def path_log_density(path: Path, cfg: MeasureConfig) -> float:
    """Log density of the increment vector under the free walk law."""
    du = path.grid.du
    dx = np.diff(path.values)
    m = path.grid.m
    return float(-np.sum(dx * dx) / (2.0 * cfg.t * du)
                 - 0.5 * m * np.log(TWO_PI * cfg.t * du))


def shifted_path(path: Path, y: SmoothLoop) -> Path:
    """The path x + y (y(0) = 0), keeping grid metadata."""
    if y.values[0] != 0.0:
        raise UsageError("shift must vanish at u = 0")
    vals = path.values + y.values
    if path.kind == "bridge":
        return Path(grid=path.grid, values=vals, kind="bridge",
                    endpoint=float(vals[-1]))
    return Path(grid=path.grid, values=vals, kind="free")


# ---------------------------------------------------------------------------
# counter based sampling


def _check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise UsageError(f"seed must be an integer, got {seed!r}")
    if not (0 <= int(seed) < 2 ** 64):
        raise UsageError(f"seed must fit in an unsigned 64 bit word, got {seed}")
    return int(seed)


def _normal_chunk(seed: int, chunk_index: int, rows: int, m: int) -> np.ndarray:
    """Standard normals for chunk `chunk_index`: rows x m, prefix stable."""
    key = np.array([np.uint64(seed), np.uint64(0)], dtype=np.uint64)
    counter = np.array([0, 0, 0, np.uint64(chunk_index)], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key, counter=counter))
    return gen.standard_normal((rows, m))


def free_values_chunk(grid: Grid, cfg: MeasureConfig, seed: int,
                      chunk_index: int, rows: int) -> np.ndarray:
    """Node values of free paths with indices chunk_index*CHUNK .. +rows-1."""
    step = np.sqrt(cfg.t * grid.du)
    incr = step * _normal_chunk(seed, chunk_index, rows, grid.m)
    vals = np.empty((rows, grid.m + 1))
    vals[:, 0] = 0.0
    np.cumsum(incr, axis=1, out=vals[:, 1:])
    return vals


def bridge_values_chunk(grid: Grid, cfg: MeasureConfig, X: float, seed: int,
                        chunk_index: int, rows: int) -> np.ndarray:
    """Pinned-path values built from the same normals as the free chunk."""
    vals = free_values_chunk(grid, cfg, seed, chunk_index, rows)
    ratio = grid.nodes / TWO_PI
    vals -= ratio * (vals[:, -1:] - X)
    vals[:, -1] = X
    return vals


def sample_wiener(grid: Grid, cfg: MeasureConfig, seed: int, index: int = 0) -> Path:
    """Free path number `index` under `seed`; same arguments, same bits."""
    seed = _check_seed(seed)
    if index < 0:
        raise UsageError(f"sample index must be nonnegative, got {index}")
    chunk, row = divmod(int(index), CHUNK)
    vals = free_values_chunk(grid, cfg, seed, chunk, row + 1)[row]
    return Path(grid=grid, values=vals, kind="free")


def sample_bridge(grid: Grid, cfg: MeasureConfig, X: float, seed: int,
                  index: int = 0) -> Path:
    """Pinned path number `index`: free path minus linear endpoint correction."""
    seed = _check_seed(seed)
    if index < 0:
        raise UsageError(f"sample index must be nonnegative, got {index}")
    if not np.isfinite(X):
        raise UsageError(f"endpoint must be finite, got {X}")
    chunk, row = divmod(int(index), CHUNK)
    vals = bridge_values_chunk(grid, cfg, float(X), seed, chunk, row + 1)[row]
    return Path(grid=grid, values=vals, kind="bridge", endpoint=float(X))


# ---------------------------------------------------------------------------
# serialization

def path_to_json(path: Path, cfg: MeasureConfig) -> dict:
    return {"grid_m": path.grid.m, "t": cfg.t, "values": path.values.tolist()}


def path_from_json(data: dict) -> tuple[Path, MeasureConfig]:
    grid = make_grid(int(data["grid_m"]))
    cfg = MeasureConfig(t=float(data["t"]))
    values = np.asarray(data["values"], dtype=float)
    kind = data.get("kind", "free")
    endpoint = float(values[-1]) if kind == "bridge" else None
    return Path(grid=grid, values=values, kind=kind, endpoint=endpoint), cfg


def loop_to_json(loop: SmoothLoop) -> dict:
    out = {"grid_m": loop.grid.m, "values": loop.values.tolist(),
           "d1": loop.d1.tolist()}
    if loop.d2 is not None:
        out["d2"] = loop.d2.tolist()
    return out


def loop_from_json(data: dict) -> SmoothLoop:
    grid = make_grid(int(data["grid_m"]))
    d2 = data.get("d2")
    return SmoothLoop(grid=grid,
                      values=np.asarray(data["values"], dtype=float),
                      d1=np.asarray(data["d1"], dtype=float),
                      d2=None if d2 is None else np.asarray(d2, dtype=float))
