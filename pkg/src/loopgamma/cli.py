"""Command line front end: JSON config in, deterministic artifacts out.

Every subcommand resolves a RunConfig (defaults, then --config file, then
flag and key=value overrides), validates it against a schema, runs the
named computation, and writes <name>.json/.csv/.dat into the output
directory.  Reports carry no timestamps or host state, so a fixed config
and seed produce byte-identical artifacts regardless of worker count.

Exit codes: 0 success, 1 a numeric or statistical gate failed, 2 the
request itself was unusable (bad config, domain violation).

Loop-valued inputs are trigonometric profile specs:
    {"const": c, "cos": [a1, a2, ...], "sin": [b1, ...], "ramp": r}
meaning c + sum a_j cos(ju) + sum b_j sin(ju) + r u/(2pi), with exact
derivative samples.  Complex profiles pair two of these as {"re":, "im":}.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import jsonschema
import numpy as np

from .core import (Grid, MeasureConfig, SmoothLoop, make_grid, sample_bridge,
                   sample_wiener)
from .errors import (AccuracyError, DomainError, EvaluationError,
                     LoopGammaError, UsageError)
from .gammaloop import (ComplexLoopArgument, MuWeight, TestFunction,
                        check_functional_equation, check_kernel_reduction,
                        hat_gamma, hat_gamma_delta_shift, kernel_K,
                        variational_derivative)
from .gammareg import (RegGammaParams, check_large_t_limit, check_recurrence,
                       gamma_reg, gamma_reg_prime)
from .montecarlo import (Functional, check_direct_integral, check_translation,
                         exp_pairing_functional, with_x0_profile)
from .repops import (GroupElement, RepContext, check_commutators,
                     check_homomorphism, check_intertwiner, check_unitarity,
                     cocycle, multiply)
from .reports import estimate_row, to_jsonable, write_artifacts
from .transforms import (LineFunction, check_prop22, check_theorem52,
                         fourier_wiener_check)

# ---------------------------------------------------------------------------
# input builders

def _profile_parts(spec, grid: Grid):
    """values, d1, d2 sample arrays of a trigonometric profile spec."""
    u = grid.nodes
    if isinstance(spec, (int, float)):
        spec = {"const": float(spec)}
    vals = np.full(grid.m + 1, float(spec.get("const", 0.0)))
    d1 = np.zeros(grid.m + 1)
    d2 = np.zeros(grid.m + 1)
    for j, c in enumerate(spec.get("cos", []), start=1):
        vals += c * np.cos(j * u)
        d1 += -c * j * np.sin(j * u)
        d2 += -c * j * j * np.cos(j * u)
    for j, c in enumerate(spec.get("sin", []), start=1):
        vals += c * np.sin(j * u)
        d1 += c * j * np.cos(j * u)
        d2 += -c * j * j * np.sin(j * u)
    r = float(spec.get("ramp", 0.0))
    if r != 0.0:
        vals += r * u / (2.0 * math.pi)
        d1 += r / (2.0 * math.pi)
    return vals, d1, d2


def build_loop(spec, grid: Grid) -> SmoothLoop:
    vals, d1, d2 = _profile_parts(spec, grid)
    return SmoothLoop(grid=grid, values=vals, d1=d1, d2=d2)


def build_complex_values(spec, grid: Grid) -> np.ndarray:
    if isinstance(spec, dict) and ("re" in spec or "im" in spec):
        re, _, _ = _profile_parts(spec.get("re", 0.0), grid)
        im, _, _ = _profile_parts(spec.get("im", 0.0), grid)
        return re + 1j * im
    vals, _, _ = _profile_parts(spec, grid)
    return vals.astype(complex)


def build_scalar(spec) -> complex:
    if isinstance(spec, dict):
        return complex(float(spec.get("re", 0.0)), float(spec.get("im", 0.0)))
    return complex(spec)


def build_functional(spec, grid: Grid) -> Functional:
    eta = build_complex_values(spec.get("eta", {"im": {"cos": [1.0]}}), grid)
    f = exp_pairing_functional(eta, grid)
    freq = float(spec.get("x0_freq", 0.0))
    decay = float(spec.get("x0_decay", 0.0))
    if decay < 0.0:
        raise UsageError("x0_decay must be nonnegative")
    if freq != 0.0 or decay != 0.0:
        f = with_x0_profile(f, lambda x0: np.exp(1j * freq * x0 - decay * x0 * x0))
    return f


def build_element(spec, grid: Grid) -> GroupElement:
    return GroupElement(alpha=build_loop(spec.get("alpha", 0.0), grid),
                        b=build_loop(spec.get("b", 0.0), grid),
                        s=float(spec.get("s", 0.0)))


def build_ctx(params: dict, grid: Grid, cfg: MeasureConfig) -> RepContext:
    lam = build_scalar(params.get("lam", {"im": 1.0}))
    mode = params.get("mode", "unitary" if lam.real == 0.0 else "semigroup")
    return RepContext(grid=grid, cfg=cfg, lam=lam,
                      k=float(params.get("k", 0.0)), mode=mode)


def build_test_function(spec, grid: Grid) -> TestFunction:
    vals, d1, d2 = _profile_parts(spec, grid)
    if spec.get("const") or spec.get("cos") or spec.get("ramp"):
        raise UsageError("test functions must be pure sine profiles "
                         "(they vanish at the interval ends)")
    vals[0] = 0.0
    vals[-1] = 0.0  # sin(2 pi j) carries rounding; the zeros are exact
    return TestFunction(grid=grid, values=vals, d1=d1, d2=d2)


def _sample_path(spec, grid: Grid, cfg: MeasureConfig):
    seed = int(spec.get("seed", 0))
    index = int(spec.get("index", 0))
    if spec.get("kind", "bridge") == "free":
        return sample_wiener(grid, cfg, seed, index)
    return sample_bridge(grid, cfg, float(spec.get("X", 0.0)), seed, index)


def _sample_paths(params: dict, grid: Grid, cfg: MeasureConfig, X=0.0):
    n = int(params.get("n_paths", 3))
    seed = int(params.get("path_seed", 101))
    return [sample_bridge(grid, cfg, X, seed, index=i) for i in range(n)]


# ---------------------------------------------------------------------------
# config schema

_NUM = {"type": "number"}
_PROFILE = {"oneOf": [
    {"type": "number"},
    {"type": "object", "additionalProperties": False,
     "properties": {"const": _NUM, "ramp": _NUM,
                    "cos": {"type": "array", "items": _NUM},
                    "sin": {"type": "array", "items": _NUM}}}]}
_CPROFILE = {"oneOf": [
    _PROFILE["oneOf"][0], _PROFILE["oneOf"][1],
    {"type": "object", "additionalProperties": False,
     "properties": {"re": _PROFILE, "im": _PROFILE}}]}
_SCALAR = {"oneOf": [
    {"type": "number"},
    {"type": "object", "additionalProperties": False,
     "properties": {"re": _NUM, "im": _NUM}}]}
_FUNCTIONAL = {"type": "object", "additionalProperties": False,
               "properties": {"eta": _CPROFILE, "x0_freq": _NUM,
                              "x0_decay": _NUM}}
_ELEMENT = {"type": "object", "additionalProperties": False,
            "properties": {"alpha": _PROFILE, "b": _PROFILE, "s": _NUM}}
_PATH = {"type": "object", "additionalProperties": False,
         "properties": {"seed": {"type": "integer", "minimum": 0},
                        "index": {"type": "integer", "minimum": 0},
                        "X": _NUM, "kind": {"enum": ["bridge", "free"]}}}

_PARAMS_SCHEMAS = {
    "sample": {"kind": {"enum": ["bridge", "free"]}, "X": _NUM,
               "count": {"type": "integer", "minimum": 1}},
    "check-translation": {"f": _FUNCTIONAL, "y": _PROFILE,
                          "kind": {"enum": ["bridge", "free"]}, "X": _NUM},
    "check-direct-integral": {"f": _FUNCTIONAL,
                              "x_nodes": {"type": "integer", "minimum": 5}},
    "check-unitarity": {"g": _ELEMENT, "lam": _SCALAR, "k": _NUM,
                        "f": _FUNCTIONAL, "h": _FUNCTIONAL},
    "check-group-law": {"g1": _ELEMENT, "g2": _ELEMENT, "k": _NUM,
                        "lam": _SCALAR, "mode": {"enum": ["unitary", "semigroup"]},
                        "n_paths": {"type": "integer", "minimum": 1},
                        "path_seed": {"type": "integer", "minimum": 0}},
    "check-commutators": {"alpha1": _PROFILE, "alpha2": _PROFILE,
                          "b": _PROFILE, "k": _NUM, "lam": _SCALAR,
                          "eps": _NUM,
                          "n_paths": {"type": "integer", "minimum": 1},
                          "path_seed": {"type": "integer", "minimum": 0}},
    "check-intertwiner": {"X1": _NUM, "X2": _NUM, "g": _ELEMENT,
                          "lam": _SCALAR, "k": _NUM,
                          "n_paths": {"type": "integer", "minimum": 1},
                          "path_seed": {"type": "integer", "minimum": 0}},
    "gamma-loop": {"z": _CPROFILE, "mu": _PROFILE,
                   "variant": {"enum": ["value", "delta", "vder"]},
                   "v": _NUM, "xi": _PROFILE,
                   "tilt": {"type": "boolean"}},
    "check-functional-eq": {"z": _CPROFILE, "mu": _PROFILE,
                            "g": _PROFILE},
    "kernel": {"x": _PATH, "y": _PATH, "x0": _NUM, "g": _ELEMENT,
               "lam": _SCALAR, "k": _NUM,
               "reduction_n": {"type": "integer", "minimum": 64}},
    "gamma-reg": {"z": _SCALAR, "mu": _NUM, "t": _NUM,
                  "recurrence": {"type": "boolean"}},
    "check-limit": {"z": _SCALAR, "mu": _NUM,
                    "ts": {"type": "array", "items": _NUM, "minItems": 2}},
    "check-prop22": {"a": _NUM, "b": _NUM, "lam": _NUM, "width": _NUM,
                     "chirp": _NUM, "half_width": _NUM,
                     "n": {"type": "integer", "minimum": 257},
                     "n_report": {"type": "integer", "minimum": 3},
                     "tol": _NUM},
    "check-theorem52": {"path": _PATH, "g": _ELEMENT, "lam": _SCALAR,
                        "k": _NUM, "mode": {"enum": ["unitary", "semigroup"]},
                        "psi_width": _NUM, "psi_chirp": _NUM,
                        "half_width": _NUM,
                        "n": {"type": "integer", "minimum": 257},
                        "n_report": {"type": "integer", "minimum": 3},
                        "tol": _NUM},
    "fourier-wiener": {"eta": _CPROFILE, "zeta": _CPROFILE, "tol": _NUM},
}


def config_schema() -> dict:
    return {
        "type": "object", "additionalProperties": False,
        "required": ["command"],
        "properties": {
            "command": {"enum": sorted(_PARAMS_SCHEMAS)},
            "seed": {"type": "integer", "minimum": 0,
                     "maximum": 2 ** 64 - 1},
            "samples": {"type": "integer", "minimum": 1},
            "grid": {"type": "integer", "minimum": 8},
            "t": {"type": "number", "exclusiveMinimum": 0},
            "out": {"type": "string"},
            "params": {"type": "object"},
        },
    }


def _validate(config: dict) -> None:
    try:
        jsonschema.validate(config, config_schema())
        command = config["command"]
        props = _PARAMS_SCHEMAS[command]
        jsonschema.validate(config.get("params", {}),
                            {"type": "object", "additionalProperties": False,
                             "properties": props})
    except jsonschema.ValidationError as exc:
        raise UsageError(f"invalid config: {exc.message}") from exc


# ---------------------------------------------------------------------------
# subcommand handlers: take the resolved environment, return
# (report dict, passed flag or None, stdout lines)

def _env(config):
    grid = make_grid(int(config["grid"]))
    cfg = MeasureConfig(t=float(config["t"]))
    return grid, cfg, int(config["samples"]), int(config["seed"]), \
        dict(config.get("params", {}))


def _report_of_check(name, rep, params) -> dict:
    rows = [estimate_row("lhs", rep.lhs, rep.stderr),
            estimate_row("rhs", rep.rhs, rep.stderr),
            estimate_row("diff", rep.lhs - rep.rhs, rep.stderr)]
    return {"check": name, "params": params, "rows": rows,
            "passed": bool(rep.passed),
            "details": to_jsonable({"n": rep.n, "seed": rep.seed,
                                    **rep.details})}


def _cmd_sample(config):
    grid, cfg, N, seed, params = _env(config)
    kind = params.get("kind", "bridge")
    X = float(params.get("X", 0.0))
    count = int(params.get("count", 8))
    paths = [(sample_bridge(grid, cfg, X, seed, i) if kind == "bridge"
              else sample_wiener(grid, cfg, seed, i)) for i in range(count)]
    rows = [estimate_row(i, float(p.values[-1])) for i, p in enumerate(paths)]
    report = {"check": "sample", "params": params, "rows": rows,
              "passed": None,
              "details": {"values": [p.values.tolist() for p in paths]}}
    lines = [f"sample: {count} {kind} paths, endpoints "
             f"{[round(float(p.values[-1]), 4) for p in paths]}"]
    return report, None, lines


def _cmd_translation(config):
    grid, cfg, N, seed, params = _env(config)
    f = build_functional(params.get("f", {}), grid)
    y = build_loop(params.get("y", {"sin": [0.5]}), grid)
    sampler = "free" if params.get("kind", "free") == "free" \
        else ("bridge", float(params.get("X", 0.0)))
    rep = check_translation(f, y, sampler, grid, cfg, N, seed)
    report = _report_of_check(rep.check, rep, params)
    lines = [f"{rep.check}: {'PASS' if rep.passed else 'FAIL'} "
             f"(|diff| {abs(rep.lhs - rep.rhs):.3e}, 3*SE {3 * rep.stderr:.3e})"]
    return report, rep.passed, lines


def _cmd_direct_integral(config):
    grid, cfg, N, seed, params = _env(config)
    f = build_functional(params.get("f", {}), grid)
    rep = check_direct_integral(f, grid, cfg, N, seed,
                                x_nodes=int(params.get("x_nodes", 61)))
    report = _report_of_check(rep.check, rep, params)
    lines = [f"{rep.check}: {'PASS' if rep.passed else 'FAIL'} "
             f"(|diff| {abs(rep.lhs - rep.rhs):.3e})"]
    return report, rep.passed, lines


def _cmd_unitarity(config):
    grid, cfg, N, seed, params = _env(config)
    g = build_element(params.get("g", {"alpha": {"sin": [0.4]},
                                       "b": {"const": 1.0, "cos": [0.3]},
                                       "s": 0.3}), grid)
    ctx = build_ctx({"lam": params.get("lam", {"im": 0.8}),
                     "k": params.get("k", 1.0), "mode": "unitary"}, grid, cfg)
    f = build_functional(params.get("f", {"eta": {"im": {"cos": [1.0]}},
                                          "x0_freq": 1.0, "x0_decay": 1.0}), grid)
    h = build_functional(params.get("h", {"eta": {"im": {"sin": [0.7]}},
                                          "x0_freq": -0.5, "x0_decay": 1.0}), grid)
    rep = check_unitarity(g, ctx, f, h, N, seed)
    report = _report_of_check(rep.check, rep, params)
    lines = [f"{rep.check}: {'PASS' if rep.passed else 'FAIL'} "
             f"(|diff| {abs(rep.lhs - rep.rhs):.3e}, 3*SE {3 * rep.stderr:.3e})"]
    return report, rep.passed, lines


def _cmd_group_law(config):
    grid, cfg, N, seed, params = _env(config)
    g1 = build_element(params.get("g1", {"alpha": {"sin": [1.0]},
                                         "b": {"const": 0.5}, "s": 0.2}), grid)
    g2 = build_element(params.get("g2", {"alpha": {"cos": [1.0]},
                                         "b": {"sin": [0.0, 0.4]}, "s": -0.7}), grid)
    k = float(params.get("k", 1.0))
    ctx = build_ctx({"lam": params.get("lam", {"im": 0.5}), "k": k,
                     "mode": params.get("mode", "unitary")}, grid, cfg)
    paths = _sample_paths(params, grid, cfg)
    hom = check_homomorphism(g1, g2, ctx, paths)
    left = multiply(multiply(g1, g2, k), g1, k)
    right = multiply(g1, multiply(g2, g1, k), k)
    assoc = max(float(np.max(np.abs(left.alpha.values - right.alpha.values))),
                float(np.max(np.abs(left.b.values - right.b.values))),
                abs(left.s - right.s))
    coc = cocycle(g1, g2, k)
    passed = bool(hom <= 1e-10 and assoc <= 1e-10)
    rows = [estimate_row("homomorphism_residual", hom),
            estimate_row("associativity_residual", assoc),
            estimate_row("cocycle", coc)]
    report = {"check": "group-law", "params": params, "rows": rows,
              "passed": passed, "details": {"k": k}}
    lines = [f"group-law: {'PASS' if passed else 'FAIL'} "
             f"(hom {hom:.3e}, assoc {assoc:.3e}, cocycle {coc:.6f})"]
    return report, passed, lines


def _cmd_commutators(config):
    grid, cfg, N, seed, params = _env(config)
    a1 = build_loop(params.get("alpha1", {"sin": [1.0]}), grid)
    a2 = build_loop(params.get("alpha2", {"cos": [1.0]}), grid)
    b = build_loop(params.get("b", {"const": 1.0}), grid)
    ctx = build_ctx({"lam": params.get("lam", {"im": 0.6}),
                     "k": params.get("k", 1.0), "mode": "unitary"}, grid, cfg)
    paths = _sample_paths(params, grid, cfg)
    res = check_commutators(a1, a2, b, ctx, paths,
                            eps=float(params.get("eps", 1e-4)))
    passed = bool(res["central_pass"] and res["dt_pass"]
                  and res["opposite_charge_pass"])
    rows = [estimate_row("central_measured", res["central_measured"],
                         res["central_spread"]),
            estimate_row("central_predicted_magnitude",
                         res["central_predicted_magnitude"]),
            estimate_row("dt_residual", res["dt_residual"]),
            estimate_row("opposite_charge_residual",
                         res["opposite_charge_residual"])]
    report = {"check": "commutators", "params": params, "rows": rows,
              "passed": passed, "details": to_jsonable(res)}
    cm = res["central_measured"]
    lines = [f"commutators: {'PASS' if passed else 'FAIL'} "
             f"(central {cm.real:+.6f}{cm.imag:+.6f}j, "
             f"dt {res['dt_residual']:.3e}, "
             f"opposite {res['opposite_charge_residual']:.3e})"]
    return report, passed, lines


def _cmd_intertwiner(config):
    grid, cfg, N, seed, params = _env(config)
    X1 = float(params.get("X1", 0.4))
    X2 = float(params.get("X2", -0.2))
    xi = build_loop({"ramp": X1 - X2}, grid)
    g = build_element(params.get("g", {"alpha": {"sin": [0.6]},
                                       "b": {"const": 0.8}, "s": 0.1}), grid)
    ctx = build_ctx({"lam": params.get("lam", {"im": 0.7}),
                     "k": params.get("k", 0.0), "mode": "unitary"}, grid, cfg)
    paths = _sample_paths(params, grid, cfg, X=X2)
    resid = check_intertwiner(X1, X2, xi, ctx, g, paths)
    passed = bool(resid <= 1e-10)
    report = {"check": "intertwiner", "params": params,
              "rows": [estimate_row("residual", resid)],
              "passed": passed, "details": {"X1": X1, "X2": X2}}
    lines = [f"intertwiner: {'PASS' if passed else 'FAIL'} (residual {resid:.3e})"]
    return report, passed, lines


def _cmd_gamma_loop(config):
    grid, cfg, N, seed, params = _env(config)
    z = ComplexLoopArgument(grid=grid,
                            z=build_complex_values(params.get(
                                "z", {"re": {"cos": [0.5]},
                                      "im": {"sin": [0.3]}}), grid))
    muv, _, _ = _profile_parts(params.get("mu", 0.4), grid)
    mu = MuWeight(grid=grid, mu=muv)
    tilt = params.get("tilt", None)
    variant = params.get("variant", "value")
    if variant == "value":
        est = hat_gamma(z, mu, cfg, N, seed, tilt=tilt)
    elif variant == "delta":
        est = hat_gamma_delta_shift(z, mu, float(params.get("v", 0.0)),
                                    cfg, N, seed, tilt=tilt)
    else:
        xiv, _, _ = _profile_parts(params.get("xi", {"sin": [1.0]}), grid)
        est = variational_derivative(z, mu, xiv, cfg, N, seed, tilt=tilt)
    report = {"check": f"gamma-loop-{variant}", "params": params,
              "rows": [estimate_row(variant, est.mean, est.stderr)],
              "passed": None, "details": {"n": est.n, "seed": est.seed}}
    lines = [f"gamma-loop {variant}: {est.mean.real:.10g}{est.mean.imag:+.10g}j "
             f"+- {est.stderr:.3e} (N={est.n})"]
    return report, None, lines


def _cmd_functional_eq(config):
    grid, cfg, N, seed, params = _env(config)
    z = ComplexLoopArgument(grid=grid,
                            z=build_complex_values(params.get(
                                "z", {"re": {"cos": [0.5]},
                                      "im": {"sin": [0.3]}}), grid))
    muv, _, _ = _profile_parts(params.get("mu", 0.4), grid)
    mu = MuWeight(grid=grid, mu=muv)
    g = build_test_function(params.get("g", {"sin": [1.0, 0.5]}), grid)
    rep = check_functional_equation(z, mu, g, cfg, N, seed)
    report = _report_of_check(rep.check, rep, params)
    lines = [f"{rep.check}: {'PASS' if rep.passed else 'FAIL'} "
             f"(|mean| {abs(rep.lhs):.3e}, 3*SE {3 * rep.stderr:.3e})"]
    return report, rep.passed, lines


def _cmd_kernel(config):
    grid, cfg, N, seed, params = _env(config)
    x = _sample_path(params.get("x", {"seed": 11}), grid, cfg)
    y = _sample_path(params.get("y", {"seed": 12}), grid, cfg)
    x0 = float(params.get("x0", 0.0))
    g = build_element(params.get("g", {"alpha": {"sin": [0.4]},
                                       "b": {"const": 1.0}, "s": 0.2}), grid)
    ctx = build_ctx({"lam": params.get("lam", -1.0),
                     "k": params.get("k", 1.0), "mode": "semigroup"}, grid, cfg)
    est = kernel_K(x, y, x0, g, ctx, N, seed)
    resid = check_kernel_reduction(x, y, x0, g, ctx,
                                   N=int(params.get("reduction_n", 2048)),
                                   seed=seed)
    passed = bool(resid <= 1e-12)
    report = {"check": "kernel", "params": params,
              "rows": [estimate_row("kernel", est.mean, est.stderr),
                       estimate_row("reduction_residual", resid)],
              "passed": passed, "details": {"n": est.n, "seed": est.seed}}
    lines = [f"kernel: {est.mean.real:.10g}{est.mean.imag:+.10g}j "
             f"+- {est.stderr:.3e}; reduction residual {resid:.3e} "
             f"{'PASS' if passed else 'FAIL'}"]
    return report, passed, lines


def _cmd_gamma_reg(config):
    grid, cfg, N, seed, params = _env(config)
    p = RegGammaParams(mu=float(params.get("mu", 1.0)),
                       t=float(params.get("t", 2.0)),
                       z=build_scalar(params.get("z", 1.5)))
    value = gamma_reg(p)
    prime = gamma_reg_prime(p)
    rows = [estimate_row("value", value), estimate_row("prime", prime)]
    details = {"mu": p.mu, "t": p.t, "z": p.z}
    passed = None
    lines = [f"gamma-reg({p.z.real:.15g}{p.z.imag:+.15g}j; mu={p.mu:.15g}, "
             f"t={p.t:.15g}) = {value.real:.15g}{value.imag:+.15g}j",
             f"gamma-reg prime = {prime.real:.15g}{prime.imag:+.15g}j"]
    if params.get("recurrence", True):
        resid = check_recurrence(p)
        rows.append(estimate_row("recurrence_residual", resid))
        details["recurrence_residual"] = resid
        passed = bool(resid <= 1e-8)
        lines.append(f"recurrence residual {resid:.3e} "
                     f"{'PASS' if passed else 'FAIL'}")
    report = {"check": "gamma-reg", "params": params, "rows": rows,
              "passed": passed, "details": to_jsonable(details)}
    return report, passed, lines


def _cmd_limit(config):
    grid, cfg, N, seed, params = _env(config)
    res = check_large_t_limit(build_scalar(params.get("z", 1.0)),
                              float(params.get("mu", 1.0)),
                              ts=tuple(params.get("ts", [1e2, 1e3, 1e4])))
    rows = [estimate_row(t, err) for t, err in zip(res["ts"], res["errors"])]
    passed = bool(res["monotone"] and res["converged"])
    report = {"check": "large-t-limit", "params": params, "rows": rows,
              "passed": passed, "details": to_jsonable(res)}
    lines = [f"large-t-limit: {'PASS' if passed else 'FAIL'} "
             f"(final error {res['errors'][-1]:.3e}, "
             f"oracle {res['oracle'].real:.15g}{res['oracle'].imag:+.15g}j)"]
    return report, passed, lines


def _cmd_prop22(config):
    grid, cfg, N, seed, params = _env(config)
    width = float(params.get("width", 1.0))
    chirp = float(params.get("chirp", 0.0))
    L = float(params.get("half_width", 12.0))
    n = int(params.get("n", 2049))
    nodes = np.linspace(-L, L, n)
    f = LineFunction(L, np.exp(-width * nodes ** 2 + 1j * chirp * nodes))
    rep = check_prop22(float(params.get("a", 1.5)), float(params.get("b", 2.0)),
                       float(params.get("lam", -0.7)), f,
                       n_report=int(params.get("n_report", 33)),
                       tol=float(params.get("tol", 1e-4)))
    report = _report_of_check(rep.check, rep, params)
    lines = [f"{rep.check}: {'PASS' if rep.passed else 'FAIL'} "
             f"(residual {rep.details['residual']:.3e})"]
    return report, rep.passed, lines


def _cmd_theorem52(config):
    grid, cfg, N, seed, params = _env(config)
    x = _sample_path(params.get("path", {"seed": 77}), grid, cfg)
    g = build_element(params.get("g", {"alpha": {"const": 0.5, "sin": [0.3]},
                                       "b": {"const": 1.0, "cos": [0.2]},
                                       "s": 0.7}), grid)
    ctx = build_ctx({"lam": params.get("lam", -0.7),
                     "k": params.get("k", 1.0),
                     "mode": params.get("mode", "semigroup")}, grid, cfg)
    width = float(params.get("psi_width", 1.0))
    chirp = float(params.get("psi_chirp", 0.3))
    L = float(params.get("half_width", 12.0))
    n = int(params.get("n", 2049))
    nodes = np.linspace(-L, L, n)
    psi = LineFunction(L, np.exp(-width * nodes ** 2 + 1j * chirp * nodes))
    rep = check_theorem52(x, g, ctx, psi,
                          n_report=int(params.get("n_report", 25)),
                          tol=float(params.get("tol", 1e-4)))
    report = _report_of_check(rep.check, rep, params)
    lines = [f"{rep.check}: {'PASS' if rep.passed else 'FAIL'} "
             f"(residual {rep.details['residual']:.3e})"]
    return report, rep.passed, lines


def _cmd_fourier_wiener(config):
    grid, cfg, N, seed, params = _env(config)
    eta = build_complex_values(params.get("eta", {"re": {"cos": [0.4]},
                                                  "im": {"sin": [0.0, 0.2]}}), grid)
    zeta = build_complex_values(params.get(
        "zeta", {"re": {"sin": [-0.3], "cos": [0.0, 0.0, 0.1]}}), grid)
    rep = fourier_wiener_check(eta, zeta, cfg, grid=grid,
                               tol=float(params.get("tol", 1e-10)))
    report = _report_of_check(rep.check, rep, params)
    lines = [f"{rep.check}: {'PASS' if rep.passed else 'FAIL'} "
             f"(residual {rep.details['residual']:.3e})"]
    return report, rep.passed, lines


COMMANDS = {
    "sample": (_cmd_sample,
               "draw pinned or free paths and report their endpoints"),
    "check-translation": (_cmd_translation,
                          "shift invariance of the path law under a "
                          "weighted displacement"),
    "check-direct-integral": (_cmd_direct_integral,
                              "free expectation against the endpoint "
                              "integral of pinned expectations"),
    "check-unitarity": (_cmd_unitarity,
                        "inner products before and after the loop operator"),
    "check-group-law": (_cmd_group_law,
                        "operator composition against the twisted product, "
                        "plus cocycle value"),
    "check-commutators": (_cmd_commutators,
                          "finite-difference Lie brackets: central constant, "
                          "[D,T] relation, opposite charges"),
    "check-intertwiner": (_cmd_intertwiner,
                          "endpoint-sector carrier against the rescaled "
                          "multiplier operator"),
    "gamma-loop": (_cmd_gamma_loop,
                   "loop Gamma functional value, point-mass shift, or "
                   "directional derivative"),
    "check-functional-eq": (_cmd_functional_eq,
                            "weighted difference identity of the loop Gamma "
                            "integrand, zero-mean test"),
    "kernel": (_cmd_kernel,
               "two-point operator kernel and its reduction to the loop "
               "Gamma functional"),
    "gamma-reg": (_cmd_gamma_reg,
                  "Gaussian-regularized Gamma value, derivative, recurrence "
                  "residual"),
    "check-limit": (_cmd_limit,
                    "large-width convergence of the regularized Gamma to "
                    "the classical one"),
    "check-prop22": (_cmd_prop22,
                     "scalar model: transform-conjugated operator against "
                     "its Gamma kernel"),
    "check-theorem52": (_cmd_theorem52,
                        "loop operator at a frozen path: transform route "
                        "against the Gamma kernel route"),
    "fourier-wiener": (_cmd_fourier_wiener,
                       "deterministic unitarity of the shifted-argument "
                       "transform on exponential vectors"),
}

_DEFAULTS = {"seed": 0, "samples": 100000, "grid": 256, "t": 0.2,
             "out": "reports", "params": {}}


def run(config: dict) -> int:
    """Validate and execute one resolved config; returns the exit code."""
    config = {**_DEFAULTS, **config}
    _validate(config)
    handler, _ = COMMANDS[config["command"]]
    report, passed, lines = handler(config)
    name = config["command"]
    paths = write_artifacts(report, config["out"], name)
    for line in lines:
        print(line)
    print(f"wrote {paths['json']}, .csv, .dat")
    return 0 if passed in (True, None) else 1


def _parse_override(text: str):
    if "=" not in text:
        raise UsageError(f"overrides look like key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="loopgamma",
        description="checks and evaluators for loop-space multiplier "
                    "operators and the loop Gamma functional")
    parser.add_argument("command", nargs="?", choices=sorted(COMMANDS),
                        metavar="command")
    parser.add_argument("overrides", nargs="*", metavar="key=value",
                        help="parameter overrides merged into params")
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--grid", type=int)
    parser.add_argument("--t", type=float, dest="t")
    parser.add_argument("--out", help="output directory (default: reports)")
    parser.add_argument("--list", action="store_true",
                        help="list subcommands and exit")
    parser.add_argument("--recurrence", action="store_true",
                        help="gamma-reg: include the recurrence residual")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if args.list:
        for name in sorted(COMMANDS):
            print(f"{name:24s} {COMMANDS[name][1]}")
        return 0
    config: dict = {}
    try:
        if args.config:
            with open(args.config) as fh:
                config.update(json.load(fh))
        if args.command:
            config["command"] = args.command
        for flag in ("seed", "samples", "grid", "t", "out"):
            value = getattr(args, flag)
            if value is not None:
                config[flag] = value
        params = dict(config.get("params", {}))
        if args.recurrence:
            params["recurrence"] = True
        for item in args.overrides:
            key, value = _parse_override(item)
            params[key] = value
        config["params"] = params
        if "command" not in config:
            parser.print_usage()
            return 2
        return run(config)
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (AccuracyError, EvaluationError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
