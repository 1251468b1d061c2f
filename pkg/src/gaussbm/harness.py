"""Suite orchestration: configs in, deterministic reports and CSVs out.

A run executes the selected suite over the cross-product of configured
inputs and writes report.json plus plot tables into the output
directory. Reports are byte-identical across reruns with the same
config once the timestamp and per-check runtimes are stripped (the
canonical form used by the determinism contract); CSVs contain neither
and compare byte-for-byte.

Each check record stores the numbers its verdict was computed from and
a criterion tag so the verdict is re-derivable:
  ge               pass iff gap >= -tolerance
  gt0              pass iff gap > 0
  le               pass iff residual <= tolerance
  expect-negative  pass iff gap <= -tolerance
  ci               pass iff gap >= tolerance, fail iff gap <= -tolerance,
                   inconclusive in between (MC confidence band)
  lower-bound      pass iff gap >= -tolerance, otherwise inconclusive
                   (a certified lower bound cannot refute)
Inconclusive verdicts never fail a run.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

import numpy as np

from . import functional as fn
from . import geometry as geom
from .entropy_flow import IntegrationSpec, WeightedContext, entropy_curve
from .distributions import OneDPotential, TruncatedGaussian
from .errors import ConfigError
from .transport import (
    LinearMap,
    brenier_from_gaussian,
    coupling,
    lipschitz_certificate,
    monotone_from_1d,
    no_crossing_check,
)

__all__ = [
    "SUITES",
    "DEFAULT_CONFIG",
    "ExperimentConfig",
    "CheckRecord",
    "SuiteReport",
    "run",
    "emit_plot_data",
    "record_satisfied",
]

VERSION = "0.1.0"

SUITES = ("entropic", "sigma", "geometric", "dynamics", "bbl",
          "bbl-homogeneous", "dv", "counterexample")

LN_3 = 1.0986122886681098

DEFAULT_CONFIG = {
    "suite": "all",
    "t_grid": [0.25, 0.5, 0.75],
    "samples": 200_000,
    "seed": 0,
    "output_dir": "out",
    "tolerances": {
        "closed_form": 1e-10,
        "quadrature": 1e-6,
        "fd_first": 1e-5,
        "fd_second": 1e-4,
        "slope": 1e-8,
        "mc_sigmas": 3.0,
    },
    "gaussian_pairs": [
        {"name": "g-05-08", "kind": "linear", "scale0": 0.5, "scale1": 0.8},
        {"name": "g-diag-2d", "kind": "linear",
         "diag0": [0.6, 0.9], "diag1": [0.8, 0.7]},
    ],
    "nongaussian_pairs": [
        {"name": "trunc-05-20", "kind": "truncated", "a": 0.5, "b": 2.0},
        {"name": "quartic-01-10", "kind": "quartic", "lam0": 0.1, "lam1": 1.0},
    ],
    "body_pairs": [
        {"name": "interval-1-2",
         "k0": {"family": "box", "half_widths": [1.0]},
         "k1": {"family": "box", "half_widths": [2.0]}},
        {"name": "ellipse-box-2d",
         "k0": {"family": "ellipsoid", "matrix": [[1.0, 0.0], [0.0, 0.25]]},
         "k1": {"family": "box", "half_widths": [1.0, 1.0]}},
    ],
    "bbl_cases": [
        {"name": "gauss-1-3", "p": 0.0, "t": 0.5,
         "f": {"variant": "gaussian", "a": [[1.0]]},
         "g": {"variant": "gaussian", "a": [[3.0]]}},
        {"name": "interval-ind", "p": "inf", "t": 0.5,
         "f": {"variant": "indicator",
               "body": {"family": "box", "half_widths": [1.0]}},
         "g": {"variant": "indicator",
               "body": {"family": "box", "half_widths": [2.0]}}},
        {"name": "gauss-p1", "p": 1.0, "t": 0.5,
         "f": {"variant": "gaussian", "a": [[1.0]]},
         "g": {"variant": "gaussian", "a": [[3.0]]}},
    ],
    "homogeneous_cases": [
        {"name": "b15", "f": "exp-beta15", "g": "cauchy2",
         "p": 0.5, "t": 0.3, "beta": 1.5},
        {"name": "b2", "f": "exp-square", "g": "exp-square",
         "p": 0.0, "t": 0.5, "beta": 2.0},
        {"name": "b4", "f": "cap4", "g": "exp-square",
         "p": 1.0, "t": 0.5, "beta": 4.0},
    ],
    "dv_cases": [
        {"name": "two-point", "kind": "discrete",
         "points": [0.0, 1.0], "weights": [0.5, 0.5],
         "phi_values": [0.0, LN_3],
         "members": [{"name": "gibbs", "weights": [0.25, 0.75]},
                     {"name": "uniform", "weights": [0.5, 0.5]}]},
        {"name": "gauss-quarter", "kind": "gaussian",
         "phi": "neg-quarter-square",
         "members": [{"name": "gibbs", "density": "exp-neg-quarter-square"},
                     {"name": "wide", "density": "exp-neg-eighth-square"}]},
    ],
    "counterexamples": [
        {"name": "shift-6", "half_widths": [1.0], "shift": 6.0, "t": 0.5},
    ],
}

# named 1D callables available to config blocks
FUNCTION_REGISTRY = {
    "exp-square": lambda x: np.exp(-np.asarray(x, dtype=float) ** 2),
    "exp-beta15": lambda x: np.exp(-np.abs(np.asarray(x, dtype=float)) ** 1.5),
    "cap4": lambda x: 1.0 / (1.0 + np.asarray(x, dtype=float) ** 4),
    "cauchy2": lambda x: 1.0 / (1.0 + np.asarray(x, dtype=float) ** 2),
    "gauss-half": lambda x: np.exp(-0.5 * np.asarray(x, dtype=float) ** 2),
    "neg-quarter-square": lambda x: -np.asarray(x, dtype=float) ** 2 / 4.0,
    "exp-neg-quarter-square":
        lambda x: np.exp(-np.asarray(x, dtype=float) ** 2 / 4.0),
    "exp-neg-eighth-square":
        lambda x: np.exp(-np.asarray(x, dtype=float) ** 2 / 8.0),
}


# ---------------------------------------------------------------------------
# config


def _registry_fn(name):
    try:
        return FUNCTION_REGISTRY[name]
    except KeyError:
        raise ConfigError(f"unknown function name {name!r}") from None


def _resolve_body(blk):
    try:
        family = blk["family"]
        if family == "box":
            return geom.Box(tuple(float(h) for h in blk["half_widths"]))
        if family == "ellipsoid":
            return geom.Ellipsoid(np.asarray(blk["matrix"], dtype=float))
        if family == "pnorm":
            return geom.PNormBall(float(blk["p"]), float(blk["radius"]),
                                  int(blk["dim"]))
        if family == "hpoly":
            return geom.HPolytopeSym(np.asarray(blk["normals"], dtype=float),
                                     np.asarray(blk["offsets"], dtype=float))
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"bad body block {blk!r}: {exc}") from exc
    raise ConfigError(f"unknown body family {blk.get('family')!r}")


def _resolve_function(blk):
    try:
        variant = blk["variant"]
        if variant == "gaussian":
            return fn.GaussianQuadratic(np.asarray(blk["a"], dtype=float))
        if variant == "indicator":
            return fn.BodyIndicator(_resolve_body(blk["body"]))
        if variant == "tabulated":
            return fn.TabulatedEven1D(np.asarray(blk["grid"], dtype=float),
                                      np.asarray(blk["values"], dtype=float))
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"bad function block {blk!r}: {exc}") from exc
    raise ConfigError(f"unknown function variant {blk.get('variant')!r}")


def _resolve_p(raw):
    if raw == "inf":
        return math.inf
    p = float(raw)
    if math.isnan(p) or p < 0.0:
        raise ConfigError(f"exponent p={raw!r} must be >= 0 or 'inf'")
    return p


def _quartic_potential(lam):
    lam = float(lam)
    if lam < 0.0:
        raise ConfigError("quartic coefficient must be nonnegative")
    return OneDPotential(
        u=lambda x, c=lam: 0.5 * x ** 2 + c * x ** 4,
        du=lambda x, c=lam: x + 4.0 * c * x ** 3,
        d2u=lambda x, c=lam: 1.0 + 12.0 * c * x ** 2,
    )


def _resolve_coupling(blk):
    try:
        kind = blk["kind"]
        if kind == "linear":
            if "scale0" in blk:
                d0 = np.eye(1) * float(blk["scale0"])
                d1 = np.eye(1) * float(blk["scale1"])
            else:
                d0 = np.diag(np.asarray(blk["diag0"], dtype=float))
                d1 = np.diag(np.asarray(blk["diag1"], dtype=float))
            return coupling(LinearMap(d0), LinearMap(d1))
        if kind == "truncated":
            k0 = geom.Box((float(blk["a"]),))
            k1 = geom.Box((float(blk["b"]),))
            return coupling(brenier_from_gaussian(TruncatedGaussian(k0)),
                            brenier_from_gaussian(TruncatedGaussian(k1)))
        if kind == "quartic":
            return coupling(monotone_from_1d(_quartic_potential(blk["lam0"])),
                            monotone_from_1d(_quartic_potential(blk["lam1"])))
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"bad coupling block {blk!r}: {exc}") from exc
    raise ConfigError(f"unknown coupling kind {blk.get('kind')!r}")


_BLOCK_KEYS = ("gaussian_pairs", "nongaussian_pairs", "body_pairs",
               "bbl_cases", "homogeneous_cases", "dv_cases", "counterexamples")


@dataclass(frozen=True)
class ExperimentConfig:
    suite: str
    t_grid: tuple
    samples: int
    seed: int
    output_dir: str
    tolerances: dict
    gaussian_pairs: tuple = ()
    nongaussian_pairs: tuple = ()
    body_pairs: tuple = ()
    bbl_cases: tuple = ()
    homogeneous_cases: tuple = ()
    dv_cases: tuple = ()
    counterexamples: tuple = ()

    def __post_init__(self):
        if self.suite not in SUITES + ("all",):
            raise ConfigError(f"unknown suite {self.suite!r}")
        grid = tuple(float(t) for t in self.t_grid)
        if not grid:
            raise ConfigError("t_grid must not be empty")
        if any(not 0.0 <= t <= 1.0 for t in grid):
            raise ConfigError("t_grid must lie within [0, 1]")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("t_grid must be strictly increasing")
        object.__setattr__(self, "t_grid", grid)
        if int(self.samples) <= 0:
            raise ConfigError("samples must be positive")
        object.__setattr__(self, "samples", int(self.samples))
        object.__setattr__(self, "seed", int(self.seed))
        tol = dict(DEFAULT_CONFIG["tolerances"])
        tol.update(self.tolerances or {})
        object.__setattr__(self, "tolerances", tol)
        for key in _BLOCK_KEYS:
            object.__setattr__(self, key,
                               tuple(dict(b) for b in getattr(self, key)))
        self._resolve_all()

    def _resolve_all(self):
        """Referenced blocks must resolve to module constructors."""
        for blk in self.gaussian_pairs + self.nongaussian_pairs:
            _resolve_coupling(blk)
        for blk in self.body_pairs:
            _resolve_body(blk["k0"])
            _resolve_body(blk["k1"])
        for blk in self.bbl_cases:
            fn.SupConvolutionSpec(_resolve_function(blk["f"]),
                                  _resolve_function(blk["g"]),
                                  _resolve_p(blk["p"]), float(blk["t"]))
        for blk in self.homogeneous_cases:
            _registry_fn(blk["f"])
            _registry_fn(blk["g"])
            fn.homogeneous_exponent(_resolve_p(blk["p"]), 1, float(blk["beta"]))
        for blk in self.dv_cases:
            if blk.get("kind") not in ("discrete", "gaussian"):
                raise ConfigError(f"unknown dv kind {blk.get('kind')!r}")
            if blk["kind"] == "gaussian":
                _registry_fn(blk["phi"])
                for mem in blk.get("members", ()):
                    if "density" in mem:
                        _registry_fn(mem["density"])
        for blk in self.counterexamples:
            geom.Box(tuple(float(h) for h in blk["half_widths"]))

    @staticmethod
    def from_dict(d: dict) -> "ExperimentConfig":
        d = dict(d)
        unknown = set(d) - set(_BLOCK_KEYS) - {
            "suite", "t_grid", "samples", "seed", "output_dir", "tolerances"}
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        merged = {k: d.get(k, copy.deepcopy(DEFAULT_CONFIG[k]))
                  for k in ("suite", "t_grid", "samples", "seed",
                            "output_dir", "tolerances")}
        for key in _BLOCK_KEYS:
            merged[key] = tuple(d.get(key, ()))
        return ExperimentConfig(**merged)

    @staticmethod
    def from_json(path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config {path} is not valid JSON: {exc}")
        if not isinstance(data, dict):
            raise ConfigError("config document must be a JSON object")
        return ExperimentConfig.from_dict(data)


# ---------------------------------------------------------------------------
# records and reports


@dataclass(frozen=True)
class CheckRecord:
    name: str
    digest: str
    criterion: str
    tolerance: float
    verdict: str
    runtime: float
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    gap: Optional[float] = None
    residual: Optional[float] = None
    note: str = ""

    def to_dict(self):
        def clean(v):
            # NaN/inf are not valid strict JSON
            if v is None or math.isfinite(v):
                return v
            return None

        return {
            "name": self.name,
            "digest": self.digest,
            "criterion": self.criterion,
            "lhs": clean(self.lhs),
            "rhs": clean(self.rhs),
            "gap": clean(self.gap),
            "residual": clean(self.residual),
            "tolerance": clean(self.tolerance),
            "verdict": self.verdict,
            "runtime": self.runtime,
            "note": self.note,
        }


def record_satisfied(rec: CheckRecord) -> bool:
    """Re-derive whether a pass verdict is justified by the stored numbers."""
    c = rec.criterion
    if c == "error":
        return False
    if c == "le":
        return rec.residual is not None and rec.residual <= rec.tolerance
    if rec.gap is None:
        return False
    if c == "ge":
        return rec.gap >= -rec.tolerance
    if c == "gt0":
        return rec.gap > 0.0
    if c == "expect-negative":
        return rec.gap <= -rec.tolerance
    if c == "ci":
        return rec.gap >= rec.tolerance
    if c == "lower-bound":
        return rec.gap >= -rec.tolerance
    raise ConfigError(f"unknown criterion {c!r}")


@dataclass(frozen=True)
class SuiteReport:
    records: tuple
    seed: int
    version: str
    timestamp: str
    plot_data: dict = field(default_factory=dict, compare=False, repr=False)

    def counts(self):
        out = {"pass": 0, "fail": 0, "inconclusive": 0}
        for r in self.records:
            out[r.verdict] += 1
        return out

    def to_json_dict(self):
        return {
            "metadata": {"seed": self.seed, "version": self.version,
                         "timestamp": self.timestamp},
            "checks": [r.to_dict() for r in self.records],
        }

    def canonical_json(self) -> str:
        """Serialization compared by the determinism contract.

        Drops the timestamp and the per-check runtimes, the only fields
        that legitimately vary between identical runs.
        """
        doc = self.to_json_dict()
        del doc["metadata"]["timestamp"]
        for rec in doc["checks"]:
            del rec["runtime"]
        return json.dumps(doc, sort_keys=True, indent=1)

    def write(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1)
            fh.write("\n")


def _digest(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


class _Recorder:
    def __init__(self):
        self.records = []
        self._start = None

    def begin(self):
        self._start = time.perf_counter()

    def emit(self, **kw):
        kw.setdefault("runtime", time.perf_counter() - self._start)
        self.records.append(CheckRecord(**kw))

    def fail_error(self, name, digest, exc):
        self.emit(name=name, digest=digest, criterion="error",
                  tolerance=0.0, verdict="fail",
                  note=f"{type(exc).__name__}: {exc}")


def _verdict_ge(gap, tol):
    return "pass" if gap >= -tol else "fail"


def _verdict_ci(gap, tol):
    if gap >= tol:
        return "pass"
    if gap <= -tol:
        return "fail"
    return "inconclusive"


# ---------------------------------------------------------------------------
# suites


def _curve_cache(config, cache, blk):
    name = blk["name"]
    if name not in cache:
        c = _resolve_coupling(blk)
        ctx = WeightedContext.gaussian(c.dim)
        spec = IntegrationSpec(samples=config.samples, seed=config.seed)
        grid = np.asarray(config.t_grid, dtype=float)
        if grid.size < 2:
            grid = np.unique(np.concatenate([[0.0, 1.0], grid]))
        cache[name] = (c, entropy_curve(ctx, c, grid, spec, enforce=False))
    return cache[name]


def _gap_tol(config, blk):
    key = "closed_form" if blk["kind"] == "linear" else "quadrature"
    return config.tolerances[key]


def _all_pairs(config):
    return config.gaussian_pairs + config.nongaussian_pairs


def _run_entropic(config, rec, cache, plots):
    for blk in _all_pairs(config):
        digest = _digest(blk)
        tol = _gap_tol(config, blk)
        rec.begin()
        try:
            c, curve = _curve_cache(config, cache, blk)
        except Exception as exc:
            rec.fail_error(f"entropic/{blk['name']}", digest, exc)
            continue
        plots.setdefault("curves", {})[blk["name"]] = curve
        n = c.dim
        for i, t in enumerate(curve.t_grid):
            if t not in config.t_grid:
                continue
            rec.begin()
            gap = float(curve.plain_gap[i])
            lhs = math.exp(-float(curve.entropy[i]) / n)
            rec.emit(name=f"entropic/{blk['name']}/t={t:g}", digest=digest,
                     criterion="ge", tolerance=tol, lhs=lhs, rhs=lhs - gap,
                     gap=gap, verdict=_verdict_ge(gap, tol))


def _run_sigma(config, rec, cache, plots):
    for blk in _all_pairs(config):
        digest = _digest(blk)
        tol = _gap_tol(config, blk)
        rec.begin()
        try:
            c, curve = _curve_cache(config, cache, blk)
        except Exception as exc:
            rec.fail_error(f"sigma/{blk['name']}", digest, exc)
            continue
        plots.setdefault("curves", {})[blk["name"]] = curve
        for i, t in enumerate(curve.t_grid):
            if t not in config.t_grid:
                continue
            rec.begin()
            sgap = float(curve.sigma_gap[i])
            pgap = float(curve.plain_gap[i])
            rec.emit(name=f"sigma/{blk['name']}/t={t:g}", digest=digest,
                     criterion="ge", tolerance=tol, gap=sgap,
                     verdict=_verdict_ge(sgap, tol),
                     note=f"theta={curve.theta:.6g}")
            rec.begin()
            dom = pgap - sgap
            rec.emit(name=f"sigma/{blk['name']}/dominates/t={t:g}",
                     digest=digest, criterion="ge", tolerance=1e-12,
                     gap=dom, verdict=_verdict_ge(dom, 1e-12))


def _run_dynamics(config, rec, cache, plots):
    fd1 = config.tolerances["fd_first"]
    fd2 = config.tolerances["fd_second"]
    slope_tol = config.tolerances["slope"]
    for blk in _all_pairs(config):
        digest = _digest(blk)
        tol = _gap_tol(config, blk)
        rec.begin()
        try:
            c, curve = _curve_cache(config, cache, blk)
        except Exception as exc:
            rec.fail_error(f"dynamics/{blk['name']}", digest, exc)
            continue
        for side, m in (("T0", c.t0), ("T1", c.t1)):
            rec.begin()
            cert = lipschitz_certificate(m)
            resid = cert.max_slope - 1.0
            rec.emit(name=f"dynamics/{blk['name']}/max_slope/{side}",
                     digest=digest, criterion="le", tolerance=slope_tol,
                     residual=resid,
                     verdict="pass" if resid <= slope_tol else "fail")
        rec.begin()
        ncr = no_crossing_check(c, min(2000, config.samples), config.t_grid,
                                config.seed)
        rec.emit(name=f"dynamics/{blk['name']}/no_crossing", digest=digest,
                 criterion="gt0", tolerance=0.0, gap=ncr.min_monotonicity,
                 verdict="pass" if ncr.min_monotonicity > 0.0 else "fail")
        for i, t in enumerate(curve.t_grid):
            if t not in config.t_grid:
                continue
            rec.begin()
            d_an = float(curve.first_derivative_analytic[i])
            d_fd = float(curve.first_derivative_fd[i])
            r1 = abs(d_an - d_fd) / max(abs(d_an), 1e-2)
            rec.emit(name=f"dynamics/{blk['name']}/fd1/t={t:g}", digest=digest,
                     criterion="le", tolerance=fd1, residual=r1,
                     verdict="pass" if r1 <= fd1 else "fail")
            rec.begin()
            s_an = float(curve.second_derivative_analytic[i])
            s_fd = float(curve.second_derivative_fd[i])
            r2 = abs(s_an - s_fd) / max(abs(s_an), 1e-2)
            rec.emit(name=f"dynamics/{blk['name']}/fd2/t={t:g}", digest=digest,
                     criterion="le", tolerance=fd2, residual=r2,
                     verdict="pass" if r2 <= fd2 else "fail")
            rec.begin()
            lg = float(curve.local_gap[i])
            lg_tol = max(tol, 1e-8)
            rec.emit(name=f"dynamics/{blk['name']}/local_gap/t={t:g}",
                     digest=digest, criterion="ge", tolerance=lg_tol, gap=lg,
                     verdict=_verdict_ge(lg, lg_tol))


def _run_geometric(config, rec, cache, plots):
    tol_closed = config.tolerances["closed_form"]
    for blk in config.body_pairs:
        digest = _digest(blk)
        try:
            k0 = _resolve_body(blk["k0"])
            k1 = _resolve_body(blk["k1"])
        except Exception as exc:
            rec.begin()
            rec.fail_error(f"geometric/{blk['name']}", digest, exc)
            continue
        for t in config.t_grid:
            rec.begin()
            try:
                chk = geom.geometric_bm_check(k0, k1, t,
                                              samples=config.samples,
                                              seed=config.seed)
            except Exception as exc:
                rec.fail_error(f"geometric/{blk['name']}/t={t:g}", digest, exc)
                continue
            plots.setdefault("measures", []).append(
                {"name": blk["name"], "t": t, "lhs": chk.lhs, "rhs": chk.rhs,
                 "gap": chk.gap, "confidence_gap": chk.confidence_gap,
                 "lhs_std_error": chk.lhs_std_error})
            exact = chk.lhs_std_error == 0.0 and chk.rhs_std_error == 0.0
            if exact:
                rec.emit(name=f"geometric/{blk['name']}/t={t:g}",
                         digest=digest, criterion="ge", tolerance=tol_closed,
                         lhs=chk.lhs, rhs=chk.rhs, gap=chk.gap,
                         verdict=_verdict_ge(chk.gap, tol_closed))
                continue
            band = chk.gap - chk.confidence_gap
            verdict = "inconclusive" if chk.unreliable else \
                _verdict_ci(chk.gap, band)
            rec.emit(name=f"geometric/{blk['name']}/t={t:g}", digest=digest,
                     criterion="ci", tolerance=band, lhs=chk.lhs, rhs=chk.rhs,
                     gap=chk.gap, verdict=verdict,
                     note="unreliable" if chk.unreliable else "")


def _run_bbl(config, rec, cache, plots):
    for blk in config.bbl_cases:
        digest = _digest(blk)
        rec.begin()
        try:
            spec = fn.SupConvolutionSpec(_resolve_function(blk["f"]),
                                         _resolve_function(blk["g"]),
                                         _resolve_p(blk["p"]),
                                         float(blk["t"]))
            rep = fn.bbl_check(spec, fn.IntegratorSpec(
                samples=config.samples, seed=config.seed))
        except Exception as exc:
            rec.fail_error(f"bbl/{blk['name']}", digest, exc)
            continue
        name = f"bbl/{blk['name']}"
        if rep.unreliable:
            rec.emit(name=name, digest=digest, criterion="ci",
                     tolerance=rep.tolerance, gap=None,
                     verdict="inconclusive", note="unreliable measure")
        elif rep.lower_bound_route:
            verdict = "pass" if rep.gap >= -rep.tolerance else "inconclusive"
            note = "" if rep.search_converged else "search flag"
            rec.emit(name=name, digest=digest, criterion="lower-bound",
                     tolerance=rep.tolerance, lhs=rep.lhs, rhs=rep.rhs,
                     gap=rep.gap, verdict=verdict, note=note)
        elif rep.lhs_std_error > 0.0:
            rec.emit(name=name, digest=digest, criterion="ci",
                     tolerance=rep.tolerance, lhs=rep.lhs, rhs=rep.rhs,
                     gap=rep.gap, verdict=_verdict_ci(rep.gap, rep.tolerance))
        else:
            rec.emit(name=name, digest=digest, criterion="ge",
                     tolerance=rep.tolerance, lhs=rep.lhs, rhs=rep.rhs,
                     gap=rep.gap, verdict=_verdict_ge(rep.gap, rep.tolerance))


def _run_bbl_homogeneous(config, rec, cache, plots):
    for blk in config.homogeneous_cases:
        digest = _digest(blk)
        rec.begin()
        try:
            rep = fn.bbl_homogeneous_check(
                _registry_fn(blk["f"]), _registry_fn(blk["g"]),
                _resolve_p(blk["p"]), float(blk["t"]), float(blk["beta"]))
        except Exception as exc:
            rec.fail_error(f"bbl-homogeneous/{blk['name']}", digest, exc)
            continue
        verdict = "pass" if rep.gap >= -rep.tolerance else "inconclusive"
        rec.emit(name=f"bbl-homogeneous/{blk['name']}", digest=digest,
                 criterion="lower-bound", tolerance=rep.tolerance,
                 lhs=rep.lhs, rhs=rep.rhs, gap=rep.gap, verdict=verdict)


def _dv_members(blk):
    members = []
    for mem in blk.get("members", ()):
        if mem.get("point_mass"):
            members.append(fn.DVMember(mem["name"], point_mass=True))
        elif "weights" in mem:
            members.append(fn.DVMember(mem["name"],
                                       weights=tuple(mem["weights"])))
        else:
            members.append(fn.DVMember(mem["name"],
                                       density=_registry_fn(mem["density"])))
    return members


def _run_dv(config, rec, cache, plots):
    for blk in config.dv_cases:
        digest = _digest(blk)
        rec.begin()
        try:
            members = _dv_members(blk)
            if blk["kind"] == "discrete":
                nu = fn.DiscreteMeasure(tuple(blk["points"]),
                                        tuple(blk["weights"]))
                rep = fn.dv_duality_check(
                    np.asarray(blk["phi_values"], dtype=float), nu, members)
            else:
                rep = fn.dv_duality_check(_registry_fn(blk["phi"]),
                                          fn.GaussianLine(), members)
        except Exception as exc:
            rec.fail_error(f"dv/{blk['name']}", digest, exc)
            continue
        rejected = [m.name for m in rep.members if m.rejected]
        note = f"rejected: {', '.join(rejected)}" if rejected else ""
        rec.emit(name=f"dv/{blk['name']}/gibbs", digest=digest, criterion="le",
                 tolerance=rep.tolerance, lhs=rep.lhs, rhs=rep.gibbs_value,
                 residual=rep.equality_residual,
                 verdict="pass" if rep.equality_residual <= rep.tolerance
                 else "fail", note=note)
        worst = min((m.slack for m in rep.members if not m.rejected),
                    default=0.0)
        rec.begin()
        rec.emit(name=f"dv/{blk['name']}/family_bound", digest=digest,
                 criterion="le", tolerance=rep.tolerance,
                 residual=max(0.0, -worst),
                 verdict="pass" if -worst <= rep.tolerance else "fail")


def _run_counterexample(config, rec, cache, plots):
    tol = config.tolerances["quadrature"]
    for blk in config.counterexamples:
        digest = _digest(blk)
        rec.begin()
        try:
            k0 = geom.Box(tuple(float(h) for h in blk["half_widths"]))
            chk = geom.asymmetry_counterexample(k0, float(blk["shift"]),
                                                float(blk["t"]))
        except Exception as exc:
            rec.fail_error(f"counterexample/{blk['name']}", digest, exc)
            continue
        rec.emit(name=f"counterexample/{blk['name']}", digest=digest,
                 criterion="expect-negative", tolerance=tol,
                 lhs=chk.lhs, rhs=chk.rhs, gap=chk.gap,
                 verdict="pass" if chk.gap <= -tol else "fail",
                 note="expected-negative check")


_SUITE_RUNNERS = {
    "entropic": _run_entropic,
    "sigma": _run_sigma,
    "geometric": _run_geometric,
    "dynamics": _run_dynamics,
    "bbl": _run_bbl,
    "bbl-homogeneous": _run_bbl_homogeneous,
    "dv": _run_dv,
    "counterexample": _run_counterexample,
}


# ---------------------------------------------------------------------------
# plot tables


def _write_lines(path, lines):
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def emit_plot_data(report: SuiteReport, which: str, out_dir: str = "."):
    """Write the selected CSV tables; returns the created paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    if which == "entropy-curve":
        for name, curve in sorted(report.plot_data.get("curves", {}).items()):
            path = os.path.join(out_dir, f"entropy_curve_{name}.csv")
            curve.to_csv(path)
            paths.append(path)
    elif which == "gap-vs-t":
        for name, curve in sorted(report.plot_data.get("curves", {}).items()):
            lines = ["t,plain_gap,sigma_gap"]
            for t, pg, sg in zip(curve.t_grid, curve.plain_gap,
                                 curve.sigma_gap):
                lines.append(f"{float(t)!r},{float(pg)!r},{float(sg)!r}")
            paths.append(_write_lines(
                os.path.join(out_dir, f"gap_vs_t_{name}.csv"), lines))
    elif which == "measure-ci":
        rows = report.plot_data.get("measures", [])
        if rows:
            lines = ["name,t,lhs,rhs,gap,confidence_gap,lhs_std_error"]
            for r in rows:
                lines.append(
                    f"{r['name']},{float(r['t'])!r},{float(r['lhs'])!r},"
                    f"{float(r['rhs'])!r},{float(r['gap'])!r},"
                    f"{float(r['confidence_gap'])!r},"
                    f"{float(r['lhs_std_error'])!r}")
            paths.append(_write_lines(
                os.path.join(out_dir, "measure_ci.csv"), lines))
    else:
        raise ConfigError(f"unknown plot selector {which!r}")
    return paths


# ---------------------------------------------------------------------------
# entry point


def run(config: ExperimentConfig) -> SuiteReport:
    """Execute the configured suite(s); write report.json and CSV tables."""
    rec = _Recorder()
    cache = {}
    plots = {}
    suites = SUITES if config.suite == "all" else (config.suite,)
    for suite in suites:
        _SUITE_RUNNERS[suite](config, rec, cache, plots)
    report = SuiteReport(
        records=tuple(rec.records),
        seed=config.seed,
        version=VERSION,
        timestamp=datetime.now(timezone.utc).isoformat(),
        plot_data=plots,
    )
    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    report.write(os.path.join(out, "report.json"))
    for selector in ("entropy-curve", "gap-vs-t", "measure-ci"):
        emit_plot_data(report, selector, out)
    return report
