"""Sup-convolutions and the functional inequalities built on them.

Three families of checks live here: the minimal admissible combination
h of a function pair (sup over decompositions of a power mean), the
Borell-Brascamp-Lieb style integral comparison for the Gaussian and for
beta-homogeneous reference measures, and Donsker-Varadhan duality.

The grid sup-convolution returns a certified LOWER bound of h, so a
nonnegative gap is a valid pass while a small negative one is only
inconclusive; reports carry the route so callers can tell the two
regimes apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .core import power_mean, power_mean_vec
from .errors import DomainError, UnsupportedFamilyError
from .quadrature import adaptive_integral
from . import geometry as _geom

__all__ = [
    "GaussianQuadratic",
    "BodyIndicator",
    "TabulatedEven1D",
    "SupConvolutionSpec",
    "SearchSpec",
    "IntegratorSpec",
    "sup_convolution",
    "BblReport",
    "bbl_check",
    "bbl_homogeneous_check",
    "exponent_map",
    "homogeneous_exponent",
    "HolderChain",
    "holder_chain_check",
    "DiscreteMeasure",
    "GaussianLine",
    "DVMember",
    "DvMemberResult",
    "DvReport",
    "dv_duality_check",
    "gamma_integral_1d",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# 201-node probabilists' Gauss-Hermite rule; exact for polynomial-times-
# Gaussian integrands far beyond the tolerances used here
_GH_X, _GH_W = np.polynomial.hermite_e.hermegauss(201)
_GH_W = _GH_W / _SQRT_2PI


def gamma_integral_1d(fn) -> float:
    """Integral of fn against the standard Gaussian on the line."""
    return float(np.sum(_GH_W * np.asarray(fn(_GH_X), dtype=float)))


def _norm_pdf(x):
    return np.exp(-0.5 * np.square(x)) / _SQRT_2PI


# ---------------------------------------------------------------------------
# log-concave function variants


class LogConcaveFunction:
    """Common surface for the function variants entering a combination."""

    dim: int

    def evaluate(self, pts):
        raise NotImplementedError

    def _eval_1d(self, x):
        x = np.asarray(x, dtype=float)
        return self.evaluate(x.reshape(-1, 1) if self.dim == 1 else x).reshape(x.shape)

    def search_radius(self) -> Tuple[float, bool]:
        """(radius, hard) where hard means the function vanishes beyond it."""
        raise NotImplementedError

    def gamma_integral(self) -> float:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class GaussianQuadratic(LogConcaveFunction):
    """f(x) = exp(-x'Ax/2) for positive semidefinite A."""

    a: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.a, dtype=float)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError("quadratic coefficient must be a square matrix")
        if not np.allclose(m, m.T, atol=1e-12):
            raise DomainError("quadratic coefficient must be symmetric")
        w = np.linalg.eigvalsh(m)
        if np.min(w) < -1e-12:
            raise DomainError("quadratic coefficient must be positive semidefinite")
        object.__setattr__(self, "a", m)

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def evaluate(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.exp(-0.5 * np.einsum("ki,ij,kj->k", pts, self.a, pts))

    def search_radius(self):
        if self.dim != 1:
            raise UnsupportedFamilyError("1D search only")
        a = float(self.a[0, 0])
        if a <= 0.0:
            return math.inf, False
        # beyond this the value is under e^-60 of the peak
        return math.sqrt(120.0 / a), False

    def gamma_integral(self) -> float:
        sign, logdet = np.linalg.slogdet(np.eye(self.dim) + self.a)
        return float(math.exp(-0.5 * logdet))


@dataclass(frozen=True, eq=False)
class BodyIndicator(LogConcaveFunction):
    """Indicator of a symmetric convex body."""

    body: object

    @property
    def dim(self) -> int:
        return self.body.dim

    def evaluate(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.asarray(self.body.membership(pts), dtype=float)

    def search_radius(self):
        e1 = np.zeros((1, self.dim))
        e1[0, 0] = 1.0
        return float(np.asarray(self.body.support(e1))[0]), True

    def gamma_integral(self) -> float:
        return _geom.gaussian_measure_exact(self.body)


@dataclass(frozen=True, eq=False)
class TabulatedEven1D(LogConcaveFunction):
    """Even function on the line given by positive samples on [0, R].

    Log-linear interpolation between knots, zero beyond the last knot.
    Construction enforces midpoint log-concavity of the table: the
    slopes of log v over the knot grid must be non-increasing to 1e-10.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape or g.size < 2:
            raise DomainError("grid and values must be matching 1D arrays")
        if g[0] != 0.0 or np.any(np.diff(g) <= 0.0):
            raise DomainError("grid must increase from 0")
        if np.any(v <= 0.0):
            raise DomainError("table values must be positive")
        logv = np.log(v)
        slopes = np.diff(logv) / np.diff(g)
        if np.any(np.diff(slopes) > 1e-10):
            raise DomainError("table is not log-concave")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_logv", logv)

    @property
    def dim(self) -> int:
        return 1

    def evaluate(self, pts):
        pts = np.asarray(pts, dtype=float)
        r = np.abs(pts.reshape(-1))
        out = np.exp(np.interp(r, self.grid, self._logv, right=-np.inf))
        out[r > self.grid[-1]] = 0.0
        return out

    def search_radius(self):
        return float(self.grid[-1]), True

    def gamma_integral(self) -> float:
        total = 0.0
        for lo, hi in zip(self.grid[:-1], self.grid[1:]):
            total += adaptive_integral(
                lambda x: self._eval_1d(x) * _norm_pdf(x), float(lo), float(hi),
                rtol=1e-11)
        return 2.0 * total


# ---------------------------------------------------------------------------
# sup-convolution


@dataclass(frozen=True)
class SupConvolutionSpec:
    f: LogConcaveFunction
    g: LogConcaveFunction
    p: float
    t: float

    def __post_init__(self):
        if self.f.dim != self.g.dim:
            raise DomainError("function dimensions differ")
        p = float(self.p)
        if math.isnan(p) or p < 0.0:
            raise DomainError("exponent p must be >= 0")
        t = float(self.t)
        if not 0.0 <= t <= 1.0:
            raise DomainError(f"interpolation weight t={t} outside [0, 1]")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "t", t)


@dataclass(frozen=True)
class SearchSpec:
    grid_points: int = 4097
    polish_tol: float = 1e-10
    radius: Optional[float] = None


def _gaussian_pair_form(spec):
    """Quadratic form of the p=0 combination when both members allow it."""
    if spec.p != 0.0:
        return None
    if not (isinstance(spec.f, GaussianQuadratic)
            and isinstance(spec.g, GaussianQuadratic)):
        return None
    wa = np.linalg.eigvalsh(spec.f.a)
    wb = np.linalg.eigvalsh(spec.g.a)
    if np.min(wa) <= 1e-12 or np.min(wb) <= 1e-12:
        return None
    inv = (1.0 - spec.t) * np.linalg.inv(spec.f.a) + spec.t * np.linalg.inv(spec.g.a)
    return np.linalg.inv(inv)


def _indicator_pair(spec):
    if isinstance(spec.f, BodyIndicator) and isinstance(spec.g, BodyIndicator):
        # the zero-product convention makes M_p of two indicators their
        # pointwise AND for every p, so h is the combination's indicator
        return _geom.MinkowskiCombination(spec.f.body, spec.g.body, spec.t)
    return None


def _grid_sup_batch(f_ev, g_ev, p, t, xs, hard_f, hard_g, search):
    """Lower bound of the combination at each query point, vectorized.

    For even radially-decreasing members both factors of the objective
    decrease monotonically once x0 leaves the hull of {0, x/(1-t)} (the
    peaks of the f-factor and the g-factor), so that hull intersected
    with any hard supports is an exact search window; the grid plus a
    golden-section polish of the bracketing cell then gives a certified
    lower bound. Returns (values, converged). An empty window means
    every decomposition has a vanishing factor, so 0 is exact there.
    """
    xs = np.asarray(xs, dtype=float)
    s = 1.0 - t
    anchor = xs / s
    lo = np.maximum(np.minimum(0.0, anchor), -hard_f)
    hi = np.minimum(np.maximum(0.0, anchor), hard_f)
    if math.isfinite(hard_g):
        lo = np.maximum(lo, (xs - t * hard_g) / s)
        hi = np.minimum(hi, (xs + t * hard_g) / s)
    if search.radius is not None:
        lo = np.maximum(lo, -search.radius)
        hi = np.minimum(hi, search.radius)
    m = xs.size
    vals = np.zeros(m)
    conv = np.ones(m, dtype=bool)
    live = lo <= hi
    if not np.any(live):
        return vals, conv
    lo_l, hi_l, xs_l = lo[live], hi[live], xs[live]

    def objective(x0):
        return power_mean_vec(f_ev(x0), g_ev((xs_l - s * x0) / t), t, p)

    k = search.grid_points
    u = np.linspace(0.0, 1.0, k)
    x0g = lo_l[None, :] + (hi_l - lo_l)[None, :] * u[:, None]
    grid_vals = power_mean_vec(
        f_ev(x0g), g_ev((xs_l[None, :] - s * x0g) / t), t, p)
    j = np.argmax(grid_vals, axis=0)
    best = grid_vals[j, np.arange(j.size)]

    # golden-section polish inside the bracketing cells
    a = np.maximum(lo_l, x0g[np.maximum(j - 1, 0), np.arange(j.size)])
    b = np.minimum(hi_l, x0g[np.minimum(j + 1, k - 1), np.arange(j.size)])
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = objective(c)
    fd = objective(d)
    for _ in range(90):
        if np.max(b - a) < search.polish_tol:
            break
        take = fc < fd
        a = np.where(take, c, a)
        b = np.where(take, b, d)
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc = objective(c)
        fd = objective(d)
    best = np.maximum(best, np.maximum(fc, fd))
    vals[live] = best
    width = np.maximum(np.abs(lo_l), np.abs(hi_l)) + 1.0
    conv[live] = (b - a) <= np.maximum(search.polish_tol, 1e-14 * width)
    return vals, conv


def _sup_1d(spec, xs, search):
    rad_f, hf = spec.f.search_radius()
    rad_g, hg = spec.g.search_radius()
    return _grid_sup_batch(spec.f._eval_1d, spec.g._eval_1d, spec.p, spec.t,
                           xs, rad_f if hf else math.inf,
                           rad_g if hg else math.inf, search)


def sup_convolution(spec: SupConvolutionSpec, x, search: SearchSpec = None,
                    with_flag: bool = False):
    """Sup over decompositions x = (1-t)x0 + t x1 of M_p(f(x0), g(x1)).

    Closed forms: Gaussian pair at p=0 and indicator pairs (any p, the
    combination's indicator). Otherwise a 1D grid search returning a
    certified lower bound; with_flag=True appends a convergence bool.
    """
    if search is None:
        search = SearchSpec()
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (spec.f.dim,):
        raise DomainError(f"point shape {x.shape} does not match dim {spec.f.dim}")
    t = spec.t
    if t == 0.0 or t == 1.0:
        fn = spec.f if t == 0.0 else spec.g
        val = float(fn.evaluate(x[None, :])[0])
        return (val, True) if with_flag else val
    form = _gaussian_pair_form(spec)
    if form is not None:
        val = float(math.exp(-0.5 * float(x @ form @ x)))
        return (val, True) if with_flag else val
    mc = _indicator_pair(spec)
    if mc is not None:
        val = 1.0 if _geom.combo_membership(mc, x) == "inside" else 0.0
        return (val, True) if with_flag else val
    if spec.p == math.inf:
        raise UnsupportedFamilyError(
            "p=inf combinations are supported for indicator pairs only")
    if spec.f.dim != 1:
        raise UnsupportedFamilyError(
            "no closed form for this pair; search is 1D only")
    vals, conv = _sup_1d(spec, x, search)
    val = float(vals[0])
    return (val, bool(conv[0])) if with_flag else val


# ---------------------------------------------------------------------------
# integral comparison checks


def exponent_map(p: float, n: int) -> float:
    """Conclusion exponent p/(1+np), with the p=inf limit 1/n."""
    if n < 1:
        raise DomainError("dimension must be positive")
    p = float(p)
    if math.isnan(p) or p < 0.0:
        raise DomainError("exponent p must be >= 0")
    if p == math.inf:
        return 1.0 / n
    return p / (1.0 + n * p)


def homogeneous_exponent(p: float, n: int, beta: float) -> float:
    """Conclusion exponent (beta-1)p/((beta-1)+beta*n*p) for beta > 1."""
    if n < 1:
        raise DomainError("dimension must be positive")
    beta = float(beta)
    if not beta > 1.0:
        raise DomainError("homogeneity degree beta must exceed 1")
    p = float(p)
    if math.isnan(p) or p < 0.0:
        raise DomainError("exponent p must be >= 0")
    if p == math.inf:
        return (beta - 1.0) / (beta * n)
    return (beta - 1.0) * p / ((beta - 1.0) + beta * n * p)


@dataclass(frozen=True)
class IntegratorSpec:
    nodes: int = 201
    rtol: float = 1e-8
    samples: int = 1_000_000
    seed: int = 0


@dataclass(frozen=True)
class BblReport:
    lhs: float
    rhs: float
    gap: float
    tolerance: float
    exponent: float
    lower_bound_route: bool
    search_converged: bool
    lhs_std_error: float = 0.0
    unreliable: bool = False


def _indicator_bbl(spec, mc, integrator):
    n = spec.f.dim
    r = exponent_map(spec.p, n)
    try:
        lhs = _geom.gaussian_measure_exact(mc)
        m0 = _geom.gaussian_measure_exact(spec.f.body)
        m1 = _geom.gaussian_measure_exact(spec.g.body)
        se = (0.0, 0.0, 0.0)
        tol = 1e-12
    except UnsupportedFamilyError:
        est = _geom.gaussian_measure_mc(mc, samples=integrator.samples,
                                        seed=integrator.seed)
        e0 = _geom.gaussian_measure_mc(spec.f.body, samples=integrator.samples,
                                       seed=integrator.seed + 1)
        e1 = _geom.gaussian_measure_mc(spec.g.body, samples=integrator.samples,
                                       seed=integrator.seed + 2)
        lhs, m0, m1 = est.estimate, e0.estimate, e1.estimate
        se = (est.std_error, e0.std_error, e1.std_error)
        tol = None
        if est.unreliable or e0.unreliable or e1.unreliable:
            return BblReport(lhs, float("nan"), float("nan"), float("inf"), r,
                             False, True, se[0], True)
    rhs = power_mean(m0, m1, spec.t, r)
    if tol is None:
        # delta method through the power mean for the MC route
        dm0 = _power_mean_partial(m0, m1, spec.t, r, 0)
        dm1 = _power_mean_partial(m0, m1, spec.t, r, 1)
        tol = 3.0 * math.sqrt(se[0] ** 2 + (dm0 * se[1]) ** 2 + (dm1 * se[2]) ** 2)
    return BblReport(lhs, rhs, lhs - rhs, tol, r, False, True, se[0], False)


def _power_mean_partial(x, y, t, r, which):
    if x <= 0.0 or y <= 0.0:
        return 0.0
    if r == 0.0:
        m = power_mean(x, y, t, 0.0)
        return m * ((1.0 - t) / x if which == 0 else t / y)
    inner = (1.0 - t) * x ** r + t * y ** r
    coef = (1.0 - t) if which == 0 else t
    base = x if which == 0 else y
    return inner ** (1.0 / r - 1.0) * coef * base ** (r - 1.0)


def bbl_check(spec: SupConvolutionSpec, integrator: IntegratorSpec = None) -> BblReport:
    """Integral comparison: lhs = int h dgamma vs the power-mean rhs.

    rhs = M^t_{p/(1+np)}(int f, int g). The grid route makes lhs a
    certified lower bound, so gap >= -tolerance passes and a negative
    within the slack is inconclusive rather than a refutation.
    """
    if integrator is None:
        integrator = IntegratorSpec()
    n = spec.f.dim
    mc = _indicator_pair(spec)
    if mc is not None and spec.t not in (0.0, 1.0):
        return _indicator_bbl(spec, mc, integrator)
    r = exponent_map(spec.p, n)
    f_int = spec.f.gamma_integral()
    g_int = spec.g.gamma_integral()
    rhs = power_mean(f_int, g_int, spec.t, r)
    if spec.t == 0.0 or spec.t == 1.0:
        lhs = f_int if spec.t == 0.0 else g_int
        return BblReport(lhs, rhs, lhs - rhs, 1e-12, r, False, True)
    form = _gaussian_pair_form(spec)
    if form is not None:
        sign, logdet = np.linalg.slogdet(np.eye(n) + form)
        lhs = float(math.exp(-0.5 * logdet))
        return BblReport(lhs, rhs, lhs - rhs, 1e-12, r, False, True)
    if spec.p == math.inf:
        raise UnsupportedFamilyError(
            "p=inf combinations are supported for indicator pairs only")
    if n != 1:
        raise UnsupportedFamilyError("grid comparison is 1D only")
    search = SearchSpec()
    hv, conv = _sup_1d(spec, _GH_X, search)
    lhs = float(np.sum(_GH_W * hv))
    tol = max(integrator.rtol * abs(lhs), 1e-10)
    return BblReport(lhs, rhs, lhs - rhs, tol, r, True, bool(np.all(conv)))


def _check_radially_decreasing(fn, radius, name):
    xs = np.linspace(0.0, radius, 769)
    v = np.asarray(fn(xs), dtype=float)
    if np.any(~np.isfinite(v)) or np.any(v < 0.0):
        raise DomainError(f"{name} must be finite and nonnegative")
    scale = max(float(np.max(v)), 1.0)
    if np.any(np.diff(v) > 1e-12 * scale):
        raise DomainError(f"{name} is not radially decreasing")
    w = np.asarray(fn(-xs), dtype=float)
    if np.max(np.abs(w - v)) > 1e-12 * scale:
        raise DomainError(f"{name} is not even")


def bbl_homogeneous_check(f, g, p: float, t: float, beta: float,
                          integrator: IntegratorSpec = None,
                          radius: float = None) -> BblReport:
    """Same comparison against the reference density exp(-|x|^beta).

    1D quadrature implementation; f and g are vectorized callables that
    must be even and radially decreasing (checked on a sample ray). The
    conclusion exponent is (beta-1)p/((beta-1)+beta*n*p).
    """
    if integrator is None:
        integrator = IntegratorSpec()
    beta = float(beta)
    r = homogeneous_exponent(p, 1, beta)
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"interpolation weight t={t} outside [0, 1]")
    if radius is None:
        radius = max(92.0 ** (1.0 / beta), 12.0)
    z = 2.0 * math.gamma(1.0 + 1.0 / beta)
    if not (math.isfinite(z) and z > 0.0):
        raise DomainError("reference measure failed to normalize")
    _check_radially_decreasing(f, radius, "f")
    _check_radially_decreasing(g, radius, "g")

    def dens(x):
        return np.exp(-np.abs(x) ** beta) / z

    f_int = adaptive_integral(lambda x: np.asarray(f(x)) * dens(x),
                              -radius, radius, rtol=1e-10)
    g_int = adaptive_integral(lambda x: np.asarray(g(x)) * dens(x),
                              -radius, radius, rtol=1e-10)
    rhs = power_mean(f_int, g_int, t, r)
    if t == 0.0 or t == 1.0:
        lhs = f_int if t == 0.0 else g_int
        return BblReport(lhs, rhs, lhs - rhs, 1e-10, r, False, True)
    if p == math.inf:
        raise UnsupportedFamilyError("p=inf needs indicator pairs")
    search = SearchSpec()
    flags = [True]

    def h_batch(xs):
        vals, conv = _grid_sup_batch(f, g, p, t, xs, math.inf, math.inf, search)
        flags[0] = flags[0] and bool(np.all(conv))
        return vals

    lhs = adaptive_integral(lambda x: h_batch(x) * dens(x),
                            -radius, radius, rtol=1e-8)
    tol = max(integrator.rtol * abs(lhs), 1e-10)
    return BblReport(lhs, rhs, lhs - rhs, tol, r, True, flags[0])


# ---------------------------------------------------------------------------
# the three-factor proof chain on the closed-form Gaussian family


@dataclass(frozen=True)
class HolderChain:
    terms: Tuple[float, float, float, float]
    margins: Tuple[float, float, float]

    @property
    def ok(self) -> bool:
        return all(m >= -1e-7 for m in self.margins)


def holder_chain_check(a: float, b: float, p: float, t: float) -> HolderChain:
    """Term-by-term chain behind the integral comparison, 1D Gaussians.

    T1 = int h dgamma, T2 = exp(int log h dmu_t - D(mu_t)), T3 = the
    product of the power-mean factors, T4 = the conclusion rhs. The
    chain T1 >= T2 >= T3 >= T4 splits the proof into the duality step,
    the admissibility/entropy step, and the Holder step.
    """
    a = float(a)
    b = float(b)
    if a < 0.0 or b < 0.0:
        raise DomainError("quadratic coefficients must be nonnegative")
    p = float(p)
    if math.isnan(p) or p < 0.0 or p == math.inf:
        raise DomainError("chain requires finite p >= 0")
    t = float(t)
    if not 0.0 < t < 1.0:
        raise DomainError("chain requires interior t")
    s0 = 1.0 / math.sqrt(1.0 + a)
    s1 = 1.0 / math.sqrt(1.0 + b)
    st = (1.0 - t) * s0 + t * s1

    def relent(sig):
        v = sig * sig
        return 0.5 * (v - 1.0 - math.log(v))

    d0, d1, dt = relent(s0), relent(s1), relent(st)
    int_f = -0.5 * a * s0 * s0
    int_g = -0.5 * b * s1 * s1
    spec = SupConvolutionSpec(GaussianQuadratic(np.array([[a]])),
                              GaussianQuadratic(np.array([[b]])), p, t)
    if p == 0.0 and a > 0.0 and b > 0.0:
        c = 1.0 / ((1.0 - t) / a + t / b)
        t1 = 1.0 / math.sqrt(1.0 + c)
        int_h = -0.5 * c * st * st
    else:
        hv, _ = _sup_1d(spec, _GH_X, SearchSpec())
        t1 = float(np.sum(_GH_W * hv))
        hs, _ = _sup_1d(spec, st * _GH_X, SearchSpec())
        int_h = float(np.sum(_GH_W * np.log(np.maximum(hs, 1e-300))))
    t2 = math.exp(int_h - dt)
    t3 = (power_mean(math.exp(int_f), math.exp(int_g), t, p)
          * ((1.0 - t) * math.exp(-d0) + t * math.exp(-d1)))
    r = exponent_map(p, 1)
    t4 = power_mean(1.0 / math.sqrt(1.0 + a), 1.0 / math.sqrt(1.0 + b), t, r)
    scale = max(t1, 1e-12)
    return HolderChain((t1, t2, t3, t4),
                       ((t1 - t2) / scale, (t2 - t3) / scale, (t3 - t4) / scale))


# ---------------------------------------------------------------------------
# Donsker-Varadhan duality


@dataclass(frozen=True)
class DiscreteMeasure:
    points: Tuple[float, ...]
    weights: Tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or len(self.points) != w.size:
            raise DomainError("points and weights must match")
        if np.any(w < 0.0) or abs(float(np.sum(w)) - 1.0) > 1e-12:
            raise DomainError("weights must be a probability vector")


@dataclass(frozen=True)
class GaussianLine:
    """Standard Gaussian on the line, truncated for quadrature."""

    radius: float = 12.0


@dataclass(frozen=True)
class DVMember:
    name: str
    weights: Optional[Sequence[float]] = None
    density: Optional[Callable] = None
    point_mass: bool = False


@dataclass(frozen=True)
class DvMemberResult:
    name: str
    value: float
    slack: float
    rejected: bool
    note: str


@dataclass(frozen=True)
class DvReport:
    lhs: float
    sup_over_family: float
    gibbs_value: float
    equality_residual: float
    tolerance: float
    bounds_ok: bool
    members: Tuple[DvMemberResult, ...]


def _dv_discrete(phi_vals, nu_w, members, tol):
    nu_w = np.asarray(nu_w, dtype=float)
    live = nu_w > 0.0
    lhs = float(logsumexp(phi_vals[live] + np.log(nu_w[live])))
    results = []
    for mem in members:
        if mem.point_mass:
            results.append(DvMemberResult(mem.name, float("nan"), float("nan"),
                                          True, "point mass is not a weight vector"))
            continue
        w = np.asarray(mem.weights, dtype=float)
        if w.shape != nu_w.shape:
            results.append(DvMemberResult(mem.name, float("nan"), float("nan"),
                                          True, "weight vector length mismatch"))
            continue
        if np.any(w < -1e-15) or abs(float(np.sum(w)) - 1.0) > 1e-10:
            results.append(DvMemberResult(mem.name, float("nan"), float("nan"),
                                          True, "not a probability vector"))
            continue
        if np.any((w > 0.0) & ~live):
            results.append(DvMemberResult(
                mem.name, float("nan"), float("nan"), True,
                "mass outside the support of the reference"))
            continue
        pos = w > 0.0
        val = float(np.sum(w[pos] * phi_vals[pos])
                    - np.sum(w[pos] * np.log(w[pos] / nu_w[pos])))
        results.append(DvMemberResult(mem.name, val, lhs - val, False, ""))
    gibbs = np.zeros_like(nu_w)
    gibbs[live] = np.exp(phi_vals[live] + np.log(nu_w[live]) - lhs)
    pos = gibbs > 0.0
    gibbs_value = float(np.sum(gibbs[pos] * phi_vals[pos])
                        - np.sum(gibbs[pos] * np.log(gibbs[pos] / nu_w[pos])))
    return lhs, gibbs_value, results


def _dv_gaussian(phi, radius, members, tol):
    lhs = math.log(adaptive_integral(
        lambda x: np.exp(phi(x)) * _norm_pdf(x), -radius, radius, rtol=1e-10))

    def law_value(u_fn, name):
        mass = adaptive_integral(lambda x: u_fn(x) * _norm_pdf(x),
                                 -radius, radius, rtol=1e-10)
        if not (math.isfinite(mass) and mass > 1e-12):
            return None, f"{name}: density has no mass against the reference"

        def un(x):
            return np.asarray(u_fn(x), dtype=float) / mass

        mean_phi = adaptive_integral(lambda x: un(x) * phi(x) * _norm_pdf(x),
                                     -radius, radius, rtol=1e-10)

        def ulogu(x):
            u = un(x)
            return np.where(u > 0.0, u * np.log(np.maximum(u, 1e-300)), 0.0)

        rel = adaptive_integral(lambda x: ulogu(x) * _norm_pdf(x),
                                -radius, radius, rtol=1e-10)
        return mean_phi - rel, ""

    results = []
    for mem in members:
        if mem.point_mass:
            results.append(DvMemberResult(
                mem.name, float("nan"), float("nan"), True,
                "point mass is not absolutely continuous"))
            continue
        if mem.density is None:
            results.append(DvMemberResult(mem.name, float("nan"), float("nan"),
                                          True, "no density supplied"))
            continue
        val, note = law_value(mem.density, mem.name)
        if val is None:
            results.append(DvMemberResult(mem.name, float("nan"), float("nan"),
                                          True, note))
            continue
        results.append(DvMemberResult(mem.name, val, lhs - val, False, ""))
    gibbs_value, _ = law_value(lambda x: np.exp(np.asarray(phi(x))), "gibbs")
    return lhs, gibbs_value, results


def dv_duality_check(phi, nu, mu_family: Sequence[DVMember]) -> DvReport:
    """log int e^phi dnu >= int phi dmu - D(mu||nu), equality at Gibbs.

    Discrete references take phi as values or a callable over the atoms
    and members as weight vectors; the Gaussian line takes vectorized
    callables with members given by densities relative to nu. Members
    that are not absolutely continuous are rejected with a diagnostic.
    """
    if isinstance(nu, DiscreteMeasure):
        pts = np.asarray(nu.points, dtype=float)
        phi_vals = np.asarray(phi(pts) if callable(phi) else phi, dtype=float)
        if phi_vals.shape != pts.shape:
            raise DomainError("phi values must align with the atoms")
        tol = 1e-8
        lhs, gibbs_value, results = _dv_discrete(
            phi_vals, nu.weights, mu_family, tol)
    elif isinstance(nu, GaussianLine):
        if not callable(phi):
            raise DomainError("the Gaussian reference needs a callable phi")
        tol = 1e-6
        lhs, gibbs_value, results = _dv_gaussian(
            phi, nu.radius, mu_family, tol)
    else:
        raise UnsupportedFamilyError(
            "reference must be DiscreteMeasure or GaussianLine")
    accepted = [r.value for r in results if not r.rejected]
    sup = max(accepted) if accepted else float("-inf")
    residual = abs(lhs - gibbs_value)
    bounds_ok = residual <= tol and all(
        r.slack >= -tol for r in results if not r.rejected)
    return DvReport(lhs, sup, gibbs_value, residual, tol, bounds_ok,
                    tuple(results))
