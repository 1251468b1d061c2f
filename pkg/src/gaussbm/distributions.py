"""Even strongly log-concave distributions: validation, OU smoothing, sampling.

Four families are representable: centered Gaussians, even 1D potentials with
U'' >= 1 on a truncated domain, coordinate products of those, and the standard
Gaussian restricted to a symmetric convex body. Potential callables must be
numpy-vectorized (accept arrays of any shape).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import as_spd, spd_sqrt
from .errors import SamplingError, UnsupportedFamilyError
from .quadrature import adaptive_integral, panel_nodes
from .rng import stream

EVENNESS_GRID = 257
DEFAULT_RADIUS = 10.0


@dataclass(frozen=True)
class GaussianZeroMean:
    """Centered Gaussian N(0, cov). Construction accepts any SPD covariance;
    strong log-concavity (cov <= identity) is reported by validate, not
    enforced here, so invalid inputs remain representable for diagnostics."""

    cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "cov", as_spd(self.cov, "cov"))

    @property
    def dim(self) -> int:
        return self.cov.shape[0]


@dataclass(frozen=True)
class OneDPotential:
    """Even 1D density exp(-u(x)) truncated to [-radius, radius].

    u, du, d2u: potential and derivatives, numpy-vectorized.
    """

    u: Callable[[np.ndarray], np.ndarray]
    du: Callable[[np.ndarray], np.ndarray]
    d2u: Callable[[np.ndarray], np.ndarray]
    radius: float = DEFAULT_RADIUS

    def __post_init__(self):
        r = float(self.radius)
        if not (r > 0 and math.isfinite(r)):
            raise ValueError("radius must be positive and finite")
        object.__setattr__(self, "radius", r)

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class ProductOfOneD:
    factors: tuple

    def __post_init__(self):
        fs = tuple(self.factors)
        if not fs or not all(isinstance(f, OneDPotential) for f in fs):
            raise ValueError("factors must be a nonempty sequence of OneDPotential")
        object.__setattr__(self, "factors", fs)

    @property
    def dim(self) -> int:
        return len(self.factors)


@dataclass(frozen=True)
class TruncatedGaussian:
    """Standard Gaussian conditioned on a symmetric convex body.

    The body is duck-typed: it provides .dim and a vectorized
    .contains(points) -> bool array. Strong log-concavity holds by
    construction for any convex body.
    """

    body: object

    @property
    def dim(self) -> int:
        return int(self.body.dim)


@dataclass(frozen=True)
class Diagnostic:
    even_ok: bool
    slc_ok: bool
    worst_violation: float


@dataclass(frozen=True)
class SampleSet:
    dimension: int
    points: np.ndarray
    seed: int
    generator_id: str


def _axis_grid(radius: float) -> np.ndarray:
    return np.linspace(-radius, radius, EVENNESS_GRID)


def validate(dist) -> Diagnostic:
    """Evenness and strong log-concavity diagnostic.

    Gaussians are checked through eigenvalues, 1D potentials through grid
    values of u and sampled second differences. A structurally malformed
    input (nonconvex body, non-even potential beyond repair) raises.
    """
    if isinstance(dist, GaussianZeroMean):
        w = np.linalg.eigvalsh(dist.cov)
        worst = max(0.0, float(w[-1]) - 1.0)
        return Diagnostic(even_ok=True, slc_ok=w[-1] <= 1.0 + 1e-10, worst_violation=worst)
    if isinstance(dist, OneDPotential):
        return _validate_factor(dist)
    if isinstance(dist, ProductOfOneD):
        diags = [_validate_factor(f) for f in dist.factors]
        return Diagnostic(
            even_ok=all(d.even_ok for d in diags),
            slc_ok=all(d.slc_ok for d in diags),
            worst_violation=max(d.worst_violation for d in diags),
        )
    if isinstance(dist, TruncatedGaussian):
        return _validate_body(dist.body)
    raise UnsupportedFamilyError(f"not a representable family: {type(dist).__name__}")


def _validate_factor(f: OneDPotential) -> Diagnostic:
    x = _axis_grid(f.radius)
    ux = np.asarray(f.u(x), dtype=float)
    if not np.all(np.isfinite(ux)):
        raise ValueError("potential not finite on its domain")
    # evenness in density terms: |rho(x) - rho(-x)| <= 1e-12 rho(x)
    even_gap = float(np.max(np.abs(ux - ux[::-1])))
    even_ok = even_gap <= 1e-12 * (1.0 + float(np.max(np.abs(ux))))
    h = x[1] - x[0]
    second_diff = (ux[2:] - 2 * ux[1:-1] + ux[:-2]) / (h * h)
    curv = np.asarray(f.d2u(x), dtype=float)
    slc_gap = max(1.0 - float(second_diff.min()), 1.0 - float(curv.min()))
    slc_ok = slc_gap <= 1e-6
    worst = max(0.0, even_gap, slc_gap)
    return Diagnostic(even_ok=even_ok, slc_ok=slc_ok, worst_violation=worst)


def _validate_body(body) -> Diagnostic:
    n = int(body.dim)
    gen = stream(2026, "validate-body")
    pts = gen.normal(size=(4096, n))
    inside = np.asarray(body.contains(pts), dtype=bool)
    mirrored = np.asarray(body.contains(-pts), dtype=bool)
    if not np.array_equal(inside, mirrored):
        return Diagnostic(even_ok=False, slc_ok=True,
                          worst_violation=float(np.mean(inside != mirrored)))
    interior = pts[inside]
    if interior.shape[0] >= 8:
        half = interior.shape[0] // 2
        mids = 0.5 * (interior[:half] + interior[half:2 * half])
        if not np.all(np.asarray(body.contains(mids), dtype=bool)):
            raise ValueError("body fails midpoint convexity: not a convex body")
    return Diagnostic(even_ok=True, slc_ok=True, worst_violation=0.0)


# ---------------------------------------------------------------------------
# Ornstein-Uhlenbeck smoothing


def ou_smooth(dist, epsilon: float):
    """Law of sqrt(1-eps) X + sqrt(eps) Z' for independent standard normal Z'.

    Gaussians transform exactly; 1D families go through kernel-smoothed
    potentials whose Hessian lands in [1, 1/eps].
    """
    eps = float(epsilon)
    if not (0.0 < eps < 0.5):
        raise ValueError("epsilon must lie in the open interval (0, 1/2)")
    if isinstance(dist, GaussianZeroMean):
        n = dist.dim
        return GaussianZeroMean((1.0 - eps) * dist.cov + eps * np.eye(n))
    if isinstance(dist, OneDPotential):
        return _evolute_1d(_log_density_fn(dist), dist.radius, eps)
    if isinstance(dist, ProductOfOneD):
        return ProductOfOneD(tuple(ou_smooth(f, eps) for f in dist.factors))
    if isinstance(dist, TruncatedGaussian):
        box = getattr(dist.body, "half_widths", None)
        if box is None:
            raise UnsupportedFamilyError(
                "ou_smooth on a truncated Gaussian requires a box body; "
                "the evolute of a general body is not a representable family")
        factors = []
        for a in np.asarray(box, dtype=float):
            factors.append(_evolute_1d(_truncated_log_density(a), a, eps))
        if len(factors) == 1:
            return factors[0]
        return ProductOfOneD(tuple(factors))
    raise UnsupportedFamilyError(f"not a representable family: {type(dist).__name__}")


def _log_density_fn(f: OneDPotential):
    def logrho(u):
        return -np.asarray(f.u(u), dtype=float)

    return logrho


def _truncated_log_density(a: float):
    def logrho(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(invalid="ignore"):
            return np.where(np.abs(u) <= a, -0.5 * u * u, -np.inf)

    return logrho


def _evolute_1d(logrho, radius: float, eps: float) -> OneDPotential:
    """Kernel-smoothed potential of the OU evolute of exp(logrho) on [-R, R]."""
    s = math.sqrt(1.0 - eps)
    w = math.sqrt(eps)
    new_radius = s * radius + 8.0 * w
    # fixed panel layout over the kernel window, scaled per evaluation point
    unit_nodes, unit_weights = panel_nodes(np.linspace(0.0, 1.0, 49), order=8)

    def moments(x):
        xf = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        c = xf / s
        lo = np.maximum(-radius, c - 10.0 * w / s)
        hi = np.minimum(radius, c + 10.0 * w / s)
        span = hi - lo
        u = lo[:, None] + span[:, None] * unit_nodes[None, :]
        wt = span[:, None] * unit_weights[None, :]
        g = (xf[:, None] - s * u) / eps
        e = logrho(u) - 0.5 * eps * g * g
        m = np.max(e, axis=1)
        m = np.where(np.isfinite(m), m, 0.0)
        r = np.exp(e - m[:, None]) * wt
        i0 = r.sum(axis=1)
        i1 = (g * r).sum(axis=1)
        i2 = (g * g * r).sum(axis=1)
        return m, i0, i1, i2

    def u_fn(x):
        shape = np.shape(x)
        m, i0, _, _ = moments(x)
        with np.errstate(divide="ignore"):
            out = -(m + np.log(i0))
        return out.reshape(shape) if shape else float(out[0])

    def du_fn(x):
        shape = np.shape(x)
        _, i0, i1, _ = moments(x)
        out = i1 / i0
        return out.reshape(shape) if shape else float(out[0])

    def d2u_fn(x):
        shape = np.shape(x)
        _, i0, i1, i2 = moments(x)
        r1 = i1 / i0
        out = 1.0 / eps - i2 / i0 + r1 * r1
        return out.reshape(shape) if shape else float(out[0])

    return OneDPotential(u=u_fn, du=du_fn, d2u=d2u_fn, radius=new_radius)


# ---------------------------------------------------------------------------
# Sampling


def sample(dist, count: int, seed: int) -> SampleSet:
    count = int(count)
    if count <= 0:
        raise ValueError("count must be positive")
    if isinstance(dist, GaussianZeroMean):
        gen = stream(seed, "gaussian-cov")
        z = gen.standard_normal((count, dist.dim))
        pts = z @ spd_sqrt(dist.cov).T
        return SampleSet(dist.dim, pts, seed, "gaussian-cov")
    if isinstance(dist, OneDPotential):
        pts = _sample_factor(dist, count, seed, "oned-invcdf-0")[:, None]
        return SampleSet(1, pts, seed, "oned-invcdf")
    if isinstance(dist, ProductOfOneD):
        cols = [
            _sample_factor(f, count, seed, f"oned-invcdf-{i}")
            for i, f in enumerate(dist.factors)
        ]
        return SampleSet(dist.dim, np.column_stack(cols), seed, "oned-invcdf")
    if isinstance(dist, TruncatedGaussian):
        pts = _sample_rejection(dist.body, count, seed)
        return SampleSet(dist.dim, pts, seed, "truncgauss-rejection")
    raise UnsupportedFamilyError(f"not a representable family: {type(dist).__name__}")


def _inverse_cdf_table(f: OneDPotential):
    grid = np.linspace(-f.radius, f.radius, 4097)
    logrho = -np.asarray(f.u(grid), dtype=float)
    rho = np.exp(logrho - logrho.max())
    # trapezoid cumulative is plenty for sampling; quadrature handles cdf_1d
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * np.diff(grid))])
    cum /= cum[-1]
    keep = np.concatenate([[True], np.diff(cum) > 0])
    return cum[keep], grid[keep]


def _sample_factor(f: OneDPotential, count, seed, stream_id) -> np.ndarray:
    cdf_vals, grid = _inverse_cdf_table(f)
    u = stream(seed, stream_id).uniform(size=count)
    return np.interp(u, cdf_vals, grid)


def _sample_rejection(body, count, seed) -> np.ndarray:
    n = int(body.dim)
    gen = stream(seed, "truncgauss-rejection")
    out = np.empty((count, n))
    got = 0
    attempts = 0
    block = max(4096, 2 * count)
    while got < count:
        z = gen.standard_normal((block, n))
        attempts += block
        keep = z[np.asarray(body.contains(z), dtype=bool)]
        take = min(count - got, keep.shape[0])
        out[got:got + take] = keep[:take]
        got += take
        if attempts >= 2_000_000 and got / attempts < 1e-6:
            raise SamplingError(
                f"rejection acceptance rate {got / attempts:.2e} below 1e-6 "
                f"after {attempts} proposals; body mass too small")
    return out


# ---------------------------------------------------------------------------
# 1D cumulative distribution


def unnormalized_density(dist):
    """Vectorized density up to a constant, with its truncation radius."""
    if isinstance(dist, GaussianZeroMean):
        if dist.dim != 1:
            raise UnsupportedFamilyError("cdf_1d needs a one-dimensional input")
        s2 = float(dist.cov[0, 0])

        def rho(x):
            x = np.asarray(x, dtype=float)
            return np.exp(-0.5 * x * x / s2)

        return rho, DEFAULT_RADIUS * math.sqrt(s2)
    if isinstance(dist, OneDPotential):
        def rho(x):
            return np.exp(-np.asarray(dist.u(x), dtype=float))

        return rho, dist.radius
    raise UnsupportedFamilyError(
        f"cdf_1d supports 1D Gaussians and OneDPotential, got {type(dist).__name__}")


def cdf_1d(dist, x: float) -> float:
    if isinstance(dist, GaussianZeroMean) and dist.dim == 1:
        s = math.sqrt(float(dist.cov[0, 0]))
        return 0.5 * math.erfc(-float(x) / (s * math.sqrt(2.0)))
    rho, radius = unnormalized_density(dist)
    x = float(x)
    if x <= -radius:
        return 0.0
    if x >= radius:
        return 1.0
    total = adaptive_integral(rho, -radius, radius, rtol=1e-10)
    # exploit evenness: integrate the short side
    if x <= 0.0:
        part = adaptive_integral(rho, -radius, x, rtol=1e-10)
        return min(max(part / total, 0.0), 1.0)
    part = adaptive_integral(rho, x, radius, rtol=1e-10)
    return min(max(1.0 - part / total, 0.0), 1.0)
