"""Brenier maps from the standard Gaussian and their displacement interpolants.

Supported map shapes: Linear (x -> Sx with S SPD), strictly increasing 1D
tables with monotone-cubic interpolation, and coordinate products of 1D
factors. These are exactly the families with exact or quadrature-grade
Jacobian and inversion oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import erfc

from .core import as_spd, spd_sqrt
from .distributions import (
    GaussianZeroMean,
    OneDPotential,
    ProductOfOneD,
    TruncatedGaussian,
    unnormalized_density,
)
from .errors import InversionRangeError, UnsupportedFamilyError
from .quadrature import adaptive_integral, cell_integrals
from .rng import stream

SOURCE_RADIUS = 10.0
SOURCE_NODES = 2049  # per axis, symmetric about 0
BISECT_ITERS = 64


def _std_gaussian_upper_tail(x):
    # Q(x) = P(Z > x), stable in both tails
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


@dataclass(frozen=True)
class LinearMap:
    """x -> S x with S symmetric positive definite (gradient of x'Sx/2)."""

    s: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "s", as_spd(self.s, "s"))

    @property
    def dim(self) -> int:
        return self.s.shape[0]

    @property
    def healthy_radius(self) -> float:
        return math.inf

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.s.T

    def inverse(self, y):
        return np.linalg.solve(self.s, np.asarray(y, dtype=float).T).T


@dataclass(frozen=True)
class ScalarLinear:
    slope: float

    def __post_init__(self):
        sl = float(self.slope)
        if not (sl > 0 and math.isfinite(sl)):
            raise ValueError("slope must be positive and finite")
        object.__setattr__(self, "slope", sl)

    @property
    def healthy_radius(self) -> float:
        return math.inf

    def __call__(self, x):
        return self.slope * np.asarray(x, dtype=float)

    def derivative(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.slope)

    def inverse(self, y):
        return np.asarray(y, dtype=float) / self.slope

    def slope_range(self):
        return self.slope, self.slope


class Monotone1DMap:
    """Odd strictly increasing 1D map stored as a monotone cubic table.

    Outside the healthy radius the map continues linearly with the boundary
    slope, which preserves strict monotonicity.
    """

    def __init__(self, grid: np.ndarray, values: np.ndarray, healthy_radius: float,
                 range_cap: float | None = None):
        self.grid = np.asarray(grid, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if np.any(np.diff(self.values) <= 0):
            raise ValueError("forward table must be strictly increasing")
        self.healthy_radius = float(healthy_radius)
        self.range_cap = None if range_cap is None else float(range_cap)
        self._interp = PchipInterpolator(self.grid, self.values, extrapolate=False)
        self._deriv = self._interp.derivative()
        h = self.healthy_radius
        self._edge_value = float(self._interp(h))
        self._edge_slope = max(float(self._deriv(h)), 1e-300)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.clip(x, -self.healthy_radius, self.healthy_radius)
        core = self._interp(inside)
        excess = x - inside
        out = core + self._edge_slope * excess
        if self.range_cap is not None:
            # the target density is supported in [-cap, cap]; keep the tail
            # extension from escaping it
            out = np.clip(out, -self.range_cap, self.range_cap)
        return out

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.clip(x, -self.healthy_radius, self.healthy_radius)
        out = self._deriv(inside)
        return np.where(np.abs(x) > self.healthy_radius, self._edge_slope, out)

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        ymax = self._edge_value
        if np.any(np.abs(y) > ymax):
            raise InversionRangeError(
                f"value outside invertible range [-{ymax:.6g}, {ymax:.6g}]")
        lo = np.full_like(y, -self.healthy_radius)
        hi = np.full_like(y, self.healthy_radius)
        for _ in range(BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            too_low = self.__call__(mid) < y
            lo = np.where(too_low, mid, lo)
            hi = np.where(too_low, hi, mid)
            if np.max(hi - lo) < 1e-13:
                break
        return 0.5 * (lo + hi)

    def slope_range(self):
        g = np.linspace(-self.healthy_radius, self.healthy_radius, 2001)
        s = np.diff(self.__call__(g)) / np.diff(g)
        return float(s.min()), float(s.max())


@dataclass(frozen=True)
class ProductMap:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def dim(self) -> int:
        return len(self.factors)

    @property
    def healthy_radius(self) -> float:
        return min(f.healthy_radius for f in self.factors)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        cols = [f(x[..., i]) for i, f in enumerate(self.factors)]
        return np.stack(cols, axis=-1)

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        cols = [f.inverse(y[..., i]) for i, f in enumerate(self.factors)]
        return np.stack(cols, axis=-1)


def map_dim(m) -> int:
    if isinstance(m, (LinearMap, ProductMap)):
        return m.dim
    return 1


@dataclass(frozen=True)
class Coupling:
    """Joint law (T0(Z), T1(Z)) under one standard Gaussian source."""

    t0: object
    t1: object
    dim: int
    kind: str  # "linear" | "factor"

    @property
    def factors0(self):
        return _as_factors(self.t0)

    @property
    def factors1(self):
        return _as_factors(self.t1)


def _as_factors(m) -> tuple:
    if isinstance(m, (ScalarLinear, Monotone1DMap)):
        return (m,)
    if isinstance(m, ProductMap):
        return m.factors
    if isinstance(m, LinearMap):
        off_diag = m.s - np.diag(np.diag(m.s))
        if np.max(np.abs(off_diag)) > 1e-14 * np.max(np.abs(m.s)):
            raise UnsupportedFamilyError(
                "cannot mix a non-diagonal linear map with factorwise maps")
        return tuple(ScalarLinear(float(d)) for d in np.diag(m.s))
    raise UnsupportedFamilyError(f"not a transport map: {type(m).__name__}")


def coupling(t0, t1) -> Coupling:
    n0, n1 = map_dim(t0), map_dim(t1)
    if n0 != n1:
        raise ValueError(f"map dimensions differ: {n0} vs {n1}")
    if isinstance(t0, LinearMap) and isinstance(t1, LinearMap):
        return Coupling(t0, t1, n0, "linear")
    # normalize everything else to factor tuples up front so a bad mix
    # fails at construction, not mid-integration
    f0, f1 = _as_factors(t0), _as_factors(t1)
    m0 = f0[0] if len(f0) == 1 else ProductMap(f0)
    m1 = f1[0] if len(f1) == 1 else ProductMap(f1)
    if len(f0) == 1 and n0 == 1:
        return Coupling(m0, m1, 1, "factor")
    return Coupling(ProductMap(f0), ProductMap(f1), n0, "factor")


# ---------------------------------------------------------------------------
# Construction from targets


def monotone_from_1d(dist) -> Monotone1DMap:
    """Table route: invert the target CDF against the Gaussian CDF.

    Survival functions are matched on the positive half-axis (Q(x) =
    S(T(x))/Z) and mirrored, so the map is odd to machine precision. The
    survival values are exact cell-integral partial sums plus one in-cell
    Gauss-Legendre segment, so accuracy is limited only by the bisection.
    """
    rho, radius = unnormalized_density(dist)
    edges = np.linspace(0.0, radius, 2049)
    cells = cell_integrals(rho, edges, order=12)
    # survival S(edge_j) = integral from edge_j to radius
    surv_edges = np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]])
    z_half = surv_edges[0]  # mass of [0, radius]

    def survival(y):
        # exact: full cells to the right plus the partial cell [y, edge]
        idx = np.minimum(np.searchsorted(edges, y, side="right"), len(edges) - 1)
        upper = edges[idx]
        base = surv_edges[idx]
        t_nodes, t_weights = np.polynomial.legendre.leggauss(12)
        half = 0.5 * (upper - y)
        mid = 0.5 * (upper + y)
        nodes = mid[:, None] + half[:, None] * t_nodes[None, :]
        part = (rho(nodes) * t_weights[None, :]).sum(axis=1) * half
        return base + part

    half_grid = np.linspace(0.0, SOURCE_RADIUS, (SOURCE_NODES + 1) // 2)
    q = _std_gaussian_upper_tail(half_grid) * (2.0 * z_half)  # match S(T)=Q·Z
    lo = np.zeros_like(half_grid)
    hi = np.full_like(half_grid, radius)
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        too_far = survival(mid) < q  # survival decreasing: S(mid) < q => mid too far right
        hi = np.where(too_far, mid, hi)
        lo = np.where(too_far, lo, mid)
    half_vals = 0.5 * (lo + hi)
    half_vals[0] = 0.0

    # trim where the tail saturates: slopes must stay strictly positive and
    # the values must stay clear of the truncation edge
    slopes = np.diff(half_vals) / np.diff(half_grid)
    bad = (slopes <= 1e-13) | (half_vals[1:] >= radius * (1.0 - 1e-12))
    if np.any(bad):
        cut = max(int(np.argmax(bad)) - 1, 8)
        half_grid = half_grid[: cut + 1]
        half_vals = half_vals[: cut + 1]
    healthy = float(half_grid[-1])

    grid = np.concatenate([-half_grid[:0:-1], half_grid])
    vals = np.concatenate([-half_vals[:0:-1], half_vals])
    return Monotone1DMap(grid, vals, healthy, range_cap=radius)


def brenier_from_gaussian(target):
    """Brenier map pushing the standard Gaussian to the target law."""
    if isinstance(target, GaussianZeroMean):
        return LinearMap(spd_sqrt(target.cov))
    if isinstance(target, OneDPotential):
        return monotone_from_1d(target)
    if isinstance(target, ProductOfOneD):
        return ProductMap(tuple(monotone_from_1d(f) for f in target.factors))
    if isinstance(target, TruncatedGaussian):
        widths = getattr(target.body, "half_widths", None)
        if widths is None:
            raise UnsupportedFamilyError(
                "truncated-Gaussian transport needs a box body; general "
                "n-dimensional bodies admit no product or linear Brenier map")
        factors = tuple(
            monotone_from_1d(_truncated_factor(float(a)))
            for a in np.asarray(widths, dtype=float)
        )
        return factors[0] if len(factors) == 1 else ProductMap(factors)
    raise UnsupportedFamilyError(
        f"no Brenier construction for {type(target).__name__}")


def _truncated_factor(a: float) -> OneDPotential:
    big = 1e12  # potential wall; density underflows to exactly 0 outside

    def u(x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= a, 0.5 * x * x, big)

    return OneDPotential(u=u, du=lambda x: np.asarray(x, dtype=float),
                         d2u=lambda x: np.ones_like(np.asarray(x, dtype=float)),
                         radius=a)


# ---------------------------------------------------------------------------
# Certificates and displacement statistics


@dataclass(frozen=True)
class SlopeCertificate:
    max_slope: float
    min_slope: float


def lipschitz_certificate(m, grid: np.ndarray | None = None) -> SlopeCertificate:
    if isinstance(m, LinearMap):
        w = np.linalg.eigvalsh(m.s)
        return SlopeCertificate(float(w[-1]), float(w[0]))
    if isinstance(m, ScalarLinear):
        return SlopeCertificate(m.slope, m.slope)
    if isinstance(m, Monotone1DMap):
        if grid is None:
            lo, hi = m.slope_range()
        else:
            g = np.asarray(grid, dtype=float)
            s = np.diff(m(g)) / np.diff(g)
            lo, hi = float(s.min()), float(s.max())
        return SlopeCertificate(hi, lo)
    if isinstance(m, ProductMap):
        certs = [lipschitz_certificate(f, grid) for f in m.factors]
        return SlopeCertificate(
            max(c.max_slope for c in certs), min(c.min_slope for c in certs)
        )
    raise UnsupportedFamilyError(f"not a transport map: {type(m).__name__}")


class InterpolantMap:
    """T_t = (1-t) T0 + t T1 along the displacement interpolation."""

    def __init__(self, c: Coupling, t: float):
        t = float(t)
        if not (0.0 <= t <= 1.0):
            raise ValueError("t must lie in [0, 1]")
        self.coupling = c
        self.t = t

    @property
    def dim(self) -> int:
        return self.coupling.dim

    def __call__(self, x):
        c, t = self.coupling, self.t
        return (1.0 - t) * c.t0(x) + t * c.t1(x)

    def jacobian_matrix(self) -> np.ndarray:
        # constant Jacobian; linear couplings only
        c, t = self.coupling, self.t
        if c.kind != "linear":
            raise UnsupportedFamilyError("constant Jacobian requires linear maps")
        return (1.0 - t) * c.t0.s + t * c.t1.s

    def derivative_diag(self, x):
        """Diagonal of the Jacobian at source points, factor couplings."""
        c, t = self.coupling, self.t
        if c.kind != "factor":
            raise UnsupportedFamilyError("factorwise derivative requires factor maps")
        x = np.asarray(x, dtype=float)
        if c.dim == 1:
            xs = x[..., 0] if x.ndim >= 2 and x.shape[-1] == 1 else x
            d = (1.0 - t) * c.factors0[0].derivative(xs) + t * c.factors1[0].derivative(xs)
            return d
        cols = [
            (1.0 - t) * f0.derivative(x[..., i]) + t * f1.derivative(x[..., i])
            for i, (f0, f1) in enumerate(zip(c.factors0, c.factors1))
        ]
        return np.stack(cols, axis=-1)

    def log_det_jacobian(self, x):
        c = self.coupling
        if c.kind == "linear":
            sign, logdet = np.linalg.slogdet(self.jacobian_matrix())
            if sign <= 0:
                raise ValueError("interpolant Jacobian is not positive definite")
            shape = np.asarray(x, dtype=float).shape[:-1]
            return np.full(shape, float(logdet))
        d = self.derivative_diag(x)
        if np.any(d <= 0):
            raise ValueError("interpolant slope must stay positive")
        out = np.log(d)
        return out.sum(axis=-1) if out.ndim > 1 and self.dim > 1 else out

    def inverse(self, y):
        c, t = self.coupling, self.t
        if t == 0.0:
            return c.t0.inverse(y)
        if t == 1.0:
            return c.t1.inverse(y)
        if c.kind == "linear":
            return np.linalg.solve(self.jacobian_matrix(),
                                   np.asarray(y, dtype=float).T).T
        y = np.asarray(y, dtype=float)
        if c.dim == 1:
            return _invert_affine_factor(c.factors0[0], c.factors1[0], t, y)
        cols = [
            _invert_affine_factor(f0, f1, t, y[..., i])
            for i, (f0, f1) in enumerate(zip(c.factors0, c.factors1))
        ]
        return np.stack(cols, axis=-1)


def _invert_affine_factor(f0, f1, t, y):
    y = np.asarray(y, dtype=float)
    h = min(f0.healthy_radius, f1.healthy_radius)
    if not math.isfinite(h):
        h = SOURCE_RADIUS * 4

    def g(x):
        return (1.0 - t) * f0(x) + t * f1(x)

    if np.any(y < g(np.array(-h))) or np.any(y > g(np.array(h))):
        raise InversionRangeError("value outside the invertible range of T_t")
    lo = np.full_like(y, -h)
    hi = np.full_like(y, h)
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        too_low = g(mid) < y
        lo = np.where(too_low, mid, lo)
        hi = np.where(too_low, hi, mid)
        if np.max(hi - lo) < 1e-13:
            break
    return 0.5 * (lo + hi)


def interpolant(c: Coupling, t: float) -> InterpolantMap:
    return InterpolantMap(c, t)


def displacement(c: Coupling):
    """The velocity in source coordinates: x -> T1(x) - T0(x)."""

    def delta(x):
        return c.t1(x) - c.t0(x)

    return delta


def mean_square_displacement(c: Coupling, samples: int | None = None,
                             seed: int = 0) -> float:
    """E|T0(Z) - T1(Z)|^2; exact for linear pairs, quadrature for factors."""
    if samples is not None:
        value, _ = mean_square_displacement_mc(c, samples, seed)
        return value
    if c.kind == "linear":
        d = c.t0.s - c.t1.s
        return float(np.trace(d @ d))
    total = 0.0
    for f0, f1 in zip(c.factors0, c.factors1):
        def integrand(z):
            diff = f1(z) - f0(z)
            return diff * diff * np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)

        total += adaptive_integral(integrand, -8.2, 8.2, rtol=1e-11)
    return float(total)


def mean_square_displacement_mc(c: Coupling, samples: int, seed: int):
    gen = stream(seed, "msd")
    z = gen.standard_normal((int(samples), c.dim))
    d = c.t1(z) - c.t0(z)
    sq = np.sum(np.atleast_2d(d.reshape(len(z), -1)) ** 2, axis=1)
    return float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(len(sq)))


def velocity_at(c: Coupling, t: float, y):
    """v_t(y) = (T1 - T0)(T_t^{-1}(y)), the compatible velocity field."""
    x = interpolant(c, t).inverse(y)
    return c.t1(x) - c.t0(x)


@dataclass(frozen=True)
class MonotonicityReport:
    min_monotonicity: float


def no_crossing_check(c: Coupling, pair_count: int, t_grid, seed: int) -> MonotonicityReport:
    if pair_count <= 0:
        raise ValueError("pair_count must be positive")
    gen = stream(seed, "no-crossing")
    x = gen.standard_normal((int(pair_count), c.dim))
    y = gen.standard_normal((int(pair_count), c.dim))
    dx = x - y
    norms = np.sum(dx * dx, axis=1)
    keep = norms > 1e-20
    x, y, dx, norms = x[keep], y[keep], dx[keep], norms[keep]
    worst = math.inf
    for t in np.asarray(t_grid, dtype=float):
        tt = interpolant(c, float(t))
        num = np.sum((tt(x) - tt(y)) * dx, axis=1)
        worst = min(worst, float(np.min(num / norms)))
    return MonotonicityReport(min_monotonicity=worst)
