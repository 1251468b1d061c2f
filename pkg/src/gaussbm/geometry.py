"""Origin-symmetric convex bodies and Gaussian Brunn-Minkowski checks.

Bodies are immutable variant records. Minkowski-combination membership is
three-valued (inside / outside / boundary_uncertain) and runs on a compiled
kernel when the extension built, with a numpy fallback selected at import
time; both backends implement the same contract, see ``_combo_np``.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull
from scipy.special import erf, ndtr

from . import _combo_np
from .distributions import TruncatedGaussian
from .errors import DomainError, UnsupportedFamilyError
from .quadrature import adaptive_integral
from .rng import stream

try:
    from . import _combo_cy as _kernel

    KERNEL_BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on the build environment
    _kernel = _combo_np
    KERNEL_BACKEND = "numpy"

__all__ = [
    "Box",
    "Ellipsoid",
    "PNormBall",
    "HPolytopeSym",
    "MinkowskiCombination",
    "MeasureEstimate",
    "GeometricCheck",
    "AsymmetryCheck",
    "CandidateLaw",
    "CandidateResult",
    "VariationalReport",
    "KERNEL_BACKEND",
    "direction_net",
    "combo_membership",
    "classify_points",
    "gaussian_measure_mc",
    "gaussian_measure_exact",
    "geometric_bm_check",
    "asymmetry_counterexample",
    "restricted_measure",
    "restriction_candidate",
    "uniform_candidate",
    "scaled_restriction",
    "point_mass_candidate",
    "variational_principle_check",
]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _as_points(x, dim):
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got {pts.shape[1]}")
    return pts, single


@dataclass(frozen=True, eq=False)
class Box:
    half_widths: tuple

    def __post_init__(self):
        hw = tuple(float(a) for a in np.atleast_1d(self.half_widths))
        if not hw or any(a <= 0 for a in hw):
            raise ValueError("half widths must be positive")
        object.__setattr__(self, "half_widths", hw)

    @property
    def dim(self):
        return len(self.half_widths)

    def membership(self, x):
        pts, single = _as_points(x, self.dim)
        ok = np.all(np.abs(pts) <= np.asarray(self.half_widths), axis=1)
        return bool(ok[0]) if single else ok

    contains = membership

    def projection(self, x):
        return np.clip(np.asarray(x, dtype=float), -np.asarray(self.half_widths),
                       np.asarray(self.half_widths))

    def support(self, u):
        pts, single = _as_points(u, self.dim)
        h = np.abs(pts) @ np.asarray(self.half_widths)
        return float(h[0]) if single else h

    def _descriptor(self):
        return (_combo_np.KIND_BOX, 0.0, np.asarray(self.half_widths, dtype=float),
                np.zeros((1, 1)))


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """The set x'Ax <= 1 for SPD A."""

    a: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.a, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("A must be a square matrix")
        if not np.allclose(m, m.T, atol=1e-12):
            raise ValueError("A must be symmetric")
        m = 0.5 * (m + m.T)
        vals, vecs = np.linalg.eigh(m)
        if np.min(vals) <= 0:
            raise ValueError("A must be positive definite (the set is unbounded otherwise)")
        object.__setattr__(self, "a", m)
        object.__setattr__(self, "_eigvals", vals)
        object.__setattr__(self, "_eigvecs", vecs)
        object.__setattr__(self, "_a_inv", vecs @ np.diag(1.0 / vals) @ vecs.T)

    @property
    def dim(self):
        return self.a.shape[0]

    def membership(self, x):
        pts, single = _as_points(x, self.dim)
        q = np.einsum("ki,ij,kj->k", pts, self.a, pts)
        ok = q <= 1.0
        return bool(ok[0]) if single else ok

    contains = membership

    def projection(self, x):
        _, _, vec, mat = self._descriptor()
        return _combo_np.project_points(np.asarray(x, dtype=float),
                                        _combo_np.KIND_ELLIPSOID, 0.0, vec, mat)[0]

    def support(self, u):
        pts, single = _as_points(u, self.dim)
        h = np.sqrt(np.einsum("ki,ij,kj->k", pts, self._a_inv, pts))
        return float(h[0]) if single else h

    def _descriptor(self):
        return (_combo_np.KIND_ELLIPSOID, 0.0, self._eigvals, self._eigvecs)


@dataclass(frozen=True, eq=False)
class PNormBall:
    p: float
    radius: float
    dim: int

    def __post_init__(self):
        if not (self.p >= 1.0):
            raise ValueError("p must be >= 1")
        if self.radius <= 0 or self.dim < 1:
            raise ValueError("radius must be positive and dim >= 1")
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "dim", int(self.dim))

    def membership(self, x):
        pts, single = _as_points(x, self.dim)
        if math.isinf(self.p):
            ok = np.max(np.abs(pts), axis=1) <= self.radius
        else:
            ok = np.sum(np.abs(pts) ** self.p, axis=1) <= self.radius**self.p
        return bool(ok[0]) if single else ok

    contains = membership

    def projection(self, x):
        kind, scal, vec, mat = self._descriptor()
        return _combo_np.project_points(np.asarray(x, dtype=float), kind, scal, vec, mat)[0]

    def support(self, u):
        pts, single = _as_points(u, self.dim)
        if self.p == 1.0:
            h = self.radius * np.max(np.abs(pts), axis=1)
        elif math.isinf(self.p):
            h = self.radius * np.sum(np.abs(pts), axis=1)
        else:
            q = self.p / (self.p - 1.0)
            h = self.radius * np.sum(np.abs(pts) ** q, axis=1) ** (1.0 / q)
        return float(h[0]) if single else h

    def _descriptor(self):
        if self.p == 1.0:
            kind = _combo_np.KIND_L1
        elif self.p == 2.0:
            kind = _combo_np.KIND_L2
        elif math.isinf(self.p):
            kind = _combo_np.KIND_LINF
        else:
            raise UnsupportedFamilyError(
                "Euclidean projection is implemented for p in {1, 2, inf} only; "
                f"combinations cannot use p={self.p}")
        return (kind, self.radius, np.empty(0), np.zeros((1, 1)))


@dataclass(frozen=True, eq=False)
class HPolytopeSym:
    """Intersection of symmetric slabs |<a_i, x>| <= b_i."""

    rows: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if rows.shape[0] != b.shape[0]:
            raise ValueError("rows and b must have matching lengths")
        if np.any(b <= 0):
            raise ValueError("slab bounds must be positive")
        if np.any(np.linalg.norm(rows, axis=1) == 0):
            raise ValueError("zero normal row")
        # bounded iff the normals span the whole space
        if np.linalg.matrix_rank(rows) < rows.shape[1]:
            raise ValueError("slab normals do not span the space; the body contains a ray")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "b", b)

    @property
    def dim(self):
        return self.rows.shape[1]

    def membership(self, x):
        pts, single = _as_points(x, self.dim)
        ok = np.all(np.abs(pts @ self.rows.T) <= self.b, axis=1)
        return bool(ok[0]) if single else ok

    contains = membership

    def projection(self, x):
        kind, scal, vec, mat = self._descriptor()
        return _combo_np.project_points(np.asarray(x, dtype=float), kind, scal, vec, mat)[0]

    def support(self, u):
        pts, single = _as_points(u, self.dim)
        a_ub = np.vstack([self.rows, -self.rows])
        b_ub = np.concatenate([self.b, self.b])
        vals = np.empty(pts.shape[0])
        for i, d in enumerate(pts):
            res = linprog(-d, A_ub=a_ub, b_ub=b_ub, bounds=(None, None), method="highs")
            if not res.success:
                raise ValueError(f"support LP failed: {res.message}")
            vals[i] = -res.fun
        return float(vals[0]) if single else vals

    def _descriptor(self):
        return (_combo_np.KIND_HPOLY, 0.0, self.b, self.rows)


@dataclass(frozen=True, eq=False)
class MinkowskiCombination:
    k0: object
    k1: object
    t: float

    def __post_init__(self):
        if not (0.0 <= self.t <= 1.0):
            raise ValueError("t must lie in [0, 1]")
        if self.k0.dim != self.k1.dim:
            raise ValueError("bodies must share a dimension")
        object.__setattr__(self, "t", float(self.t))

    @property
    def dim(self):
        return self.k0.dim

    def support(self, u):
        return (1.0 - self.t) * self.k0.support(u) + self.t * self.k1.support(u)


@lru_cache(maxsize=None)
def direction_net(dim):
    """Quasi-uniform unit directions used for the certified outer test."""
    if dim == 1:
        net = np.array([[1.0], [-1.0]])
    elif dim == 2:
        ang = 2.0 * np.pi * np.arange(256) / 256.0
        net = np.column_stack([np.cos(ang), np.sin(ang)])
    elif dim == 3:
        k = np.arange(1024) + 0.5
        z = 1.0 - 2.0 * k / 1024.0
        r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
        golden = np.pi * (3.0 - np.sqrt(5.0))
        net = np.column_stack([r * np.cos(golden * k), r * np.sin(golden * k), z])
    else:
        raw = stream(0, f"direction-net-{dim}").standard_normal((1024, dim))
        raw = np.vstack([np.eye(dim), -np.eye(dim), raw])
        net = raw / np.linalg.norm(raw, axis=1, keepdims=True)
    net.setflags(write=False)
    return net


def _combo_call_args(mc, tol, max_iter):
    net = direction_net(mc.dim)
    hnet = np.asarray(mc.support(net), dtype=float)
    k0d = mc.k0._descriptor()
    k1d = mc.k1._descriptor()
    return (mc.t, *k0d, *k1d, net, hnet, tol, max_iter)


def _support_contacts(body, dirs):
    """Exact support points: argmax of <x, u> over the body, per direction."""
    if isinstance(body, Box):
        return np.sign(dirs) * np.asarray(body.half_widths)
    if isinstance(body, Ellipsoid):
        w = dirs @ body._a_inv
        h = np.sqrt(np.einsum("ki,ki->k", dirs, w))
        return w / h[:, None]
    if isinstance(body, PNormBall):
        p, r = body.p, body.radius
        if math.isinf(p):
            return r * np.sign(dirs)
        if p == 1.0:
            j = np.argmax(np.abs(dirs), axis=1)
            c = np.zeros_like(dirs)
            rows = np.arange(dirs.shape[0])
            c[rows, j] = r * np.sign(dirs[rows, j])
            return c
        q = p / (p - 1.0)
        nq = np.sum(np.abs(dirs) ** q, axis=1) ** (1.0 / q)
        return r * np.sign(dirs) * (np.abs(dirs) / nq[:, None]) ** (q - 1.0)
    if isinstance(body, HPolytopeSym):
        a_ub = np.vstack([body.rows, -body.rows])
        b_ub = np.concatenate([body.b, body.b])
        out = np.empty_like(dirs)
        for i, d in enumerate(dirs):
            res = linprog(-d, A_ub=a_ub, b_ub=b_ub, bounds=(None, None),
                          method="highs")
            if not res.success:
                raise ValueError(f"support LP failed: {res.message}")
            out[i] = res.x
        return out
    raise UnsupportedFamilyError(f"no support contacts for {type(body).__name__}")


def _dense_directions(dim, coarse):
    if coarse or dim not in (2, 3):
        return direction_net(dim)
    if dim == 2:
        ang = 2.0 * np.pi * np.arange(2048) / 2048.0
        return np.column_stack([np.cos(ang), np.sin(ang)])
    k = np.arange(8192) + 0.5
    z = 1.0 - 2.0 * k / 8192.0
    r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    golden = np.pi * (3.0 - np.sqrt(5.0))
    return np.column_stack([r * np.cos(golden * k), r * np.sin(golden * k), z])


def _inner_facets(mc):
    """Facet form of an inner polytope: the hull of combo contact points.

    Membership in the hull is a sound inside certificate, which rescues the
    near-boundary points where alternating projections crawl. Support-LP
    bodies get the coarse net to bound the number of LP solves.
    """
    coarse = isinstance(mc.k0, HPolytopeSym) or isinstance(mc.k1, HPolytopeSym)
    dirs = _dense_directions(mc.dim, coarse)
    contacts = ((1.0 - mc.t) * _support_contacts(mc.k0, dirs)
                + mc.t * _support_contacts(mc.k1, dirs))
    return ConvexHull(contacts).equations


def _outside_rescue(mc, x, tol, iters=100):
    """Certified outside test from the projection residual direction.

    The finite net can miss the separating hyperplane by its angular
    resolution; a short alternating-projection pass points at the nearest
    decomposition, and the exact support value in that direction settles
    membership one-sidedly.
    """
    t, s = mc.t, 1.0 - mc.t
    d0 = mc.k0._descriptor()
    d1 = mc.k1._descriptor()
    y1 = _combo_np.project_points(x, *d1)
    for _ in range(iters):
        y0 = _combo_np.project_points((x - t * y1) / s, *d0)
        y1 = _combo_np.project_points((x - s * y0) / t, *d1)
    u = x - (s * y0 + t * y1)
    nrm = np.linalg.norm(u, axis=1)
    ok = nrm > tol
    out = np.zeros(x.shape[0], dtype=bool)
    if np.any(ok):
        ud = u[ok] / nrm[ok][:, None]
        sep = np.einsum("ki,ki->k", ud, x[ok]) - np.asarray(mc.support(ud))
        out[np.flatnonzero(ok)[sep > tol]] = True
    return out


def _classify_single_body(body, pts, tol):
    """Endpoint combinations degenerate to one body; keep the 3-valued shell."""
    net = direction_net(body.dim)
    hnet = np.asarray(body.support(net), dtype=float)
    verdict = np.zeros(pts.shape[0], dtype=np.int8)
    margin = np.max(pts @ net.T - hnet, axis=1)
    verdict[margin > tol] = -1
    kind, scal, vec, mat = body._descriptor()
    undecided = (verdict == 0) & (margin <= -tol)
    proj = _combo_np.project_points(pts[undecided], kind, scal, vec, mat)
    dist = np.sqrt(np.sum((pts[undecided] - proj) ** 2, axis=1))
    inside = np.zeros(pts.shape[0], dtype=bool)
    inside[np.flatnonzero(undecided)[dist < tol]] = True
    verdict[inside] = 1
    return verdict


def classify_points(region, pts, tol=1e-9, max_iter=500, _facets_cache=None):
    """Verdict array (1 inside, -1 outside, 0 uncertain) for a batch.

    Plain bodies classify exactly through their membership predicate, so
    they never return 0. Combinations run the projection kernel, then
    uncertain survivors get the inner-polytope certificate.
    """
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(pts, dtype=float)))
    if isinstance(region, MinkowskiCombination):
        if region.t == 0.0:
            region = region.k0
        elif region.t == 1.0:
            region = region.k1
        else:
            v = _kernel.classify_batch(pts, *_combo_call_args(region, tol, max_iter))
            und = np.flatnonzero(v == 0)
            if und.size and region.dim > 1:
                if _facets_cache is not None and _facets_cache:
                    eq = _facets_cache[0]
                else:
                    eq = _inner_facets(region)
                    if _facets_cache is not None:
                        _facets_cache.append(eq)
                n = region.dim
                ok = np.all(pts[und] @ eq[:, :n].T + eq[:, n] <= -1e-10, axis=1)
                v[und[ok]] = 1
                und = und[~ok]
            if und.size:
                out = _outside_rescue(region, pts[und], tol)
                v[und[out]] = -1
            return v
    inside = np.asarray(region.membership(pts), dtype=bool)
    return np.where(inside, 1, -1).astype(np.int8)


_VERDICT_NAMES = {1: "inside", -1: "outside", 0: "boundary_uncertain"}


def combo_membership(mc, x, tol=1e-9, max_iter=500):
    """Three-valued membership of a single point in (1-t)K0 + tK1."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    pts, _ = _as_points(x, mc.dim)
    if isinstance(mc, MinkowskiCombination) and 0.0 < mc.t < 1.0:
        code = int(classify_points(mc, pts, tol=tol, max_iter=max_iter)[0])
    else:
        body = mc
        if isinstance(mc, MinkowskiCombination):
            body = mc.k0 if mc.t == 0.0 else mc.k1
        code = int(_classify_single_body(body, pts, tol)[0])
    return _VERDICT_NAMES[code]


@dataclass(frozen=True)
class MeasureEstimate:
    estimate: float
    std_error: float
    uncertain_fraction: float
    samples: int
    unreliable: bool


def gaussian_measure_mc(region, samples=1_000_000, seed=0, tol=1e-9, max_iter=500):
    """Monte Carlo standard-Gaussian measure with binomial error bars.

    Uncertain verdicts are excluded from the hit count and reported as a
    separate fraction; above 1e-3 the estimate is flagged unreliable.
    """
    samples = int(samples)
    if samples <= 0:
        raise ValueError("samples must be positive")
    n = region.dim
    gen = stream(seed, "geometry-mc")
    hits = 0
    uncertain = 0
    remaining = samples
    facets_cache = []
    while remaining > 0:
        block = min(remaining, 200_000)
        z = gen.standard_normal((block, n))
        v = classify_points(region, z, tol=tol, max_iter=max_iter,
                            _facets_cache=facets_cache)
        hits += int(np.sum(v == 1))
        uncertain += int(np.sum(v == 0))
        remaining -= block
    p = hits / samples
    se = math.sqrt(max(p * (1.0 - p), 0.0) / samples)
    ufrac = uncertain / samples
    return MeasureEstimate(p, se, ufrac, samples, ufrac > 1e-3)


def _as_box_half_widths(body):
    if isinstance(body, Box):
        return np.asarray(body.half_widths, dtype=float)
    if isinstance(body, PNormBall) and math.isinf(body.p):
        return np.full(body.dim, body.radius)
    return None


def gaussian_measure_exact(region):
    """Closed-form gamma measure where one exists.

    Covers every 1D body (an interval), boxes and box products in any
    dimension, the Euclidean disk in 2D, and Minkowski combinations of
    those. Raises UnsupportedFamilyError otherwise.
    """
    if region.dim == 1:
        h = region.support(np.array([1.0]))
        return float(erf(h / math.sqrt(2.0)))
    hw = None
    if isinstance(region, MinkowskiCombination):
        a0 = _as_box_half_widths(region.k0)
        a1 = _as_box_half_widths(region.k1)
        if a0 is not None and a1 is not None:
            hw = (1.0 - region.t) * a0 + region.t * a1
    else:
        hw = _as_box_half_widths(region)
    if hw is not None:
        return float(np.prod(erf(hw / math.sqrt(2.0))))
    if isinstance(region, PNormBall) and region.p == 2.0 and region.dim == 2:
        return float(-math.expm1(-0.5 * region.radius**2))
    if (isinstance(region, Ellipsoid) and region.dim == 2
            and np.allclose(region._eigvals[0], region._eigvals[1], rtol=1e-14)):
        return float(-math.expm1(-0.5 / region._eigvals[0]))
    raise UnsupportedFamilyError(
        f"no closed-form gamma measure for {type(region).__name__} in dim {region.dim}")


def _measure(region, samples, seed, label):
    try:
        return gaussian_measure_exact(region), 0.0, False
    except UnsupportedFamilyError:
        est = gaussian_measure_mc(region, samples=samples, seed=seed + _SEED_SALT[label])
        return est.estimate, est.std_error, est.unreliable


_SEED_SALT = {"combo": 0, "k0": 1, "k1": 2}


def _root_transform(value, se, n):
    """Delta-method error bar for value**(1/n)."""
    v = value ** (1.0 / n)
    if value <= 0.0:
        return v, se ** (1.0 / n)
    return v, se * v / (n * value)


@dataclass(frozen=True)
class GeometricCheck:
    lhs: float
    rhs: float
    gap: float
    confidence_gap: float
    lhs_std_error: float
    rhs_std_error: float
    unreliable: bool


def geometric_bm_check(k0, k1, t, samples=1_000_000, seed=0):
    """Dimensional Gaussian Brunn-Minkowski gap for two symmetric bodies.

    lhs = gamma((1-t)K0 + tK1)^(1/n), rhs the matching convex combination
    of the endpoint measures; the inequality predicts gap >= 0.
    """
    if not (0.0 <= t <= 1.0):
        raise ValueError("t must lie in [0, 1]")
    n = k0.dim
    if k0 is k1:
        m, se, bad = _measure(k0, samples, seed, "k0")
        v, se_t = _root_transform(m, se, n)
        return GeometricCheck(v, v, 0.0, 0.0, se_t, se_t, bad)
    combo = MinkowskiCombination(k0, k1, t)
    mc_val, mc_se, mc_bad = _measure(combo, samples, seed, "combo")
    m0, se0, bad0 = _measure(k0, samples, seed, "k0")
    m1, se1, bad1 = _measure(k1, samples, seed, "k1")
    lhs, lhs_se = _root_transform(mc_val, mc_se, n)
    r0, r0_se = _root_transform(m0, se0, n)
    r1, r1_se = _root_transform(m1, se1, n)
    rhs = (1.0 - t) * r0 + t * r1
    rhs_se = math.hypot((1.0 - t) * r0_se, t * r1_se)
    gap = lhs - rhs
    conf = gap - 3.0 * math.hypot(lhs_se, rhs_se)
    return GeometricCheck(lhs, rhs, gap, conf, lhs_se, rhs_se,
                          mc_bad or bad0 or bad1)


@dataclass(frozen=True)
class AsymmetryCheck:
    lhs: float
    rhs: float
    gap: float


def _shifted_box_measure(centers, half_widths):
    lo = ndtr(centers - half_widths)
    hi = ndtr(centers + half_widths)
    return float(np.prod(hi - lo))


def asymmetry_counterexample(k0, shift, t):
    """Gap of the dimensional inequality against a translated point mass.

    K1 = {shift} has measure zero, so rhs = (1-t) gamma(K0)^(1/n); the
    combination is a shifted shrunken box. Large shifts push the gap
    negative, which is why evenness cannot be dropped.
    """
    if not (0.0 <= t <= 1.0):
        raise ValueError("t must lie in [0, 1]")
    hw = _as_box_half_widths(k0)
    if hw is None:
        raise UnsupportedFamilyError("closed forms only exist for box bodies here")
    s = np.broadcast_to(np.asarray(shift, dtype=float), hw.shape)
    n = hw.shape[0]
    lhs = _shifted_box_measure(t * s, (1.0 - t) * hw) ** (1.0 / n)
    rhs = (1.0 - t) * _shifted_box_measure(np.zeros(n), hw) ** (1.0 / n)
    return AsymmetryCheck(lhs, rhs, lhs - rhs)


def restricted_measure(k):
    """The normalized restriction of gamma to a symmetric body."""
    try:
        mass = gaussian_measure_exact(k)
    except UnsupportedFamilyError:
        mass = gaussian_measure_mc(k, samples=200_000, seed=0).estimate
    if mass < 1e-9:
        raise DomainError(f"gamma(K) estimate {mass:.3e} is too small to normalize")
    return TruncatedGaussian(k)


@dataclass(frozen=True)
class CandidateLaw:
    """A 1D probability law entered into the variational check.

    log_density is the normalized Lebesgue log-density, vectorized, valid
    on [-radius, radius]; point masses carry no density.
    """

    name: str
    log_density: object
    radius: float
    is_restriction: bool = False
    point_mass: bool = False


def restriction_candidate(k):
    if k.dim != 1:
        raise UnsupportedFamilyError("restriction candidates are 1D")
    h = float(k.support(np.array([1.0])))
    mass = float(erf(h / math.sqrt(2.0)))
    log_norm = math.log(mass) + _LOG_SQRT_2PI

    def log_density(x):
        return -0.5 * np.asarray(x, dtype=float) ** 2 - log_norm

    return CandidateLaw("restriction", log_density, h, is_restriction=True)


def uniform_candidate(half_width):
    h = float(half_width)
    if h <= 0:
        raise ValueError("half width must be positive")
    c = -math.log(2.0 * h)

    def log_density(x):
        return np.full_like(np.asarray(x, dtype=float), c)

    return CandidateLaw(f"uniform[{h:g}]", log_density, h)


def scaled_restriction(k, scale):
    """Law of scale * X for X distributed as the restriction gamma_K."""
    if k.dim != 1:
        raise UnsupportedFamilyError("restriction candidates are 1D")
    s = float(scale)
    if s <= 0:
        raise ValueError("scale must be positive")
    base = restriction_candidate(k)
    log_s = math.log(s)

    def log_density(x):
        return base.log_density(np.asarray(x, dtype=float) / s) - log_s

    return CandidateLaw(f"scaled-restriction[{s:g}]", log_density, base.radius * s)


def point_mass_candidate():
    return CandidateLaw("point-mass", None, 0.0, point_mass=True)


@dataclass(frozen=True)
class CandidateResult:
    name: str
    entropy: float
    exponential: float
    bound_ok: bool
    supported: bool
    note: str


@dataclass(frozen=True)
class VariationalReport:
    measure: float
    best_exponential: float
    attained_by_restriction: bool
    results: tuple


def variational_principle_check(k, candidates, samples=None):
    """gamma(K) >= exp(-D(mu || gamma)) over a family supported in K.

    Equality should be attained exactly by the normalized restriction;
    quadrature on 1D bodies. ``samples`` is accepted for interface parity
    but unused by the quadrature path.
    """
    if k.dim != 1:
        raise UnsupportedFamilyError("the variational check is implemented in 1D")
    h_body = float(k.support(np.array([1.0])))
    measure = float(erf(h_body / math.sqrt(2.0)))
    results = []
    best = 0.0
    attained = False
    for cand in candidates:
        if cand.point_mass:
            results.append(CandidateResult(cand.name, math.inf, 0.0, True, True,
                                           "degenerate law, infinite entropy"))
            continue
        if cand.radius > h_body + 1e-12:
            results.append(CandidateResult(
                cand.name, math.nan, math.nan, False, False,
                f"support radius {cand.radius:g} exceeds the body ({h_body:g})"))
            continue

        def integrand(x, ld=cand.log_density):
            lv = np.asarray(ld(x), dtype=float)
            return np.exp(lv) * (lv + 0.5 * np.asarray(x, dtype=float) ** 2
                                 + _LOG_SQRT_2PI)

        entropy = adaptive_integral(integrand, -cand.radius, cand.radius, rtol=1e-10)
        value = math.exp(-entropy)
        ok = value <= measure + 1e-8
        results.append(CandidateResult(cand.name, entropy, value, ok, True, ""))
        best = max(best, value)
        if cand.is_restriction and abs(value - measure) <= 1e-6:
            attained = True
    return VariationalReport(measure, best, attained, tuple(results))
