"""Scalar and matrix kernels for the entropic inequality.

Power means with extended-real exponents, the sine comparison weight
sigma^(t)(theta), SPD matrix utilities, the closed-form Gaussian relative
entropy, and the plain/strengthened inequality gaps.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "power_mean",
    "power_mean_vec",
    "sigma_comparison",
    "as_spd",
    "spd_sqrt",
    "gaussian_relative_entropy",
    "BmGaps",
    "entropic_bm_gaps",
]

# Below this value of sqrt(2/n)*theta the sine ratio switches to a series.
SIGMA_SERIES_THRESHOLD = 1e-6

# Relative eigenvalue floor for accepting a matrix as positive definite.
SPD_EIG_RTOL = 1e-12


def _classify_exponent(p):
    """Tag an extended-real exponent: ('neg_inf'|'finite'|'pos_inf', value)."""
    p = float(p)
    if math.isnan(p):
        raise DomainError("power-mean exponent must not be NaN")
    if p == math.inf:
        return "pos_inf", 0.0
    if p == -math.inf:
        return "neg_inf", 0.0
    return "finite", p


def power_mean(x: float, y: float, t: float, p: float) -> float:
    """Two-point power mean M_p^t(x, y) with weights (1-t, t).

    Extended convention: the value is 0 whenever x*y == 0, for every
    exponent including +/-infinity; p = 0 is the geometric mean and
    p = -inf/+inf are min/max on positive pairs.
    """
    x = float(x)
    y = float(y)
    if not (math.isfinite(x) and math.isfinite(y)):
        raise DomainError("power-mean arguments must be finite")
    if x < 0.0 or y < 0.0:
        raise DomainError("power-mean arguments must be nonnegative")
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"interpolation weight t={t} outside [0, 1]")
    kind, pf = _classify_exponent(p)
    if x == 0.0 or y == 0.0:
        return 0.0
    if kind == "neg_inf":
        return min(x, y)
    if kind == "pos_inf":
        return max(x, y)
    if t == 0.0:
        return x
    if t == 1.0:
        return y
    if pf == 0.0:
        return x ** (1.0 - t) * y ** t
    # log-domain evaluation keeps large |p| stable
    a = pf * math.log(x)
    b = pf * math.log(y)
    m = max(a, b)
    s = (1.0 - t) * math.exp(a - m) + t * math.exp(b - m)
    return math.exp((m + math.log(s)) / pf)


def power_mean_vec(x, y, t: float, p: float) -> np.ndarray:
    """Elementwise power_mean over arrays (same convention as power_mean)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DomainError("power-mean arguments must be finite")
    if np.any(x < 0.0) or np.any(y < 0.0):
        raise DomainError("power-mean arguments must be nonnegative")
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"interpolation weight t={t} outside [0, 1]")
    kind, pf = _classify_exponent(p)
    pos = (x > 0.0) & (y > 0.0)
    out = np.zeros(np.broadcast(x, y).shape)
    if not np.any(pos):
        return out
    xp = np.broadcast_to(x, out.shape)[pos]
    yp = np.broadcast_to(y, out.shape)[pos]
    if kind == "neg_inf":
        out[pos] = np.minimum(xp, yp)
    elif kind == "pos_inf":
        out[pos] = np.maximum(xp, yp)
    elif t == 0.0:
        out[pos] = xp
    elif t == 1.0:
        out[pos] = yp
    elif pf == 0.0:
        out[pos] = xp ** (1.0 - t) * yp ** t
    else:
        a = pf * np.log(xp)
        b = pf * np.log(yp)
        m = np.maximum(a, b)
        s = (1.0 - t) * np.exp(a - m) + t * np.exp(b - m)
        out[pos] = np.exp((m + np.log(s)) / pf)
    return out


def sigma_comparison(n: int, theta: float, t: float) -> float:
    """Comparison weight sigma^(t)(theta) = sin(sqrt(2/n) t theta) / sin(sqrt(2/n) theta).

    Defined for 0 <= theta < sqrt(n/2)*pi; always >= t, with the limit value t
    as theta -> 0 evaluated by a 3-term series below the switch threshold.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"dimension n={n} must be a positive integer")
    theta = float(theta)
    if not math.isfinite(theta) or theta < 0.0:
        raise DomainError(f"theta={theta} must be finite and nonnegative")
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"interpolation weight t={t} outside [0, 1]")
    alpha = math.sqrt(2.0 / n) * theta
    if alpha >= math.pi:
        raise DomainError(
            f"theta={theta} is outside the comparison domain theta < sqrt(n/2)*pi "
            f"(n={n}); this regime cannot occur for valid couplings")
    if alpha <= SIGMA_SERIES_THRESHOLD:
        ta = t * alpha
        num = 1.0 - ta * ta / 6.0 + ta ** 4 / 120.0
        den = 1.0 - alpha * alpha / 6.0 + alpha ** 4 / 120.0
        return t * num / den
    return math.sin(t * alpha) / math.sin(alpha)


def as_spd(m, name: str = "matrix") -> np.ndarray:
    """Validate and return a symmetric positive-definite matrix (float copy).

    Symmetry within 1e-12 relative; smallest eigenvalue must exceed
    SPD_EIG_RTOL times the largest.
    """
    a = np.atleast_2d(np.asarray(m, dtype=float))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} has non-finite entries")
    scale = float(np.abs(a).max())
    if scale == 0.0:
        raise DomainError(f"{name} is zero")
    if float(np.abs(a - a.T).max()) > 1e-12 * scale:
        raise DomainError(f"{name} is not symmetric")
    a = 0.5 * (a + a.T)
    w = np.linalg.eigvalsh(a)
    if w[-1] <= 0.0 or w[0] <= SPD_EIG_RTOL * w[-1]:
        raise DomainError(f"{name} is not positive definite "
                          f"(eigenvalue range [{w[0]:.3e}, {w[-1]:.3e}])")
    return a


def spd_sqrt(m) -> np.ndarray:
    """Principal square root of an SPD matrix via spectral decomposition."""
    a = as_spd(m)
    w, q = np.linalg.eigh(a)
    return (q * np.sqrt(w)) @ q.T


def gaussian_relative_entropy(cov) -> float:
    """Relative entropy of N(0, cov) with respect to the standard Gaussian.

    Closed form (natural log): (tr(cov) - n - log det cov) / 2.
    Nonnegative, zero exactly at the identity.
    """
    a = as_spd(cov, name="covariance")
    w = np.linalg.eigvalsh(a)
    return 0.5 * float(np.sum(w - 1.0 - np.log(w)))


@dataclass(frozen=True)
class BmGaps:
    """Inequality gaps at one interpolation time; sigma_gap <= plain_gap."""
    plain_gap: float
    sigma_gap: float


# Relative entropies computed by quadrature can round to tiny negatives.
_ENTROPY_FLOOR = -1e-9


def entropic_bm_gaps(d0: float, d1: float, dt: float, t: float,
                     n: int, theta: float) -> BmGaps:
    """Gaps of the dimensional inequality at time t.

    plain_gap = e^{-dt/n} - (1-t) e^{-d0/n} - t e^{-d1/n}
    sigma_gap replaces the weights (1-t, t) with sigma^{(1-t)}, sigma^{(t)}.
    """
    ds = []
    for label, d in (("d0", d0), ("d1", d1), ("dt", dt)):
        d = float(d)
        if not math.isfinite(d) or d < _ENTROPY_FLOOR:
            raise DomainError(f"relative entropy {label}={d} must be nonnegative")
        ds.append(max(d, 0.0))
    d0, d1, dt = ds
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"interpolation weight t={t} outside [0, 1]")
    e0 = math.exp(-d0 / n)
    e1 = math.exp(-d1 / n)
    et = math.exp(-dt / n)
    plain = et - (1.0 - t) * e0 - t * e1
    s0 = sigma_comparison(n, theta, 1.0 - t)
    s1 = sigma_comparison(n, theta, t)
    sigma = et - s0 * e0 - s1 * e1
    return BmGaps(plain_gap=plain, sigma_gap=sigma)
