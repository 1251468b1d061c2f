"""Vectorized membership kernel for Minkowski combinations.

This is the pure-numpy twin of the compiled kernel in ``_combo_cy``. Both
expose ``classify_batch`` with identical semantics; ``geometry`` picks the
compiled one when the build produced it. Body variants arrive as flat
descriptors (kind code plus parameter arrays) so the two implementations
stay interchangeable.

Kind codes: 0 box, 1 ellipsoid, 2 l1 ball, 3 l2 ball, 4 linf ball,
5 symmetric H-polytope.

Verdict codes: 1 inside, -1 outside, 0 boundary_uncertain.
"""
import numpy as np

KIND_BOX = 0
KIND_ELLIPSOID = 1
KIND_L1 = 2
KIND_L2 = 3
KIND_LINF = 4
KIND_HPOLY = 5

_DYKSTRA_CYCLES = 500


def _project_box(pts, half_widths):
    return np.clip(pts, -half_widths, half_widths)


def _project_l2(pts, radius):
    nrm = np.sqrt(np.sum(pts * pts, axis=1))
    scale = np.ones_like(nrm)
    outside = nrm > radius
    scale[outside] = radius / nrm[outside]
    return pts * scale[:, None]


def _project_l1(pts, radius):
    absx = np.abs(pts)
    inside = np.sum(absx, axis=1) <= radius
    out = pts.copy()
    if np.all(inside):
        return out
    work = absx[~inside]
    # soft threshold at the level that lands the point on the l1 sphere
    u = -np.sort(-work, axis=1)
    cum = np.cumsum(u, axis=1)
    j = np.arange(1, work.shape[1] + 1)
    cand = (cum - radius) / j
    rho = np.sum(u > cand, axis=1) - 1
    tau = cand[np.arange(work.shape[0]), rho]
    shrunk = np.maximum(work - tau[:, None], 0.0)
    out[~inside] = np.sign(pts[~inside]) * shrunk
    return out


def _project_ellipsoid(pts, eigvals, q):
    y = pts @ q
    val = np.sum(eigvals * y * y, axis=1)
    outside = val > 1.0
    if not np.any(outside):
        return pts.copy()
    yo = y[outside]

    def g(nu):
        denom = 1.0 + nu[:, None] * eigvals
        return np.sum(eigvals * (yo / denom) ** 2, axis=1)

    hi = np.ones(yo.shape[0])
    for _ in range(200):
        mask = g(hi) > 1.0
        if not np.any(mask):
            break
        hi[mask] *= 2.0
    lo = np.zeros_like(hi)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        too_big = g(mid) > 1.0
        lo = np.where(too_big, mid, lo)
        hi = np.where(too_big, hi, mid)
    nu = 0.5 * (lo + hi)
    proj = (yo / (1.0 + nu[:, None] * eigvals)) @ q.T
    out = pts.copy()
    out[outside] = proj
    return out


def _project_hpoly(pts, rows, b):
    row_sq = np.sum(rows * rows, axis=1)
    y = pts.copy()
    corr = np.zeros((rows.shape[0],) + pts.shape)
    for _ in range(_DYKSTRA_CYCLES):
        shift = 0.0
        for i in range(rows.shape[0]):
            w = y + corr[i]
            s = w @ rows[i]
            excess = np.where(s > b[i], s - b[i], np.where(s < -b[i], s + b[i], 0.0))
            ynew = w - (excess / row_sq[i])[:, None] * rows[i]
            corr[i] = w - ynew
            shift = max(shift, float(np.max(np.abs(ynew - y))))
            y = ynew
        if shift < 1e-14:
            break
    return y


def project_points(pts, kind, scal, vec, mat):
    """Euclidean projection of each row of ``pts`` onto the described body."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if kind == KIND_BOX:
        return _project_box(pts, np.asarray(vec, dtype=float))
    if kind == KIND_ELLIPSOID:
        return _project_ellipsoid(pts, np.asarray(vec, dtype=float), np.asarray(mat, dtype=float))
    if kind == KIND_L1:
        return _project_l1(pts, float(scal))
    if kind == KIND_L2:
        return _project_l2(pts, float(scal))
    if kind == KIND_LINF:
        return _project_box(pts, np.full(pts.shape[1], float(scal)))
    if kind == KIND_HPOLY:
        return _project_hpoly(pts, np.asarray(mat, dtype=float), np.asarray(vec, dtype=float))
    raise ValueError(f"unknown body kind code {kind}")


def classify_batch(pts, t,
                   kind0, scal0, vec0, mat0,
                   kind1, scal1, vec1, mat1,
                   net, hnet, tol, max_iter):
    """Three-valued membership of each point in (1-t)K0 + tK1.

    Outside verdicts come from the exact support function over the
    direction net; inside verdicts from an alternating-projection
    decomposition with residual below tol. Anything else is uncertain.
    """
    pts = np.ascontiguousarray(np.atleast_2d(pts), dtype=float)
    m = pts.shape[0]
    verdict = np.zeros(m, dtype=np.int8)

    sep = pts @ np.asarray(net, dtype=float).T - np.asarray(hnet, dtype=float)
    margin = np.max(sep, axis=1)
    verdict[margin > tol] = -1
    # the tol-shell around a supporting hyperplane stays uncertain: a point
    # there cannot be certified on either side at this resolution
    shell = (margin > -tol) & (verdict == 0)

    active = np.flatnonzero((verdict == 0) & ~shell)
    if active.size == 0:
        return verdict
    x = pts[active]
    s = 1.0 - t
    y1 = project_points(x, kind1, scal1, vec1, mat1)
    prev = np.full(x.shape[0], np.inf)
    alive = np.ones(x.shape[0], dtype=bool)
    inside = np.zeros(x.shape[0], dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        y0 = project_points((x[idx] - t * y1[idx]) / s, kind0, scal0, vec0, mat0)
        w1 = (x[idx] - s * y0) / t
        y1[idx] = project_points(w1, kind1, scal1, vec1, mat1)
        resid = t * np.sqrt(np.sum((w1 - y1[idx]) ** 2, axis=1))
        hit = resid < tol
        inside[idx[hit]] = True
        alive[idx[hit]] = False
        # geometric convergence: once the residual stops moving it has
        # effectively reached dist(x, combination) and will not dip under tol
        stalled = (prev[idx] - resid) < tol * 1e-3
        alive[idx[stalled & ~hit]] = False
        prev[idx] = resid
    verdict[active[inside]] = 1
    return verdict
