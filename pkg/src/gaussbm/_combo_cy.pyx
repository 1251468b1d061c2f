# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled membership kernel for Minkowski combinations.

Same contract as the numpy twin in ``_combo_np``: see that module for the
descriptor layout and verdict codes. The point loop here is scalar, which
wins once the alternating projection needs more than a couple of sweeps.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

cdef int KIND_BOX = 0
cdef int KIND_ELLIPSOID = 1
cdef int KIND_L1 = 2
cdef int KIND_L2 = 3
cdef int KIND_LINF = 4
cdef int KIND_HPOLY = 5

cdef int DYKSTRA_CYCLES = 500


cdef void _proj_box(const double* x, double* out, const double[::1] hw, int n) noexcept nogil:
    cdef int i
    for i in range(n):
        out[i] = x[i]
        if out[i] > hw[i]:
            out[i] = hw[i]
        elif out[i] < -hw[i]:
            out[i] = -hw[i]


cdef void _proj_linf(const double* x, double* out, double r, int n) noexcept nogil:
    cdef int i
    for i in range(n):
        out[i] = x[i]
        if out[i] > r:
            out[i] = r
        elif out[i] < -r:
            out[i] = -r


cdef void _proj_l2(const double* x, double* out, double r, int n) noexcept nogil:
    cdef int i
    cdef double nrm = 0.0
    for i in range(n):
        nrm += x[i] * x[i]
    nrm = sqrt(nrm)
    if nrm <= r:
        for i in range(n):
            out[i] = x[i]
    else:
        for i in range(n):
            out[i] = x[i] * (r / nrm)


cdef void _proj_l1(const double* x, double* out, double r, int n, double* scratch) noexcept nogil:
    cdef int i, j, rho
    cdef double total = 0.0, tmp, cum, cand, tau
    for i in range(n):
        scratch[i] = fabs(x[i])
        total += scratch[i]
    if total <= r:
        for i in range(n):
            out[i] = x[i]
        return
    # insertion sort descending; dimensions here are tiny
    for i in range(1, n):
        tmp = scratch[i]
        j = i - 1
        while j >= 0 and scratch[j] < tmp:
            scratch[j + 1] = scratch[j]
            j -= 1
        scratch[j + 1] = tmp
    cum = 0.0
    rho = 0
    tau = 0.0
    for i in range(n):
        cum += scratch[i]
        cand = (cum - r) / (i + 1)
        if scratch[i] > cand:
            rho = i
            tau = cand
    for i in range(n):
        tmp = fabs(x[i]) - tau
        if tmp < 0.0:
            tmp = 0.0
        out[i] = tmp if x[i] >= 0.0 else -tmp


cdef void _proj_ellipsoid(const double* x, double* out, const double[::1] eig, const double[:, ::1] q,
                          int n, double* y) noexcept nogil:
    cdef int i, k, it
    cdef double val = 0.0, lo, hi, mid, g, denom, nu
    for i in range(n):
        y[i] = 0.0
        for k in range(n):
            y[i] += q[k, i] * x[k]
    for i in range(n):
        val += eig[i] * y[i] * y[i]
    if val <= 1.0:
        for i in range(n):
            out[i] = x[i]
        return
    hi = 1.0
    for it in range(200):
        g = 0.0
        for i in range(n):
            denom = 1.0 + hi * eig[i]
            g += eig[i] * (y[i] / denom) * (y[i] / denom)
        if g <= 1.0:
            break
        hi *= 2.0
    lo = 0.0
    for it in range(80):
        mid = 0.5 * (lo + hi)
        g = 0.0
        for i in range(n):
            denom = 1.0 + mid * eig[i]
            g += eig[i] * (y[i] / denom) * (y[i] / denom)
        if g > 1.0:
            lo = mid
        else:
            hi = mid
    nu = 0.5 * (lo + hi)
    for i in range(n):
        y[i] = y[i] / (1.0 + nu * eig[i])
    for i in range(n):
        out[i] = 0.0
        for k in range(n):
            out[i] += q[i, k] * y[k]


cdef void _proj_hpoly(const double* x, double* out, const double[:, ::1] rows, const double[::1] b,
                      const double[::1] row_sq, int n, double* corr, double* w) noexcept nogil:
    cdef int nrows = rows.shape[0]
    cdef int i, k, cyc
    cdef double s, excess, shift, d
    for i in range(n):
        out[i] = x[i]
    for i in range(nrows * n):
        corr[i] = 0.0
    for cyc in range(DYKSTRA_CYCLES):
        shift = 0.0
        for k in range(nrows):
            s = 0.0
            for i in range(n):
                w[i] = out[i] + corr[k * n + i]
                s += w[i] * rows[k, i]
            if s > b[k]:
                excess = s - b[k]
            elif s < -b[k]:
                excess = s + b[k]
            else:
                excess = 0.0
            for i in range(n):
                d = w[i] - (excess / row_sq[k]) * rows[k, i]
                corr[k * n + i] = w[i] - d
                if fabs(d - out[i]) > shift:
                    shift = fabs(d - out[i])
                out[i] = d
        if shift < 1e-14:
            break


cdef void _project(int kind, double scal, const double[::1] vec, const double[:, ::1] mat,
                   const double[::1] row_sq, const double* x, double* out, int n,
                   double* big, double* small) noexcept nogil:
    # big holds nrows*n doubles (Dykstra corrections), small holds n doubles
    if kind == KIND_BOX:
        _proj_box(x, out, vec, n)
    elif kind == KIND_ELLIPSOID:
        _proj_ellipsoid(x, out, vec, mat, n, small)
    elif kind == KIND_L1:
        _proj_l1(x, out, scal, n, small)
    elif kind == KIND_L2:
        _proj_l2(x, out, scal, n)
    elif kind == KIND_LINF:
        _proj_linf(x, out, scal, n)
    else:
        _proj_hpoly(x, out, mat, vec, row_sq, n, big, small)


def classify_batch(pts, double t,
                   int kind0, double scal0, vec0, mat0,
                   int kind1, double scal1, vec1, mat1,
                   net, hnet, double tol, int max_iter):
    """Three-valued membership of each point in (1-t)K0 + tK1."""
    cdef const double[:, ::1] x = np.ascontiguousarray(np.atleast_2d(pts), dtype=np.float64)
    cdef const double[::1] v0 = np.ascontiguousarray(vec0, dtype=np.float64)
    cdef const double[:, ::1] m0 = np.ascontiguousarray(mat0, dtype=np.float64)
    cdef const double[::1] v1 = np.ascontiguousarray(vec1, dtype=np.float64)
    cdef const double[:, ::1] m1 = np.ascontiguousarray(mat1, dtype=np.float64)
    cdef const double[:, ::1] u = np.ascontiguousarray(net, dtype=np.float64)
    cdef const double[::1] h = np.ascontiguousarray(hnet, dtype=np.float64)

    cdef Py_ssize_t m = x.shape[0]
    cdef int n = <int> x.shape[1]
    cdef int knet = <int> u.shape[0]
    out_arr = np.zeros(m, dtype=np.int8)
    cdef signed char[::1] verdict = out_arr

    rs0_arr = np.sum(np.asarray(m0) ** 2, axis=1) if kind0 == KIND_HPOLY else np.empty(0)
    rs1_arr = np.sum(np.asarray(m1) ** 2, axis=1) if kind1 == KIND_HPOLY else np.empty(0)
    cdef const double[::1] rs0 = np.ascontiguousarray(rs0_arr, dtype=np.float64)
    cdef const double[::1] rs1 = np.ascontiguousarray(rs1_arr, dtype=np.float64)

    cdef int max_rows = 1
    if kind0 == KIND_HPOLY and m0.shape[0] > max_rows:
        max_rows = <int> m0.shape[0]
    if kind1 == KIND_HPOLY and m1.shape[0] > max_rows:
        max_rows = <int> m1.shape[0]
    buf = np.zeros((6 + max_rows, n), dtype=np.float64)
    cdef double[:, ::1] scratch = buf

    cdef Py_ssize_t p
    cdef int i, k, it
    cdef double s = 1.0 - t
    cdef double sep, dot, resid, prev
    cdef const double* xp
    cdef double* y0 = &scratch[0, 0]
    cdef double* y1 = &scratch[1, 0]
    cdef double* w0 = &scratch[2, 0]
    cdef double* w1 = &scratch[3, 0]
    cdef double* small = &scratch[4, 0]
    cdef double* corr = &scratch[5, 0]

    with nogil:
        for p in range(m):
            xp = &x[p, 0]
            sep = -1.0
            for k in range(knet):
                dot = 0.0
                for i in range(n):
                    dot += xp[i] * u[k, i]
                if dot - h[k] > sep:
                    sep = dot - h[k]
            if sep > tol:
                verdict[p] = -1
                continue
            if sep > -tol:
                # tol-shell around a supporting hyperplane: uncertain
                continue
            _project(kind1, scal1, v1, m1, rs1, xp, y1, n, corr, small)
            prev = 1e308
            for it in range(max_iter):
                for i in range(n):
                    w0[i] = (xp[i] - t * y1[i]) / s
                _project(kind0, scal0, v0, m0, rs0, w0, y0, n, corr, small)
                for i in range(n):
                    w1[i] = (xp[i] - s * y0[i]) / t
                _project(kind1, scal1, v1, m1, rs1, w1, y1, n, corr, small)
                resid = 0.0
                for i in range(n):
                    resid += (w1[i] - y1[i]) * (w1[i] - y1[i])
                resid = t * sqrt(resid)
                if resid < tol:
                    verdict[p] = 1
                    break
                if prev - resid < tol * 1e-3:
                    break
                prev = resid
    return out_arr
