# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled dense kernels; see ``_pykernels`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, log, pow, INFINITY, NAN

cnp.import_array()

NAME = "cython"


cdef double _lp(const double[::1] v, double p) noexcept nogil:
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double m = 0.0, s = 0.0, t
    for i in range(n):
        t = fabs(v[i])
        if t > m:
            m = t
    if m == 0.0:
        return 0.0
    for i in range(n):
        s += pow(fabs(v[i]) / m, p)
    return m * pow(s, 1.0 / p)


cdef void _omega_into(const double[::1] v, double p, double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double nrm = _lp(v, p)
    for i in range(n):
        if v[i] != 0.0 and nrm > 0.0:
            out[i] = v[i] * log(fabs(v[i]) / nrm)
        else:
            out[i] = 0.0


cdef double _qnorm(const double[::1] x, const double[::1] y, double p, double[::1] work) noexcept nogil:
    cdef Py_ssize_t i, n = x.shape[0]
    _omega_into(y, p, work)
    for i in range(n):
        work[i] = x[i] - work[i]
    return _lp(work, p) + _lp(y, p)


cdef double _defect(const double[::1] a, const double[::1] x, double p,
                    double[::1] ax, double[::1] w1, double[::1] w2):
    cdef Py_ssize_t i, n = x.shape[0]
    for i in range(n):
        ax[i] = a[i] * x[i]
    _omega_into(ax, p, w1)
    _omega_into(x, p, w2)
    for i in range(n):
        w1[i] = w1[i] - a[i] * w2[i]
    return _lp(w1, p)


def lp_norm(v, double p):
    cdef const double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    return _lp(vv, p)


def omega(v, double p):
    cdef const double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    out = np.empty(vv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    _omega_into(vv, p, ov)
    return out


def qnorm(x, y, double p):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[::1] work = np.empty(xv.shape[0], dtype=np.float64)
    return _qnorm(xv, yv, p, work)


def defect(a, x, double p):
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    return _defect(av, xv, p, np.empty(n), np.empty(n), np.empty(n))


def defect_ratios(A, X, double p):
    cdef const double[:, ::1] Av = np.ascontiguousarray(np.atleast_2d(A), dtype=np.float64)
    cdef const double[:, ::1] Xv = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
    cdef Py_ssize_t t, i, T = Av.shape[0], n = Av.shape[1]
    cdef double[::1] ax = np.empty(n), w1 = np.empty(n), w2 = np.empty(n)
    out = np.empty(T, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double amax, den
    for t in range(T):
        amax = 0.0
        for i in range(n):
            if fabs(Av[t, i]) > amax:
                amax = fabs(Av[t, i])
        den = amax * _lp(Xv[t], p)
        if den > 0.0:
            ov[t] = _defect(Av[t], Xv[t], p, ax, w1, w2) / den
        else:
            ov[t] = NAN
    return out


def triangle_ratios(ZX, ZY, WX, WY, double p):
    cdef const double[:, ::1] zx = np.ascontiguousarray(np.atleast_2d(ZX), dtype=np.float64)
    cdef const double[:, ::1] zy = np.ascontiguousarray(np.atleast_2d(ZY), dtype=np.float64)
    cdef const double[:, ::1] wx = np.ascontiguousarray(np.atleast_2d(WX), dtype=np.float64)
    cdef const double[:, ::1] wy = np.ascontiguousarray(np.atleast_2d(WY), dtype=np.float64)
    cdef Py_ssize_t t, i, T = zx.shape[0], n = zx.shape[1]
    cdef double[::1] sx = np.empty(n), sy = np.empty(n), work = np.empty(n)
    out = np.empty(T, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double den
    with nogil:
        for t in range(T):
            den = _qnorm(zx[t], zy[t], p, work) + _qnorm(wx[t], wy[t], p, work)
            if den > 0.0:
                for i in range(n):
                    sx[i] = zx[t, i] + wx[t, i]
                    sy[i] = zy[t, i] + wy[t, i]
                ov[t] = _qnorm(sx, sy, p, work) / den
            else:
                ov[t] = NAN
    return out


def lift_disjoint(values, offsets, double p):
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef const long long[::1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef Py_ssize_t k, i, n = v.shape[0]
    cdef double[::1] diff = np.empty(n)
    cdef double S, c, res
    with nogil:
        S = _lp(v, p)
        for i in range(n):
            diff[i] = v[i] * log(fabs(v[i]) / S) if v[i] != 0.0 else 0.0
        for k in range(off.shape[0] - 1):
            c = _lp(v[off[k]:off[k + 1]], p)
            for i in range(off[k], off[k + 1]):
                if v[i] != 0.0:
                    diff[i] -= v[i] * log(fabs(v[i]) / c)
        res = _lp(diff, p)
    return res


def sphere_objective(c, B, A, double p):
    cdef const double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef const double[:, ::1] Bv = np.ascontiguousarray(np.atleast_2d(B), dtype=np.float64)
    cdef const double[:, ::1] Av = np.ascontiguousarray(np.atleast_2d(A), dtype=np.float64)
    cdef Py_ssize_t i, j, k = Bv.shape[0], n = Bv.shape[1]
    cdef double[::1] u = np.zeros(n), d = np.empty(n)
    cdef double nrm, best = INFINITY, dist
    with nogil:
        for j in range(k):
            for i in range(n):
                u[i] += cv[j] * Bv[j, i]
        nrm = _lp(u, p)
        if nrm > 0.0:
            for i in range(n):
                u[i] /= nrm
        for j in range(Av.shape[0] if nrm > 0.0 else 0):
            for i in range(n):
                d[i] = u[i] - Av[j, i]
            dist = _lp(d, p)
            if dist < best:
                best = dist
    return best
