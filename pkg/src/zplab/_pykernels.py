"""Numpy implementation of the dense kernels.

Mirrors ``_ckernels.pyx`` function for function; used when the compiled
extension is unavailable or ``ZPLAB_PURE=1`` is set.
"""
import numpy as np

NAME = "python"


def lp_norm(v, p):
    v = np.abs(np.asarray(v, dtype=np.float64))
    if v.size == 0:
        return 0.0
    m = v.max()
    if m == 0.0:
        return 0.0
    return float(m * np.sum((v / m) ** p) ** (1.0 / p))


def omega(v, p):
    v = np.asarray(v, dtype=np.float64)
    out = np.zeros_like(v)
    nrm = lp_norm(v, p)
    if nrm == 0.0:
        return out
    nz = v != 0.0
    out[nz] = v[nz] * np.log(np.abs(v[nz]) / nrm)
    return out


def qnorm(x, y, p):
    return lp_norm(np.asarray(x, dtype=np.float64) - omega(y, p), p) + lp_norm(y, p)


def defect(a, x, p):
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    return lp_norm(omega(a * x, p) - a * omega(x, p), p)


def defect_ratios(A, X, p):
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    out = np.full(A.shape[0], np.nan)
    for t in range(A.shape[0]):
        den = np.abs(A[t]).max(initial=0.0) * lp_norm(X[t], p)
        if den > 0.0:
            out[t] = defect(A[t], X[t], p) / den
    return out


def triangle_ratios(ZX, ZY, WX, WY, p):
    ZX, ZY, WX, WY = (np.atleast_2d(np.asarray(M, dtype=np.float64)) for M in (ZX, ZY, WX, WY))
    out = np.full(ZX.shape[0], np.nan)
    for t in range(ZX.shape[0]):
        den = qnorm(ZX[t], ZY[t], p) + qnorm(WX[t], WY[t], p)
        if den > 0.0:
            out[t] = qnorm(ZX[t] + WX[t], ZY[t] + WY[t], p) / den
    return out


def lift_disjoint(values, offsets, p):
    values = np.asarray(values, dtype=np.float64)
    offsets = np.asarray(offsets, dtype=np.int64)
    diff = omega(values, p)
    for k in range(len(offsets) - 1):
        sl = slice(offsets[k], offsets[k + 1])
        diff[sl] -= omega(values[sl], p)
    return lp_norm(diff, p)


def sphere_objective(c, B, A, p):
    u = np.asarray(c, dtype=np.float64) @ np.atleast_2d(B)
    nrm = lp_norm(u, p)
    if nrm == 0.0:
        return np.inf
    u = u / nrm
    A = np.atleast_2d(A)
    return min(lp_norm(u - a, p) for a in A)
