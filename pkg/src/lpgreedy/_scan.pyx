# cython: language_level=3
"""Compiled support-scan kernels.

Hot inner loops of the exact m-term oracle and the RIP analyzer: for every
enumerated support, either a small Cholesky solve (best-approximation
residual) or a small symmetric eigenvalue problem (Gram extremes).  Support
counts run to the enumeration cap (hundreds of thousands), so the per-support
work is done in C with no Python objects in the loop.

Semantics match lpgreedy.kernels._pure; the numpy fallback is selected at
import time when this module is not built.
"""
from libc.math cimport sqrt, fabs, NAN

import numpy as np

# relative positive-definiteness tolerance, shared with the pure backend
cdef double PD_TOL = 1e-12


def least_squares_scan(double[:, ::1] G, double[::1] b, double f_norm_sq,
                       long long[:, ::1] supports):
    """Residual-squared of the best L2 approximation on each support.

    Supports whose Gram submatrix is not numerically positive definite
    (Cholesky pivot <= 1e-12 * max diagonal) come back NaN.
    """
    cdef Py_ssize_t S = supports.shape[0]
    cdef Py_ssize_t m = supports.shape[1]
    out_arr = np.empty(S, dtype=np.float64)
    cdef double[::1] out = out_arr
    if S == 0:
        return out_arr
    scratch_l = np.empty((m, m), dtype=np.float64)
    scratch_y = np.empty(m, dtype=np.float64)
    cdef double[:, ::1] L = scratch_l
    cdef double[::1] y = scratch_y
    cdef Py_ssize_t s, i, j, k
    cdef long long ii, jj
    cdef double acc, dmax, res2
    cdef bint ok
    with nogil:
        for s in range(S):
            dmax = 0.0
            for i in range(m):
                ii = supports[s, i]
                y[i] = b[ii]
                if G[ii, ii] > dmax:
                    dmax = G[ii, ii]
                for j in range(i + 1):
                    jj = supports[s, j]
                    L[i, j] = G[ii, jj]
            ok = True
            for i in range(m):
                for j in range(i):
                    acc = L[i, j]
                    for k in range(j):
                        acc -= L[i, k] * L[j, k]
                    L[i, j] = acc / L[j, j]
                acc = L[i, i]
                for k in range(i):
                    acc -= L[i, k] * L[i, k]
                if acc <= PD_TOL * dmax:
                    ok = False
                    break
                L[i, i] = sqrt(acc)
            if not ok:
                out[s] = NAN
                continue
            # forward solve L y = b_S; then b_S^T G_S^{-1} b_S = ||y||^2
            res2 = f_norm_sq
            for i in range(m):
                acc = y[i]
                for k in range(i):
                    acc -= L[i, k] * y[k]
                acc /= L[i, i]
                y[i] = acc
                res2 -= acc * acc
            out[s] = res2 if res2 > 0.0 else 0.0
    return out_arr


cdef inline void _jacobi_diagonalize(double[:, ::1] A, Py_ssize_t m) noexcept nogil:
    # cyclic Jacobi; diagonal of A converges to the eigenvalues
    cdef Py_ssize_t sweep, i, j, k
    cdef double fro, off, apq, theta, t, c, s_, aik, ajk
    fro = 0.0
    for i in range(m):
        for j in range(m):
            fro += A[i, j] * A[i, j]
    if fro == 0.0:
        return
    for sweep in range(100):
        off = 0.0
        for i in range(m - 1):
            for j in range(i + 1, m):
                off += A[i, j] * A[i, j]
        if off <= 1e-30 * fro:
            return
        for i in range(m - 1):
            for j in range(i + 1, m):
                apq = A[i, j]
                if apq == 0.0:
                    continue
                theta = 0.5 * (A[j, j] - A[i, i]) / apq
                if theta >= 0.0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s_ = t * c
                for k in range(m):
                    aik = A[i, k]
                    ajk = A[j, k]
                    A[i, k] = c * aik - s_ * ajk
                    A[j, k] = s_ * aik + c * ajk
                for k in range(m):
                    aik = A[k, i]
                    ajk = A[k, j]
                    A[k, i] = c * aik - s_ * ajk
                    A[k, j] = s_ * aik + c * ajk


def gram_extremes_scan(double[:, ::1] G, long long[:, ::1] supports):
    """Smallest and largest eigenvalue of each support's Gram submatrix."""
    cdef Py_ssize_t S = supports.shape[0]
    cdef Py_ssize_t m = supports.shape[1]
    lo_arr = np.empty(S, dtype=np.float64)
    hi_arr = np.empty(S, dtype=np.float64)
    cdef double[::1] lo = lo_arr
    cdef double[::1] hi = hi_arr
    if S == 0:
        return lo_arr, hi_arr
    scratch = np.empty((m, m), dtype=np.float64)
    cdef double[:, ::1] A = scratch
    cdef Py_ssize_t s, i, j
    cdef long long ii, jj
    cdef double lmin, lmax
    with nogil:
        for s in range(S):
            for i in range(m):
                ii = supports[s, i]
                for j in range(m):
                    jj = supports[s, j]
                    A[i, j] = G[ii, jj]
            _jacobi_diagonalize(A, m)
            lmin = A[0, 0]
            lmax = A[0, 0]
            for i in range(1, m):
                if A[i, i] < lmin:
                    lmin = A[i, i]
                if A[i, i] > lmax:
                    lmax = A[i, i]
            lo[s] = lmin
            hi[s] = lmax
    return lo_arr, hi_arr
