"""Numpy fallback for the support-scan kernels.

Same contracts as the compiled module (lpgreedy._scan):

* least_squares_scan: residual-squared of the best weighted-L2 approximation
  of f from each enumerated support, given the Gram matrix G and correlation
  vector b under that pairing.  Supports whose Gram submatrix is not
  numerically positive definite (relative tolerance 1e-12) come back NaN;
  callers resolve those separately.
* gram_extremes_scan: smallest and largest eigenvalue of each support's Gram
  submatrix.

Both are batched over a (S, m) int64 support index array.
"""
from __future__ import annotations

import numpy as np

_PD_TOL = 1e-12
_CHUNK = 8192


def least_squares_scan(G, b, f_norm_sq, supports):
    S, m = supports.shape
    out = np.empty(S, dtype=np.float64)
    for lo in range(0, S, _CHUNK):
        idx = supports[lo : lo + _CHUNK]
        Gs = G[idx[:, :, None], idx[:, None, :]]
        bs = b[idx]
        lam, Q = np.linalg.eigh(Gs)
        good = lam > _PD_TOL * np.maximum(lam[:, -1:], 0.0)
        qb = np.einsum("sij,si->sj", Q, bs)
        contrib = np.where(good, qb**2 / np.where(good, lam, 1.0), 0.0)
        res2 = np.maximum(f_norm_sq - contrib.sum(axis=1), 0.0)
        out[lo : lo + _CHUNK] = np.where(good.all(axis=1), res2, np.nan)
    return out


def gram_extremes_scan(G, supports):
    S, m = supports.shape
    lo_out = np.empty(S, dtype=np.float64)
    hi_out = np.empty(S, dtype=np.float64)
    for lo in range(0, S, _CHUNK):
        idx = supports[lo : lo + _CHUNK]
        lam = np.linalg.eigvalsh(G[idx[:, :, None], idx[:, None, :]])
        lo_out[lo : lo + _CHUNK] = lam[:, 0]
        hi_out[lo : lo + _CHUNK] = lam[:, -1]
    return lo_out, hi_out
