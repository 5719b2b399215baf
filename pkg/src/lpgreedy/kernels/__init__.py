"""Support-scan kernels with backend selection at import time.

The compiled core (lpgreedy._scan, Cython) is used when built; otherwise the
numpy-batched fallback in ._pure takes over transparently.  Set
LPGREEDY_FORCE_PURE=1 to force the fallback (used by the equivalence tests
and the benchmark).
"""
from __future__ import annotations

import os

import numpy as np

from ..errors import StructuralError
from . import _pure

if os.environ.get("LPGREEDY_FORCE_PURE", "0") not in ("", "0"):
    _impl = _pure
    _BACKEND = "pure"
else:
    try:
        from lpgreedy import _scan as _impl

        _BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        _BACKEND = "pure"


def backend() -> str:
    """Name of the active backend: 'compiled' or 'pure'."""
    return _BACKEND


def _check(G, b, supports):
    G = np.ascontiguousarray(G, dtype=np.float64)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise StructuralError(f"Gram matrix must be square, got shape {G.shape}")
    supports = np.ascontiguousarray(supports, dtype=np.int64)
    if supports.ndim != 2:
        raise StructuralError(f"supports must be a 2-d index array, got shape {supports.shape}")
    if supports.size and (supports.min() < 0 or supports.max() >= G.shape[0]):
        raise StructuralError("support index out of range")
    if b is not None:
        b = np.ascontiguousarray(b, dtype=np.float64)
        if b.shape != (G.shape[0],):
            raise StructuralError(f"rhs shape {b.shape} does not match Gram size {G.shape[0]}")
    return G, b, supports


def least_squares_scan(G, b, f_norm_sq, supports):
    """Best-approximation residual-squared per support; NaN where not PD."""
    G, b, supports = _check(G, b, supports)
    return _impl.least_squares_scan(G, b, float(f_norm_sq), supports)


def gram_extremes_scan(G, supports):
    """(min eigenvalue, max eigenvalue) per support's Gram submatrix."""
    G, _, supports = _check(G, None, supports)
    return _impl.gram_extremes_scan(G, supports)
