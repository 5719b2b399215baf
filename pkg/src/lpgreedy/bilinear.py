"""Greedy rank-one deflation for matrices, checked against the SVD tail.

A matrix is read as samples of a two-variable function on a product grid
with product probability weights, and the dictionary is the set of unit
rank-one products.  In that weighted L2 geometry the best single term is the
leading singular triple of the weight-conjugated matrix, so repeated
extract-and-subtract reproduces the Schmidt expansion, and the truncation
error has an exact closed form: the norm of the singular-value tail.  Only
this configuration ships; for other exponents and more factors there is no
closed-form oracle to hold the algorithm against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SolverError, StructuralError

_WEIGHT_TOL = 1e-9
_ZERO_RESIDUAL = 1e-14
_MAX_SWEEPS = 100_000
_MAX_RESTARTS = 5


@dataclass(frozen=True)
class Matrix2D:
    """Real matrix with positive row and column probability weights.

    Args:
        values: rows x cols array of samples.
        row_weights: positive reals summing to 1, one per row.  Uniform by
            default, as are col_weights.
    """

    values: np.ndarray
    row_weights: np.ndarray = field(default=None, repr=False)
    col_weights: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[0] < 1 or vals.shape[1] < 1:
            raise StructuralError(f"matrix must be 2-d and nonempty, got shape {vals.shape}")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        for name, count in (("row_weights", vals.shape[0]), ("col_weights", vals.shape[1])):
            w = getattr(self, name)
            w = np.full(count, 1.0 / count) if w is None else np.asarray(w, dtype=float).copy()
            if w.shape != (count,):
                raise StructuralError(f"{name} shape {w.shape} does not match {count}")
            if not np.all(w > 0):
                raise DomainError(f"all {name} must be strictly positive")
            if abs(float(w.sum()) - 1.0) > _WEIGHT_TOL:
                raise DomainError(f"{name} must sum to 1, got {w.sum()!r}")
            w.flags.writeable = False
            object.__setattr__(self, name, w)

    @property
    def shape(self):
        return self.values.shape

    def norm(self) -> float:
        """Weighted L2 norm of the sample matrix."""
        return float(np.sqrt(np.sum(self.row_weights[:, None] * self.col_weights * self.values**2)))


def _conjugated(m: Matrix2D) -> np.ndarray:
    # weighted geometry -> plain Frobenius geometry
    return np.sqrt(m.row_weights)[:, None] * m.values * np.sqrt(m.col_weights)


def save_csv(m: Matrix2D, path) -> None:
    """Write the sample values as plain CSV (weights are not stored)."""
    np.savetxt(path, m.values, delimiter=",")


def load_csv(path, row_weights=None, col_weights=None) -> Matrix2D:
    """Read sample values from CSV; weights default to uniform."""
    vals = np.loadtxt(path, delimiter=",", ndmin=2)
    return Matrix2D(vals, row_weights, col_weights)


def theta_M(m: Matrix2D, M: int) -> float:
    """Exact best rank-M approximation error: the singular-value tail norm."""
    M = int(M)
    if M < 0:
        raise DomainError(f"term count must be nonnegative, got {M}")
    sv = np.linalg.svd(_conjugated(m), compute_uv=False)
    return float(np.sqrt(np.sum(sv[M:] ** 2)))


def _sweep_to_fixed_point(A: np.ndarray, v: np.ndarray, tol: float):
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return None
    v = v / nv
    opt_ref = math.inf
    since_progress = 0
    for _ in range(_MAX_SWEEPS):
        u = A @ v
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return None
        u /= nu
        vr = A.T @ u
        sigma = float(np.linalg.norm(vr))
        if sigma == 0.0:
            return None
        v = vr / sigma
        opt = max(
            np.linalg.norm(A @ v - sigma * u),
            np.linalg.norm(A.T @ u - sigma * v),
        ) / sigma
        if opt <= 10.0 * tol:
            return u, v, sigma
        # the value settles quadratically faster than the vectors, so watch
        # the defect itself: stuck means no halving over a long stretch
        if opt <= 0.5 * opt_ref:
            opt_ref = opt
            since_progress = 0
        else:
            since_progress += 1
            if since_progress >= 2000:
                return None
    return None


def _leading_triple(A: np.ndarray, tol: float):
    """Leading singular triple of A by two-sided power iteration.

    Deterministic start on the largest row; restarts with seeded random
    vectors if the sweep stagnates away from a stationary pair.
    """
    row_norms = np.linalg.norm(A, axis=1)
    v = A[int(np.argmax(row_norms))].copy()
    for attempt in range(_MAX_RESTARTS + 1):
        out = _sweep_to_fixed_point(A, v, tol)
        if out is not None:
            return out
        rng = np.random.default_rng(attempt)
        v = rng.standard_normal(A.shape[1])
    raise SolverError(
        f"rank-one extraction did not reach a stationary pair after {_MAX_RESTARTS} restarts"
    )


def greedy_rank_one(m: Matrix2D, M: int, tol: float = 1e-10):
    """Extract up to M best rank-one terms by deflation.

    Returns (terms, residual_norms): terms is a list of (u, v) pairs with the
    scale folded into u, so the approximant after k steps is the sum of the
    first k outer products u v^T; residual_norms[k] is the weighted norm of
    the residual after k steps, starting at the full norm.  Stops early once
    the residual is numerically zero (input rank exhausted).
    """
    M = int(M)
    if M < 1:
        raise DomainError(f"term count must be at least 1, got {M}")
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol}")
    sr = np.sqrt(m.row_weights)
    sc = np.sqrt(m.col_weights)
    A = _conjugated(m)
    norm0 = float(np.linalg.norm(A))
    residual_norms = [norm0]
    terms = []
    for _ in range(M):
        if residual_norms[-1] <= _ZERO_RESIDUAL * max(norm0, 1.0):
            break
        u_hat, v_hat, sigma = _leading_triple(A, tol)
        A = A - sigma * np.outer(u_hat, v_hat)
        terms.append((sigma * u_hat / sr, v_hat / sc))
        residual_norms.append(float(np.linalg.norm(A)))
    return terms, residual_norms
