"""Finite-dimensional weighted L_p model.

A GridSpace is the discretization of L_p([0,1)^d): n coordinates carrying
positive quadrature weights that sum to 1, so constant functions have unit
norm and discrete norms of band-limited trigonometric polynomials match
their continuous values on sufficiently fine grids.  Function vectors are
plain numpy arrays bound to a space by length.

Only 1 < p < inf is admitted: the greedy convergence theory needs uniform
smoothness, which fails at p = 1 and p = inf.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, StructuralError

# relative tolerance used when validating weights
_WEIGHT_TOL = 1e-9


@dataclass(frozen=True)
class GridSpace:
    """Weighted finite-dimensional L_p space.

    Args:
        dim: number of coordinates n.
        p: norm exponent, must lie in (1, inf).
        weights: n positive reals summing to 1.  Defaults to uniform 1/n.
    """

    dim: int
    p: float
    weights: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.dim <= 0:
            raise StructuralError(f"dim must be positive, got {self.dim}")
        p = float(self.p)
        if not (1.0 < p < math.inf) or math.isnan(p):
            raise DomainError(f"p must lie in (1, inf), got {self.p}")
        object.__setattr__(self, "p", p)
        if self.weights is None:
            w = np.full(self.dim, 1.0 / self.dim)
        else:
            w = np.asarray(self.weights, dtype=float).copy()
        if w.shape != (self.dim,):
            raise StructuralError(f"weights shape {w.shape} does not match dim {self.dim}")
        if not np.all(w > 0):
            raise DomainError("all weights must be strictly positive")
        if abs(float(w.sum()) - 1.0) > _WEIGHT_TOL:
            raise DomainError(f"weights must sum to 1, got {w.sum()!r}")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, dim: int, p: float) -> "GridSpace":
        """Uniform grid on [0,1)^d with n = dim points and weights 1/n."""
        return cls(dim=dim, p=p)


def _bind(space: GridSpace, f) -> np.ndarray:
    arr = np.asarray(f, dtype=float)
    if arr.shape != (space.dim,):
        raise StructuralError(f"vector of shape {arr.shape} not bound to space of dim {space.dim}")
    return arr


def norm(space: GridSpace, f) -> float:
    """Weighted p-norm (sum_i w_i |f_i|^p)^(1/p)."""
    arr = _bind(space, f)
    return float(np.sum(space.weights * np.abs(arr) ** space.p) ** (1.0 / space.p))


def norms_rows(space: GridSpace, fs: np.ndarray) -> np.ndarray:
    """Weighted p-norm of each row of a (k, n) matrix.  Vectorized helper."""
    fs = np.asarray(fs, dtype=float)
    if fs.ndim != 2 or fs.shape[1] != space.dim:
        raise StructuralError(f"matrix of shape {fs.shape} not bound to space of dim {space.dim}")
    return np.sum(space.weights * np.abs(fs) ** space.p, axis=1) ** (1.0 / space.p)


def norming_vector(space: GridSpace, g) -> np.ndarray:
    """Representer u of the norming (peak) functional of g: F_g(h) = u . h.

    u_i = ||g||^(1-p) w_i |g_i|^(p-1) sign(g_i).  F_g satisfies F_g(g) = ||g||
    and |F_g(h)| <= ||h|| (Holder), i.e. ||F_g|| = 1 in the dual space.

    Raises:
        DomainError: if g is the zero vector (no norming functional for 0).
    """
    arr = _bind(space, g)
    gnorm = norm(space, arr)
    if gnorm == 0.0:
        raise DomainError("no norming functional for 0")
    p = space.p
    return gnorm ** (1.0 - p) * space.weights * np.abs(arr) ** (p - 1.0) * np.sign(arr)


def norming_functional(space: GridSpace, g, h) -> float:
    """Evaluate the norming functional of g at h: F_g(h)."""
    arr_h = _bind(space, h)
    return float(norming_vector(space, g) @ arr_h)


@dataclass(frozen=True)
class SmoothnessConstants:
    """Power-type modulus of smoothness parameters: rho(u) <= gamma * u^q."""

    q: float
    gamma: float
    q_dual: float

    def __post_init__(self):
        if not (1.0 < self.q <= 2.0):
            raise DomainError(f"q must lie in (1, 2], got {self.q}")
        if self.gamma <= 0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")
        if abs(self.q_dual * (self.q - 1.0) - self.q) > 1e-12 * self.q:
            raise DomainError("q_dual must equal q/(q-1)")


def smoothness_constants(p: float) -> SmoothnessConstants:
    """Known smoothness parameters of L_p.

    p >= 2      ->  q = 2, gamma = (p-1)/2
    1 < p <= 2  ->  q = p, gamma = 1/p
    """
    p = float(p)
    if not (1.0 < p < math.inf) or math.isnan(p):
        raise DomainError(f"p must lie in (1, inf), got {p}")
    if p >= 2.0:
        q, gamma = 2.0, (p - 1.0) / 2.0
    else:
        q, gamma = p, 1.0 / p
    return SmoothnessConstants(q=q, gamma=gamma, q_dual=q / (q - 1.0))


def estimate_modulus(space: GridSpace, u: float, samples: int = 1000, seed: int = 0) -> float:
    """Monte-Carlo lower estimate of the modulus of smoothness rho(u).

    Samples unit pairs (x, y) and returns the max of
    (||x + u y|| + ||x - u y||) / 2 - 1.  Always a lower bound of the true
    supremum; deterministic for a fixed seed.
    """
    if u < 0:
        raise DomainError(f"u must be nonnegative, got {u}")
    if samples < 1:
        raise DomainError(f"samples must be >= 1, got {samples}")
    if u == 0.0:
        return 0.0
    rng = np.random.default_rng(seed)
    n = space.dim
    best = 0.0
    chunk = 4096
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        x = rng.standard_normal((k, n))
        y = rng.standard_normal((k, n))
        x /= norms_rows(space, x)[:, None]
        y /= norms_rows(space, y)[:, None]
        vals = 0.5 * (norms_rows(space, x + u * y) + norms_rows(space, x - u * y) - 2.0)
        best = max(best, float(vals.max()))
        done += k
    return best
