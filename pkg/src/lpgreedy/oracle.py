"""Exact best m-term benchmarks and Lebesgue-type ratios.

sigma_m_exact enumerates every candidate support, so its cost is the number
of supports times one small solve; the cap keeps that honest and loud.  The
p=2 scan runs through the support kernel, then near-winners are re-solved
explicitly: the scan's closed form loses half the digits exactly where the
answer is interesting (residuals near zero), the explicit solve does not.
There is no sampling fallback here on purpose.  Everything downstream treats
these numbers as ground truth, so the only honest failure mode is an error.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigurationError, DomainError, SolverError, StructuralError
from .greedy import ChebyshevConfig, chebyshev_project
from .space import GridSpace, norm

# relative (to ||f||^2) width of the explicit re-solve window, and how many
# lexicographically-first near-winners get re-solved
_REFINE_WINDOW = 1e-9
_REFINE_CAP = 1024
# relative width for reporting a tied support
_TIE_TOL = 1e-12
# lebesgue_ratio zero conventions, relative to ||f0||
_SIGMA_ZERO = 1e-12
_RESIDUAL_ZERO = 1e-9
# a stalled general-p solve is still usable when its certificate is this
# small: the value error is quadratic in the certificate, so 1e-7 keeps the
# reported norm far inside every tolerance downstream
_STALL_ACCEPT = 1e-7


@dataclass(frozen=True)
class OracleConfig:
    """Budget and accuracy knobs for the exhaustive oracle.

    cap bounds the number of enumerated supports, kkt_tol is the certificate
    tolerance handed to the general-p projector, and fast_path enables the
    orthonormal shortcut (top-m coefficients instead of enumeration).
    """

    cap: int = 500_000
    kkt_tol: float = 1e-11
    fast_path: bool = True

    def __post_init__(self):
        if self.cap < 1:
            raise DomainError(f"cap must be at least 1, got {self.cap}")
        if not self.kkt_tol > 0.0:
            raise DomainError(f"kkt_tol must be positive, got {self.kkt_tol}")


def _is_orthonormal(dictionary) -> bool:
    E = dictionary.elements
    G = E.T @ (E * dictionary.space.weights[:, None])
    return bool(np.max(np.abs(G - np.eye(dictionary.count))) <= 1e-12)


def _explicit_res2(B, y, idx) -> float:
    # rank-deficient supports are fine here, lstsq takes the span
    c, _, _, _ = np.linalg.lstsq(B[:, idx], y, rcond=None)
    r = y - B[:, idx] @ c
    return float(r @ r)


def _fast_orthonormal(space: GridSpace, f0, E, k):
    sw = np.sqrt(space.weights)
    B = E * sw[:, None]
    y = f0 * sw
    c = B.T @ y
    order = np.argsort(-np.abs(c), kind="stable")
    top = np.sort(order[:k])
    r = y - B[:, top] @ c[top]
    return float(np.sqrt(r @ r)), tuple(int(i) for i in top)


def _exhaustive_l2(space: GridSpace, f0, E, k, count):
    sw = np.sqrt(space.weights)
    B = E * sw[:, None]
    y = f0 * sw
    G = B.T @ B
    b = B.T @ y
    f2 = float(y @ y)
    supports = np.array(
        list(itertools.combinations(range(count), k)), dtype=np.int64
    ).reshape(-1, k)
    vals = kernels.least_squares_scan(G, b, f2, supports)
    for i in np.flatnonzero(np.isnan(vals)):
        vals[i] = _explicit_res2(B, y, supports[i])
    window = float(np.min(vals)) + max(_REFINE_WINDOW * f2, 1e-18)
    cand = np.flatnonzero(vals <= window)[:_REFINE_CAP]
    refined = [math.sqrt(_explicit_res2(B, y, supports[i])) for i in cand]
    best = min(refined)
    slack = _TIE_TOL * math.sqrt(f2)
    for i, val in zip(cand, refined):
        if val <= best + slack:
            return best, tuple(int(j) for j in supports[i])


def _general_residual(space: GridSpace, f0, cols, base, retry) -> float:
    try:
        proj = chebyshev_project(space, f0, cols, base)
    except SolverError:
        try:
            proj = chebyshev_project(space, f0, cols, retry)
        except SolverError as err:
            # for p < 2 the certificate bottoms out near 1e-9 in double
            # precision; the value error is quadratic in it, so take the
            # stalled iterate rather than fail, as long as it is small
            if err.grad_norm is None or err.grad_norm > _STALL_ACCEPT:
                raise
            return norm(space, f0 - cols @ err.coefficients)
    return norm(space, proj.residual)


def _exhaustive_general(space: GridSpace, f0, E, k, count, cfg: OracleConfig):
    base = ChebyshevConfig(kkt_tol=cfg.kkt_tol)
    retry = ChebyshevConfig(kkt_tol=10.0 * cfg.kkt_tol, max_iter=3000)
    slack = _TIE_TOL * norm(space, f0)
    vmin = math.inf
    cands = []
    for idx in itertools.combinations(range(count), k):
        val = _general_residual(space, f0, E[:, list(idx)], base, retry)
        if val < vmin:
            vmin = val
            cands = [c for c in cands if c[0] <= vmin + slack]
        if val <= vmin + slack:
            cands.append((val, idx))
    return vmin, tuple(cands[0][1])


def sigma_m_exact(f0, dictionary, m, cfg: OracleConfig = None):
    """Exact best m-term approximation error and a minimizing support.

    Minimizes the residual norm over every support of size min(m, count) by
    direct enumeration.  Ties go to the lexicographically first support.
    Raises ConfigurationError once the enumeration would exceed cfg.cap;
    there is deliberately no approximate fallback.
    """
    if cfg is None:
        cfg = OracleConfig()
    space = dictionary.space
    f0 = np.asarray(f0, dtype=np.float64)
    if f0.shape != (space.dim,):
        raise StructuralError(
            f"signal has shape {f0.shape}, space has dimension {space.dim}"
        )
    m = int(m)
    if m < 0:
        raise DomainError(f"term count must be nonnegative, got {m}")
    if m == 0:
        return norm(space, f0), ()
    count = dictionary.count
    k = min(m, count)
    n_supports = math.comb(count, k)
    if n_supports > cfg.cap:
        raise ConfigurationError(
            f"exact search over {n_supports} supports (count={count}, m={k}) "
            f"exceeds the cap of {cfg.cap}; reduce the dictionary size or m, "
            "or raise OracleConfig.cap"
        )
    E = dictionary.elements
    if space.p == 2.0:
        if cfg.fast_path and _is_orthonormal(dictionary):
            return _fast_orthonormal(space, f0, E, k)
        return _exhaustive_l2(space, f0, E, k, count)
    return _exhaustive_general(space, f0, E, k, count, cfg)


def lebesgue_ratio(trace, f0, dictionary, m, iterations_used=None, cfg: OracleConfig = None):
    """Greedy residual after iterations_used steps over the exact m-term error.

    Conventions when the oracle value vanishes (relative to ||f0||): a residual
    that also vanished gives ratio 1, a residual that did not gives inf (the
    run failed to recover something exactly recoverable).
    """
    if iterations_used is None:
        iterations_used = trace.iterations
    iterations_used = int(iterations_used)
    if not 0 <= iterations_used <= trace.iterations:
        raise StructuralError(
            f"iterations_used={iterations_used} outside the recorded range "
            f"0..{trace.iterations}"
        )
    numerator = float(trace.residual_norms[iterations_used])
    res0 = float(trace.residual_norms[0])
    sigma, _ = sigma_m_exact(f0, dictionary, m, cfg)
    if sigma <= _SIGMA_ZERO * res0:
        return 1.0 if numerator <= _RESIDUAL_ZERO * res0 else math.inf
    return numerator / sigma
