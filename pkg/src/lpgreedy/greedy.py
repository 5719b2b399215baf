"""Greedy approximation algorithms over a dictionary.

Three algorithms:

* tga  -- thresholding: keep the m largest-magnitude expansion coefficients
          of f with respect to a (square, full-rank) basis.
* womp -- weak orthogonal matching pursuit, the Hilbert-space (p = 2)
          specialization with an incrementally updated QR projection.
* wcga -- weak Chebyshev greedy algorithm for general 1 < p < inf: select by
          norming-functional magnitude, then re-project f0 onto the span of
          everything selected so far (best approximation in L_p).

Selection contract shared by womp/wcga: the element achieving
|F_residual(g)| >= t * max_g |F_residual(g)|.  strict_max picks the maximizer
(lowest index on ties); adversarial_weak picks the lowest-index admissible
element, deliberately the worst documented choice, to stress the theory's
t-dependent guarantees.

Also here: the Chebyshev projection solver (closed form at p = 2, damped
Newton with an IRLS-style Hessian otherwise, optimality certified through the
norming-functional KKT condition) and the two explicit rate-bound evaluators
used by the experiment harness.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dictionary import Dictionary
from .errors import DomainError, SolverError, StructuralError
from .space import GridSpace, SmoothnessConstants, norm, norming_vector

# euclidean rank tolerance for span updates (womp skip-and-warn, wcga de-dup)
_RANK_TOL = 1e-12

_MODES = ("strict_max", "adversarial_weak")
_TERMINATIONS = ("max_iters", "residual_tol", "zero_functionals")


@dataclass(frozen=True)
class WeaknessPolicy:
    """Weakness parameter t in (0,1] and the rule resolving 'any element satisfying'."""

    t: float = 1.0
    mode: str = "strict_max"

    def __post_init__(self):
        if not (0.0 < self.t <= 1.0):
            raise DomainError(f"weakness parameter t must lie in (0, 1], got {self.t}")
        if self.mode not in _MODES:
            raise DomainError(f"mode must be one of {_MODES}, got {self.mode!r}")


@dataclass(frozen=True)
class ChebyshevConfig:
    """Projection solver controls.

    kkt_tol:      certificate tolerance on max_j |F_residual(u_j)|.
    max_iter:     Newton iteration budget for p != 2.
    residual_tol: greedy runs stop when ||f_m|| <= residual_tol * ||f0||.
    zero_tol:     greedy runs stop when the functional scan max <= zero_tol * ||f0||.
    """

    kkt_tol: float = 1e-10
    max_iter: int = 500
    residual_tol: float = 1e-10
    zero_tol: float = 1e-14


@dataclass
class GreedyTrace:
    """Complete record of one greedy run.

    selected[i] is the element chosen at iteration i+1; coefficients[i] is the
    projection coefficient vector after that iteration, aligned with
    selected[:i+1] (elements excluded from the span carry coefficient 0).
    residual_norms[0] is ||f0||.  achieved/scan_max record the selection
    contract |F(phi)| >= t * sup |F(g)| per iteration.
    """

    algorithm: str
    p: float
    t: float
    mode: str
    selected: list = field(default_factory=list)
    coefficients: list = field(default_factory=list)
    residual_norms: list = field(default_factory=list)
    scan_max: list = field(default_factory=list)
    achieved: list = field(default_factory=list)
    kkt: list = field(default_factory=list)
    termination: str = "max_iters"

    @property
    def iterations(self) -> int:
        return len(self.selected)

    def check(self) -> list:
        """Invariant violations, empty when clean.

        Residual monotonicity is asserted for the projection algorithms
        (womp/wcga), where the approximant comes from a growing span; tga's
        thresholding partial sums carry no such guarantee.
        """
        out = []
        if self.termination not in _TERMINATIONS:
            out.append(f"unknown termination {self.termination!r}")
        if self.algorithm in ("womp", "wcga"):
            slack = 1e-10 * self.residual_norms[0] if self.residual_norms else 0.0
            for i in range(1, len(self.residual_norms)):
                if self.residual_norms[i] > self.residual_norms[i - 1] + slack:
                    out.append(
                        f"residual increased at iteration {i}: "
                        f"{self.residual_norms[i - 1]!r} -> {self.residual_norms[i]!r}"
                    )
        for i, (a, s) in enumerate(zip(self.achieved, self.scan_max)):
            if a < self.t * s - 1e-12:
                out.append(f"weak selection contract broken at iteration {i + 1}: {a!r} < t*{s!r}")
        return out

    def to_json_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "p": self.p,
            "t": self.t,
            "mode": self.mode,
            "selected": [int(i) for i in self.selected],
            "coefficients": [[float(x) for x in c] for c in self.coefficients],
            "residual_norms": [float(x) for x in self.residual_norms],
            "scan_max": [float(x) for x in self.scan_max],
            "achieved": [float(x) for x in self.achieved],
            "kkt": [float(x) for x in self.kkt],
            "termination": self.termination,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    def rows(self):
        """(iteration, index, residual_norm, scan_max, achieved) per iteration."""
        yield (0, None, self.residual_norms[0], None, None)
        for i, idx in enumerate(self.selected):
            yield (i + 1, idx, self.residual_norms[i + 1], self.scan_max[i], self.achieved[i])

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "index", "residual_norm", "scan_max", "achieved"])
            for it, idx, rn, sm, ach in self.rows():
                writer.writerow(
                    [
                        it,
                        "" if idx is None else idx,
                        repr(float(rn)),
                        "" if sm is None else repr(float(sm)),
                        "" if ach is None else repr(float(ach)),
                    ]
                )


@dataclass(frozen=True)
class ProjectionResult:
    coefficients: np.ndarray
    residual: np.ndarray
    kkt: float
    iterations: int


def _as_columns(space: GridSpace, columns) -> np.ndarray:
    cols = np.asarray(columns, dtype=float)
    if cols.ndim == 1:
        cols = cols[:, None]
    if cols.ndim != 2 or cols.shape[0] != space.dim:
        raise StructuralError(f"span columns of shape {cols.shape} not bound to dim {space.dim}")
    return cols


def _kkt_certificate(space: GridSpace, residual: np.ndarray, cols: np.ndarray, f_norm: float) -> float:
    rnorm = norm(space, residual)
    if rnorm <= 1e-14 * f_norm or cols.shape[1] == 0:
        return 0.0
    return float(np.max(np.abs(cols.T @ norming_vector(space, residual))))


def chebyshev_project(space: GridSpace, f, columns, cfg: ChebyshevConfig = None) -> ProjectionResult:
    """Best approximation of f from the span of the given columns in L_p.

    p = 2 is solved in closed form (weighted least squares); otherwise the
    smooth convex objective sum w|f - Uc|^p is minimized by damped Newton with
    an IRLS-style Hessian, the weight |r|^(p-2) clamped at |r| >= 1e-12 for
    1 < p < 2.  Optimality is certified by |F_residual(u_j)| <= kkt_tol.

    Raises:
        SolverError: iteration budget exhausted before certification; carries
            the last iterate and gradient norm.
    """
    cfg = cfg or ChebyshevConfig()
    f = np.asarray(f, dtype=float)
    if f.shape != (space.dim,):
        raise StructuralError(f"vector of shape {f.shape} not bound to space of dim {space.dim}")
    U = _as_columns(space, columns)
    k = U.shape[1]
    if k == 0:
        return ProjectionResult(np.zeros(0), f.copy(), 0.0, 0)
    w = space.weights
    p = space.p
    sw = np.sqrt(w)
    c, *_ = np.linalg.lstsq(U * sw[:, None], f * sw, rcond=None)
    r = f - U @ c
    f_norm = norm(space, f)
    if p == 2.0:
        return ProjectionResult(c, r, _kkt_certificate(space, r, U, f_norm), 0)

    phi = float(np.sum(w * np.abs(r) ** p))
    kkt = math.inf
    for it in range(1, cfg.max_iter + 1):
        rnorm = phi ** (1.0 / p)
        if rnorm <= 1e-14 * f_norm:
            # f is in the span to working precision; the zero residual is optimal
            return ProjectionResult(c, r, 0.0, it - 1)
        dual = w * np.abs(r) ** (p - 1.0) * np.sign(r)
        fvals = U.T @ dual
        kkt = float(np.max(np.abs(fvals)) * rnorm ** (1.0 - p))
        if kkt <= cfg.kkt_tol:
            return ProjectionResult(c, r, kkt, it - 1)
        grad = -p * fvals
        hw = w * np.clip(np.abs(r), 1e-12, None) ** (p - 2.0)
        H = (p * (p - 1.0)) * (U.T * hw) @ U
        try:
            d = np.linalg.solve(H, -grad)
        except np.linalg.LinAlgError:
            d = np.linalg.lstsq(H, -grad, rcond=None)[0]
        slope = float(grad @ d)
        if not np.isfinite(slope) or slope >= 0.0:
            d = -grad
            slope = float(grad @ d)
            if slope >= 0.0:
                # zero gradient: already stationary to machine precision
                return ProjectionResult(c, r, kkt, it)
        alpha = 1.0
        accepted = False
        for _ in range(60):
            c_new = c + alpha * d
            r_new = f - U @ c_new
            phi_new = float(np.sum(w * np.abs(r_new) ** p))
            if phi_new <= phi + 1e-4 * alpha * slope:
                c, r, phi = c_new, r_new, phi_new
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
    raise SolverError(
        f"projection not certified after {cfg.max_iter} iterations (kkt {kkt:.3e})",
        coefficients=c,
        grad_norm=kkt,
    )


def _select(fabs: np.ndarray, policy: WeaknessPolicy):
    """Index satisfying the weak condition, with deterministic tie-breaking."""
    scan_max = float(fabs.max())
    if policy.mode == "strict_max":
        j = int(np.argmax(fabs))
    else:
        j = int(np.nonzero(fabs >= policy.t * scan_max)[0][0])
    return j, scan_max, float(fabs[j])


def womp(
    f0,
    dictionary: Dictionary,
    policy: WeaknessPolicy = None,
    max_m: int = None,
    cfg: ChebyshevConfig = None,
) -> GreedyTrace:
    """Weak orthogonal matching pursuit (p = 2 only; t = 1 is plain OMP).

    The orthogonal projection is maintained by an incremental QR update on
    the weighted columns.  A selected column that is numerically dependent on
    the current span (new R diagonal < 1e-12) is excluded from the span with
    a warning and carries coefficient 0.
    """
    space = dictionary.space
    if space.p != 2.0:
        raise DomainError(f"womp requires p = 2, got p = {space.p}")
    policy = policy or WeaknessPolicy()
    cfg = cfg or ChebyshevConfig()
    if max_m is None:
        max_m = dictionary.count
    if max_m > dictionary.count:
        raise StructuralError(f"max_m = {max_m} exceeds dictionary size {dictionary.count}")
    f0 = np.asarray(f0, dtype=float)
    if f0.shape != (space.dim,):
        raise StructuralError("f0 not bound to the dictionary's space")

    sw = np.sqrt(space.weights)
    B = dictionary.elements * sw[:, None]
    y0 = f0 * sw
    n = space.dim
    f0_norm = float(np.linalg.norm(y0))
    trace = GreedyTrace(algorithm="womp", p=2.0, t=policy.t, mode=policy.mode)
    res = y0.copy()
    trace.residual_norms.append(float(np.linalg.norm(res)))

    Q = np.empty((n, 0))
    R = np.zeros((max_m, max_m))
    kept = []  # positions in trace.selected that entered the span
    trace.termination = "max_iters"
    for _ in range(max_m):
        rnorm = float(np.linalg.norm(res))
        if rnorm <= cfg.residual_tol * f0_norm:
            trace.termination = "residual_tol"
            break
        fabs = np.abs(B.T @ res) / rnorm
        j, scan_max, achieved = _select(fabs, policy)
        if scan_max <= cfg.zero_tol * f0_norm:
            trace.termination = "zero_functionals"
            break
        trace.selected.append(j)
        trace.scan_max.append(scan_max)
        trace.achieved.append(achieved)
        v = B[:, j].copy()
        k = Q.shape[1]
        rcol = np.zeros(k)
        if k:
            c1 = Q.T @ v
            v -= Q @ c1
            c2 = Q.T @ v  # one reorthogonalization pass
            v -= Q @ c2
            rcol = c1 + c2
        rho = float(np.linalg.norm(v))
        if rho < _RANK_TOL:
            warnings.warn(
                f"selected column {j} is numerically dependent on the span; excluded",
                stacklevel=2,
            )
        else:
            R[:k, k] = rcol
            R[k, k] = rho
            q = v / rho
            Q = np.column_stack([Q, q])
            res = res - q * (q @ res)
            kept.append(len(trace.selected) - 1)
        k = Q.shape[1]
        coeffs = np.zeros(len(trace.selected))
        if k:
            c_kept = scipy.linalg.solve_triangular(R[:k, :k], Q.T @ y0, lower=False)
            coeffs[kept] = c_kept
        trace.coefficients.append(coeffs)
        rnorm = float(np.linalg.norm(res))
        if rnorm > 1e-14 * f0_norm and k:
            span_cols = B[:, [trace.selected[s] for s in kept]]
            trace.kkt.append(float(np.max(np.abs(span_cols.T @ res)) / rnorm))
        else:
            trace.kkt.append(0.0)
        trace.residual_norms.append(rnorm)
    return trace


def wcga(
    f0,
    dictionary: Dictionary,
    policy: WeaknessPolicy = None,
    max_m: int = None,
    cfg: ChebyshevConfig = None,
) -> GreedyTrace:
    """Weak Chebyshev greedy algorithm for general 1 < p < inf.

    Per iteration: scan |F_residual(g_i)| over the dictionary, select per the
    policy, then recompute the best approximation of f0 from the span of all
    selected elements.  Selected elements numerically dependent on the span
    (weighted QR rank check at 1e-12) stay in the trace but are excluded from
    the projection span with coefficient 0.
    """
    space = dictionary.space
    policy = policy or WeaknessPolicy()
    cfg = cfg or ChebyshevConfig()
    if max_m is None:
        max_m = dictionary.count
    if max_m > dictionary.count:
        raise StructuralError(f"max_m = {max_m} exceeds dictionary size {dictionary.count}")
    f0 = np.asarray(f0, dtype=float)
    if f0.shape != (space.dim,):
        raise StructuralError("f0 not bound to the dictionary's space")

    A = dictionary.elements
    sw = np.sqrt(space.weights)
    B = A * sw[:, None]
    n = space.dim
    f0_norm = norm(space, f0)
    trace = GreedyTrace(algorithm="wcga", p=space.p, t=policy.t, mode=policy.mode)
    res = f0.copy()
    trace.residual_norms.append(f0_norm)

    Q = np.empty((n, 0))  # weighted-L2 orthonormal basis of the span, for rank checks
    span = []  # positions in trace.selected that entered the span
    trace.termination = "max_iters"
    for _ in range(max_m):
        rnorm = norm(space, res)
        if rnorm <= cfg.residual_tol * f0_norm:
            trace.termination = "residual_tol"
            break
        fabs = np.abs(A.T @ norming_vector(space, res))
        j, scan_max, achieved = _select(fabs, policy)
        if scan_max <= cfg.zero_tol * f0_norm:
            trace.termination = "zero_functionals"
            break
        trace.selected.append(j)
        trace.scan_max.append(scan_max)
        trace.achieved.append(achieved)
        v = B[:, j].copy()
        if Q.shape[1]:
            v -= Q @ (Q.T @ v)
            v -= Q @ (Q.T @ v)
        rho = float(np.linalg.norm(v))
        if rho < _RANK_TOL:
            warnings.warn(
                f"selected element {j} is numerically dependent on the span; excluded",
                stacklevel=2,
            )
        else:
            Q = np.column_stack([Q, v / rho])
            span.append(len(trace.selected) - 1)
        idx = [trace.selected[s] for s in span]
        proj = chebyshev_project(space, f0, A[:, idx], cfg)
        res = proj.residual
        coeffs = np.zeros(len(trace.selected))
        coeffs[span] = proj.coefficients
        trace.coefficients.append(coeffs)
        trace.kkt.append(proj.kkt)
        trace.residual_norms.append(norm(space, res))
    return trace


def tga(f0, basis: Dictionary, m: int) -> GreedyTrace:
    """Thresholding greedy approximation with respect to a basis.

    Expansion coefficients are obtained through the biorthogonal (dual)
    system under the weighted pairing, i.e. by solving the square system;
    the m largest-magnitude terms are kept, ties broken by lowest index.
    """
    space = basis.space
    A = basis.elements
    n, N = A.shape
    if N != n:
        raise StructuralError(f"basis must be square, got {n} x {N}")
    if not 0 <= m <= N:
        raise StructuralError(f"m must lie in [0, {N}], got {m}")
    f0 = np.asarray(f0, dtype=float)
    if f0.shape != (n,):
        raise StructuralError("f0 not bound to the basis's space")
    sw = np.sqrt(space.weights)
    coeff, _, rank, _ = np.linalg.lstsq(A * sw[:, None], f0 * sw, rcond=None)
    if rank < n:
        raise DomainError(f"basis is rank-deficient (rank {rank} < {n})")
    order = np.argsort(-np.abs(coeff), kind="stable")

    trace = GreedyTrace(algorithm="tga", p=space.p, t=1.0, mode="strict_max")
    trace.residual_norms.append(norm(space, f0))
    approx = np.zeros(n)
    for i in range(m):
        j = int(order[i])
        mag = float(abs(coeff[j]))
        trace.selected.append(j)
        trace.scan_max.append(mag)  # remaining max is the next sorted magnitude
        trace.achieved.append(mag)
        approx = approx + coeff[j] * A[:, j]
        trace.coefficients.append(np.array([coeff[int(order[k])] for k in range(i + 1)]))
        trace.kkt.append(math.nan)  # thresholding does not certify a projection
        trace.residual_norms.append(norm(space, f0 - approx))
    trace.termination = "max_iters"
    return trace


def sparse_decay_bound(
    norm_fk: float,
    k: int,
    m: int,
    K: int,
    r: float,
    sc: SmoothnessConstants,
    V: float,
    t: float,
    eps: float,
) -> float:
    """Exponential residual-decay bound for WCGA on near-sparse targets.

    ||f_m|| <= ||f_k|| * exp(-c1 (m-k) / K^(r q')) + 2 eps, with
    c1 = t^q' / (2 (16 gamma)^(1/(q-1)) V^q').
    """
    if m < k:
        raise DomainError(f"m = {m} must be >= k = {k}")
    if V < 1.0:
        raise DomainError(f"V must be >= 1, got {V}")
    if not (0.0 < t <= 1.0):
        raise DomainError(f"t must lie in (0, 1], got {t}")
    if K < 1:
        raise DomainError(f"K must be >= 1, got {K}")
    qd = sc.q_dual
    c1 = t**qd / (2.0 * (16.0 * sc.gamma) ** (1.0 / (sc.q - 1.0)) * V**qd)
    return float(norm_fk) * math.exp(-c1 * (m - k) / float(K) ** (r * qd)) + 2.0 * eps


def ell1_tail_bound(
    m: int,
    a_eps: float,
    eps: float,
    sc: SmoothnessConstants,
    t: float,
    C: float = 1.0,
) -> float:
    """Rate bound for WCGA on targets with bounded ell1 dictionary norm.

    max(2 eps, C (a_eps + eps) t (1+m)^(1/q - 1)).  The constant C is not
    pinned down by the theory; it is exposed explicitly (default 1.0, the
    shape-only normalization) and must be chosen by the caller for any
    quantitative use.
    """
    if a_eps < 0:
        raise DomainError(f"a_eps must be >= 0, got {a_eps}")
    return max(2.0 * eps, C * (a_eps + eps) * t * (1.0 + m) ** (1.0 / sc.q - 1.0))
