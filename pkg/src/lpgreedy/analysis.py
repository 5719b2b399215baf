"""Dictionary condition constants.

Quantities measured here, all for a Dictionary over a GridSpace:

* coherence          -- largest normalized inner product between two distinct
                        elements (always the p = 2 pairing).
* rip_delta          -- restricted-isometry distortion of supports of size s.
* unconditionality_U -- smallest U with ||sum_A c g|| <= U ||sum_B c g|| over
                        A inside B, |A| <= K, |B| <= D.
* nikolskii_C1       -- smallest C1 with sum_A |c| <= C1 |A|^r ||sum_A c g||.
* ell1_incoherence_V -- smallest V with sum_A |c| <= V |A|^r ||sum_B c g||,
                        A inside B; the joint strengthening of the two above.
* check_domination   -- smallest B with ||sum_L c g1|| <= B ||sum_L c g2||
                        over supports |L| <= D, plus the constant-transfer
                        helper for dominated/equivalent dictionary pairs.

Exactness policy: at p = 2 every extremal problem here reduces to generalized
eigenvalues or, per sign pattern, to a closed-form least-norm solve, so small
instances are exact.  For general p the ell1-type constants (nikolskii_C1,
ell1_incoherence_V) stay exact through certified convex solves (the extremal
ratio per sign pattern is one norm minimization under a linear constraint),
while the sup-of-ratio constants (unconditionality_U, check_domination) have
no convex reformulation and fall back to multi-start projected ascent,
reported as a lower bound and tagged "sampled".

Support enumeration is exact up to `cap` supports, after that uniformly
sampled with a fixed seed.  Any support whose submatrix is numerically rank
deficient makes the constant infinite; math.inf is returned.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dictionary import Dictionary
from .errors import DomainError, SolverError, StructuralError
from .greedy import ChebyshevConfig, chebyshev_project
from .space import norm, norming_vector

# an eigenvalue this far below the largest marks the submatrix rank deficient
_DEP_TOL = 1e-12

_DEFAULT_CAP = 200_000
_SIGN_CAP = 10


def weighted_gram(dictionary: Dictionary) -> np.ndarray:
    """Gram matrix of the elements under the weighted p = 2 pairing."""
    E = dictionary.elements
    return E.T @ (dictionary.space.weights[:, None] * E)


def coherence(dictionary: Dictionary) -> float:
    """Largest |<g_i, g_j>| / (|g_i| |g_j|) over distinct pairs, p = 2 pairing.

    The pairing is normalized so the value lies in [0, 1] even when the
    ambient space is L_p with p != 2 (elements are unit in L_p, not L_2).
    """
    if dictionary.count < 2:
        raise DomainError("coherence needs at least 2 elements")
    G = weighted_gram(dictionary)
    d = np.sqrt(np.diag(G))
    C = np.abs(G) / np.outer(d, d)
    np.fill_diagonal(C, 0.0)
    return float(C.max())


def _iter_supports(count: int, size: int, cap: int, seed: int):
    """All supports of the given size, or `cap` random ones.

    Returns (iterable of index tuples, exact flag).
    """
    total = math.comb(count, size)
    if total <= cap:
        return itertools.combinations(range(count), size), True
    rng = np.random.default_rng(seed)

    def sample():
        for _ in range(cap):
            yield tuple(sorted(rng.choice(count, size=size, replace=False).tolist()))

    return sample(), False


def _is_dependent(Gs: np.ndarray) -> bool:
    lam = np.linalg.eigvalsh(Gs)
    return lam[0] <= _DEP_TOL * max(lam[-1], 1.0)


def rip_delta(dictionary: Dictionary, s: int, cap: int = _DEFAULT_CAP, seed: int = 0):
    """Restricted-isometry distortion: the smallest delta with
    (1-delta)||a||^2 <= ||sum a_i g_i||^2 <= (1+delta)||a||^2 on supports of size s.

    Exact (max over all supports of the worst Gram eigenvalue deviation) when
    the enumeration fits under `cap`, otherwise a sampled lower bound.
    """
    if dictionary.space.p != 2.0:
        raise DomainError("restricted isometry distortion is defined for p = 2")
    if s == 0:
        raise DomainError("support size must be positive")
    if s > dictionary.count:
        raise StructuralError(f"s = {s} exceeds element count {dictionary.count}")
    from . import kernels

    G = weighted_gram(dictionary)
    supports_iter, exact = _iter_supports(dictionary.count, s, cap, seed)
    supports = np.array(list(supports_iter), dtype=np.int64)
    lo, hi = kernels.gram_extremes_scan(np.ascontiguousarray(G), supports)
    delta = float(max(np.max(1.0 - lo), np.max(hi - 1.0), 0.0))
    return delta, ("exact" if exact else "sampled")


def riesz_U_from_delta(delta: float) -> float:
    """((1+delta)/(1-delta))^(1/2): the unconditionality constant implied by
    restricted-isometry distortion delta."""
    if not (0.0 <= delta < 1.0):
        raise DomainError(f"delta must lie in [0, 1), got {delta}")
    return math.sqrt((1.0 + delta) / (1.0 - delta))


def _pad_quadratic(G_B: np.ndarray, positions) -> np.ndarray:
    S = np.zeros_like(G_B)
    ix = np.ix_(positions, positions)
    S[ix] = G_B[ix]
    return S


def _ratio_ascent(M1, w1, p1, M2, w2, p2, starts, iters, seed):
    """Lower bound for sup_c ||M1 c||_{p1,w1} / ||M2 c||_{p2,w2} by projected ascent."""
    from .space import GridSpace

    dim = M1.shape[1]
    s1 = GridSpace(dim=M1.shape[0], p=p1, weights=w1)
    s2 = GridSpace(dim=M2.shape[0], p=p2, weights=w2)
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(starts):
        c = rng.standard_normal(dim)
        c /= np.linalg.norm(c)
        num = norm(s1, M1 @ c)
        den = norm(s2, M2 @ c)
        if den <= 1e-300:
            return math.inf
        val = num / den
        step = 0.5
        for _ in range(iters):
            g1 = M1.T @ norming_vector(s1, M1 @ c) if num > 0 else np.zeros(dim)
            g2 = M2.T @ norming_vector(s2, M2 @ c)
            grad = g1 / max(num, 1e-300) - g2 / max(den, 1e-300)
            gn = np.linalg.norm(grad)
            if gn < 1e-14:
                break
            improved = False
            while step > 1e-14:
                c_new = c + step * grad
                c_new /= np.linalg.norm(c_new)
                num_n = norm(s1, M1 @ c_new)
                den_n = norm(s2, M2 @ c_new)
                if den_n <= 1e-300:
                    return math.inf
                if num_n / den_n > val * (1.0 + 1e-15):
                    c, num, den, val = c_new, num_n, den_n, num_n / den_n
                    improved = True
                    step *= 1.5
                    break
                step *= 0.5
            if not improved:
                break
        best = max(best, val)
    return best


def unconditionality_U(
    dictionary: Dictionary,
    K: int,
    D: int,
    cap: int = _DEFAULT_CAP,
    seed: int = 0,
    starts: int = 20,
    iters: int = 500,
):
    """Smallest U with ||sum_A c_i g_i|| <= U ||sum_B c_i g_i|| for all
    A inside B, |A| <= K, |B| <= D, over all coefficients.

    p = 2: exact, the largest generalized eigenvalue of the A-restricted
    quadratic form against the full support Gram, maximized over supports
    (enumerated when they fit under `cap`).  General p: projected-ascent
    lower bound, tagged "sampled".  A rank-deficient support makes the
    constant infinite.
    """
    _check_KD(dictionary, K, D)
    space = dictionary.space
    sup_iter, exact_supports = _iter_supports(dictionary.count, D, cap, seed)
    exact = exact_supports and space.p == 2.0
    G = weighted_gram(dictionary) if space.p == 2.0 else None
    best = 1.0
    for B in sup_iter:
        Bl = list(B)
        if space.p == 2.0:
            G_B = G[np.ix_(Bl, Bl)]
            if _is_dependent(G_B):
                return math.inf, ("exact" if exact else "sampled")
            for a_size in range(1, K + 1):
                for A_pos in itertools.combinations(range(D), a_size):
                    S = _pad_quadratic(G_B, list(A_pos))
                    lam = scipy.linalg.eigh(S, G_B, eigvals_only=True)
                    best = max(best, math.sqrt(max(float(lam[-1]), 0.0)))
        else:
            sw = np.sqrt(space.weights)
            U_B = dictionary.elements[:, Bl]
            if _is_dependent((U_B * sw[:, None]).T @ (U_B * sw[:, None])):
                return math.inf, "sampled"
            for a_size in range(1, K + 1):
                for A_pos in itertools.combinations(range(D), a_size):
                    M1 = np.zeros_like(U_B)
                    M1[:, list(A_pos)] = U_B[:, list(A_pos)]
                    val = _ratio_ascent(
                        M1, space.weights, space.p, U_B, space.weights, space.p,
                        starts, iters, seed,
                    )
                    if math.isinf(val):
                        return math.inf, "sampled"
                    best = max(best, val)
    return best, ("exact" if exact else "sampled")


def _check_KD(dictionary, K, D):
    if not 1 <= K <= D:
        raise StructuralError(f"need 1 <= K <= D, got K={K}, D={D}")
    if D > dictionary.count:
        raise StructuralError(f"D = {D} exceeds element count {dictionary.count}")


def _sign_patterns(k: int, cap_patterns: int, rng):
    """Sign vectors on k coordinates, first coordinate pinned to +1 (symmetry)."""
    total = 2 ** (k - 1)
    if total <= cap_patterns:
        for bits in range(total):
            eps = np.ones(k)
            for j in range(k - 1):
                if (bits >> j) & 1:
                    eps[j + 1] = -1.0
            yield eps, True
    else:
        for _ in range(cap_patterns):
            eps = np.where(rng.random(k) < 0.5, -1.0, 1.0)
            eps[0] = 1.0
            yield eps, False


def _least_p_norm(space, cols: np.ndarray, a: np.ndarray, cfg: ChebyshevConfig) -> float:
    """min ||cols @ c||_p over c with a . c = 1, by certified convex solve.

    The constraint is eliminated: c = c0 + Z y with a.c0 = 1 and Z spanning
    the null space of a, leaving an unconstrained best-approximation problem.
    """
    c0 = a / float(a @ a)
    f = cols @ c0
    Z = scipy.linalg.null_space(a[None, :])
    if Z.shape[1] == 0:
        return norm(space, f)
    try:
        res = chebyshev_project(space, f, -(cols @ Z), cfg)
    except SolverError:
        res = chebyshev_project(
            space, f, -(cols @ Z), ChebyshevConfig(kkt_tol=1e-8, max_iter=2000)
        )
    return norm(space, res.residual)


def nikolskii_C1(
    dictionary: Dictionary,
    K: int,
    r: float,
    cap: int = _DEFAULT_CAP,
    seed: int = 0,
    sign_cap: int = _SIGN_CAP,
):
    """Smallest C1 with sum_A |c_i| <= C1 |A|^r ||sum_A c_i g_i||, |A| <= K.

    Per support and sign pattern the extremal ratio is 1 over the minimum
    norm of a combination whose signed coefficient sum is 1: a convex solve,
    closed form at p = 2, certified Newton otherwise.  Exact whenever the
    support and sign enumerations are complete.
    """
    if not 0.0 < r <= 1.0:
        raise DomainError(f"r must lie in (0, 1], got {r}")
    if not 1 <= K <= dictionary.count:
        raise StructuralError(f"need 1 <= K <= count, got K={K}")
    space = dictionary.space
    rng = np.random.default_rng(seed)
    cfg = ChebyshevConfig()
    sw = np.sqrt(space.weights)
    best = 0.0
    exact = True
    cap_patterns = 2 ** (sign_cap - 1)
    for a_size in range(1, K + 1):
        sup_iter, exact_supports = _iter_supports(dictionary.count, a_size, cap, seed)
        exact = exact and exact_supports
        for A in sup_iter:
            cols = dictionary.elements[:, list(A)]
            B_w = cols * sw[:, None]
            if _is_dependent(B_w.T @ B_w):
                return math.inf, ("exact" if exact else "sampled")
            if space.p == 2.0:
                L = np.linalg.cholesky(B_w.T @ B_w)
                for eps, full in _sign_patterns(a_size, cap_patterns, rng):
                    exact = exact and full
                    z = scipy.linalg.solve_triangular(L, eps, lower=True)
                    best = max(best, a_size ** (-r) * float(np.linalg.norm(z)))
            else:
                for eps, full in _sign_patterns(a_size, cap_patterns, rng):
                    exact = exact and full
                    val = _least_p_norm(space, cols, eps, cfg)
                    best = max(best, a_size ** (-r) / max(val, 1e-300))
    return best, ("exact" if exact else "sampled")


def ell1_incoherence_V(
    dictionary: Dictionary,
    K: int,
    D: int,
    r: float,
    cap: int = _DEFAULT_CAP,
    seed: int = 0,
    sign_cap: int = _SIGN_CAP,
):
    """Smallest V with sum_A |c_i| <= V |A|^r ||sum_B c_i g_i|| for all
    A inside B, |A| <= K, |B| <= D.

    The ratio is monotone under support growth, so only supports of size
    exactly D are enumerated.  Per (B, A, sign pattern) the extremal value
    is a least-norm solve constrained on the signed A-mass: closed form at
    p = 2 (a Gram quadratic form), certified Newton otherwise.
    """
    _check_KD(dictionary, K, D)
    if not 0.0 < r <= 1.0:
        raise DomainError(f"r must lie in (0, 1], got {r}")
    space = dictionary.space
    rng = np.random.default_rng(seed)
    cfg = ChebyshevConfig()
    sw = np.sqrt(space.weights)
    best = 0.0
    exact = True
    sup_iter, exact_supports = _iter_supports(dictionary.count, D, cap, seed)
    exact = exact and exact_supports
    for B in sup_iter:
        Bl = list(B)
        cols = dictionary.elements[:, Bl]
        B_w = cols * sw[:, None]
        G_B = B_w.T @ B_w
        if _is_dependent(G_B):
            return math.inf, ("exact" if exact else "sampled")
        L = np.linalg.cholesky(G_B) if space.p == 2.0 else None
        cap_patterns = 2 ** (sign_cap - 1)
        for a_size in range(1, K + 1):
            for A_pos in itertools.combinations(range(D), a_size):
                for eps, full in _sign_patterns(a_size, cap_patterns, rng):
                    exact = exact and full
                    a = np.zeros(D)
                    a[list(A_pos)] = eps
                    if space.p == 2.0:
                        z = scipy.linalg.solve_triangular(L, a, lower=True)
                        best = max(best, a_size ** (-r) * float(np.linalg.norm(z)))
                    else:
                        val = _least_p_norm(space, cols, a, cfg)
                        best = max(best, a_size ** (-r) / max(val, 1e-300))
    return best, ("exact" if exact else "sampled")


def ell1_incoherence_V_signal(
    dictionary: Dictionary,
    support,
    coefficients,
    extra,
    r: float,
):
    """The signal form of the ell1 incoherence constant.

    For a fixed combination f = sum_{i in support} x_i g_i and an index
    universe E = support + extra, returns the smallest V with

        sum_{i in A} |x_i| <= V |A|^r  min_c ||f_A - sum_{j in L} c_j g_j||

    over all nonempty A inside the support, where L = E minus A (the worst
    admissible competitor set; the minimum only shrinks as L grows, so the
    full complement is the binding case).  Exact: one certified projection
    per subset A.  Returns inf when the E-subsystem is rank deficient.
    """
    if not 0.0 < r <= 1.0:
        raise DomainError(f"r must lie in (0, 1], got {r}")
    support = [int(i) for i in support]
    if len(set(support)) != len(support):
        raise StructuralError("support indices must be distinct")
    x = np.asarray(coefficients, dtype=float)
    if x.shape != (len(support),):
        raise StructuralError("coefficients must align with the support")
    E = sorted(set(support) | {int(i) for i in extra})
    space = dictionary.space
    sw = np.sqrt(space.weights)
    cols_E = dictionary.elements[:, E]
    B_w = cols_E * sw[:, None]
    if _is_dependent(B_w.T @ B_w):
        return math.inf, "exact"
    cfg = ChebyshevConfig()
    best = 0.0
    for a_size in range(1, len(support) + 1):
        for A in itertools.combinations(range(len(support)), a_size):
            idx_A = [support[i] for i in A]
            mass = float(np.sum(np.abs(x[list(A)])))
            if mass == 0.0:
                continue
            f_A = dictionary.elements[:, idx_A] @ x[list(A)]
            lam = [j for j in E if j not in idx_A]
            if lam:
                try:
                    res = chebyshev_project(space, f_A, dictionary.elements[:, lam], cfg)
                except SolverError:
                    res = chebyshev_project(
                        space, f_A, dictionary.elements[:, lam],
                        ChebyshevConfig(kkt_tol=1e-8, max_iter=2000),
                    )
                dist = norm(space, res.residual)
            else:
                dist = norm(space, f_A)
            best = max(best, mass / (a_size**r * max(dist, 1e-300)))
    return best, "exact"


def check_domination(
    d1: Dictionary,
    d2: Dictionary,
    D: int,
    cap: int = _DEFAULT_CAP,
    seed: int = 0,
    starts: int = 20,
    iters: int = 500,
):
    """Smallest B with ||sum_L c_i g1_i|| <= B ||sum_L c_i g2_i||, |L| <= D.

    The two dictionaries must be index-aligned with equal counts; each norm
    is taken in its own space.  Exact when both spaces are p = 2 (largest
    generalized eigenvalue of the two support Grams); otherwise a
    projected-ascent lower bound tagged "sampled".  The ratio grows with the
    support, so only supports of size exactly D are enumerated.
    """
    if d1.count != d2.count:
        raise StructuralError(f"element counts differ: {d1.count} vs {d2.count}")
    if not 1 <= D <= d1.count:
        raise StructuralError(f"need 1 <= D <= count, got D={D}")
    both_p2 = d1.space.p == 2.0 and d2.space.p == 2.0
    sup_iter, exact_supports = _iter_supports(d1.count, D, cap, seed)
    exact = exact_supports and both_p2
    G1 = weighted_gram(d1) if both_p2 else None
    G2 = weighted_gram(d2) if both_p2 else None
    best = 0.0
    for L in sup_iter:
        Ll = list(L)
        if both_p2:
            G2_L = G2[np.ix_(Ll, Ll)]
            if _is_dependent(G2_L):
                return math.inf, ("exact" if exact else "sampled")
            lam = scipy.linalg.eigh(G1[np.ix_(Ll, Ll)], G2_L, eigvals_only=True)
            best = max(best, math.sqrt(max(float(lam[-1]), 0.0)))
        else:
            M2 = d2.elements[:, Ll]
            sw2 = np.sqrt(d2.space.weights)
            if _is_dependent((M2 * sw2[:, None]).T @ (M2 * sw2[:, None])):
                return math.inf, "sampled"
            val = _ratio_ascent(
                d1.elements[:, Ll], d1.space.weights, d1.space.p,
                M2, d2.space.weights, d2.space.p,
                starts, iters, seed,
            )
            if math.isinf(val):
                return math.inf, "sampled"
            best = max(best, val)
    return best, ("exact" if exact else "sampled")


def transferred_constants(
    B: float = None,
    C1: float = None,
    V: float = None,
    U: float = None,
    E1: float = None,
    E2: float = None,
) -> dict:
    """Constants inherited through domination/equivalence.

    If the second dictionary dominates the first with constant B, ell1-type
    constants transfer multiplicatively: C1' = C1 * B and V' = V * B.  If the
    two are equivalent with constants E1, E2 (E1 d1 <= d2 <= E2 d1), the
    unconditionality constant transfers as U' = U * E2 / E1.  Only the
    constants whose inputs were supplied appear in the result.
    """
    out = {}
    if B is not None:
        if B <= 0:
            raise DomainError(f"domination constant must be positive, got {B}")
        if C1 is not None:
            out["C1"] = C1 * B
        if V is not None:
            out["V"] = V * B
    if E1 is not None and E2 is not None and U is not None:
        if E1 <= 0 or E2 <= 0:
            raise DomainError("equivalence constants must be positive")
        out["U"] = U * E2 / E1
    return out


@dataclass
class PropertyReport:
    """Measured dictionary constants with method tags.

    Map keys are tuples: rip by s, unconditionality by (K, D), nikolskii by
    (K, r), ell1_incoherence by (K, D, r).  Values are (value, method).
    `seed` is the seed used for any sampled entry.
    """

    coherence: float = None
    rip: dict = field(default_factory=dict)
    unconditionality: dict = field(default_factory=dict)
    nikolskii: dict = field(default_factory=dict)
    ell1_incoherence: dict = field(default_factory=dict)
    seed: int = 0

    def check(self) -> list:
        """Invariant violations, empty when clean."""
        out = []
        exact_deltas = sorted(
            (s, v) for s, (v, m) in self.rip.items() if m == "exact"
        )
        for (s1, v1), (s2, v2) in zip(exact_deltas, exact_deltas[1:]):
            if v2 < v1 - 1e-12:
                out.append(f"delta decreased from s={s1} to s={s2}: {v1!r} -> {v2!r}")
        for key, (u, _) in self.unconditionality.items():
            if u < 1.0 - 1e-9:
                out.append(f"U{key} = {u!r} below 1")
        for key, (c1, _) in self.nikolskii.items():
            if c1 < 1.0 - 1e-9:
                out.append(f"C1{key} = {c1!r} below 1")
        for key, (v, _) in self.ell1_incoherence.items():
            if v < 1.0 - 1e-9:
                out.append(f"V{key} = {v!r} below 1")
        return out

    def to_json_dict(self) -> dict:
        def fmt(value):
            return "inf" if math.isinf(value) else value

        return {
            "coherence": self.coherence,
            "rip": {str(s): {"delta": fmt(v), "method": m} for s, (v, m) in self.rip.items()},
            "unconditionality": {
                f"{k},{d}": {"U": fmt(v), "method": m}
                for (k, d), (v, m) in self.unconditionality.items()
            },
            "nikolskii": {
                f"{k},{r}": {"C1": fmt(v), "method": m}
                for (k, r), (v, m) in self.nikolskii.items()
            },
            "ell1_incoherence": {
                f"{k},{d},{r}": {"V": fmt(v), "method": m}
                for (k, d, r), (v, m) in self.ell1_incoherence.items()
            },
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")


def analyze_dictionary(
    dictionary: Dictionary,
    K: int,
    D: int,
    r: float = 0.5,
    rip_sizes=None,
    cap: int = _DEFAULT_CAP,
    seed: int = 0,
) -> PropertyReport:
    """One-call property survey: coherence, distortions, U, C1 and V."""
    report = PropertyReport(seed=seed)
    if dictionary.count >= 2:
        report.coherence = coherence(dictionary)
    if dictionary.space.p == 2.0:
        for s in rip_sizes or range(1, min(D, dictionary.count) + 1):
            report.rip[s] = rip_delta(dictionary, s, cap=cap, seed=seed)
    report.unconditionality[(K, D)] = unconditionality_U(dictionary, K, D, cap=cap, seed=seed)
    report.nikolskii[(K, r)] = nikolskii_C1(dictionary, K, r, cap=cap, seed=seed)
    report.ell1_incoherence[(K, D, r)] = ell1_incoherence_V(dictionary, K, D, r, cap=cap, seed=seed)
    return report
