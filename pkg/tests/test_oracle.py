"""Tests for the exhaustive best m-term oracle."""
import itertools
import math

import numpy as np
import pytest
from scipy.optimize import minimize

from lpgreedy import (
    ConfigurationError,
    DomainError,
    GridSpace,
    StructuralError,
    WeaknessPolicy,
    norm,
    wcga,
    womp,
)
from lpgreedy.dictionary import build_custom, build_gaussian, build_haar, build_trigonometric
from lpgreedy.oracle import OracleConfig, lebesgue_ratio, sigma_m_exact


def perturbed(space, f, scale, seed):
    rng = np.random.default_rng(seed)
    return f + scale * rng.standard_normal(space.dim)


class TestSigmaL2:
    def test_zero_terms(self):
        space = GridSpace.uniform(8, 2.0)
        d = build_gaussian(space, 10, seed=0)
        f0 = np.arange(8.0)
        value, support = sigma_m_exact(f0, d, 0)
        assert value == pytest.approx(norm(space, f0))
        assert support == ()

    def test_orthonormal_parseval(self):
        space = GridSpace.uniform(8, 2.0)
        d = build_haar(space, d=1, levels=3)
        rng = np.random.default_rng(1)
        c = rng.standard_normal(8)
        f0 = d.elements @ c
        for m in range(9):
            value, support = sigma_m_exact(f0, d, m)
            order = np.argsort(-np.abs(c), kind="stable")
            tail = order[m:]
            assert value == pytest.approx(math.sqrt(np.sum(c[tail] ** 2)), abs=1e-12)
            assert support == tuple(sorted(int(i) for i in order[:m]))

    def test_planted_sparse_recovered(self):
        space = GridSpace.uniform(12, 2.0)
        d = build_gaussian(space, 18, seed=2)
        f0 = 2.0 * d.element(3) - 1.5 * d.element(7) + 0.5 * d.element(11)
        value, support = sigma_m_exact(f0, d, 3)
        assert value <= 1e-10 * norm(space, f0)
        assert support == (3, 7, 11)

    def test_fast_path_matches_enumeration(self):
        space = GridSpace.uniform(8, 2.0)
        d = build_haar(space, d=1, levels=3)
        slow = OracleConfig(fast_path=False)
        for seed in range(10):
            rng = np.random.default_rng(seed)
            f0 = rng.standard_normal(8)
            for m in (1, 2, 3, 4):
                v_fast, s_fast = sigma_m_exact(f0, d, m)
                v_slow, s_slow = sigma_m_exact(f0, d, m, slow)
                assert v_fast == pytest.approx(v_slow, abs=1e-12)
                assert s_fast == s_slow

    def test_nonincreasing_in_m(self):
        space = GridSpace.uniform(8, 2.0)
        d = build_gaussian(space, 12, seed=3)
        rng = np.random.default_rng(4)
        f0 = rng.standard_normal(8)
        values = [sigma_m_exact(f0, d, m)[0] for m in range(7)]
        for a, b in zip(values, values[1:]):
            assert b <= a + 1e-12

    def test_square_full_rank_vanishes(self):
        space = GridSpace.uniform(6, 2.0)
        d = build_gaussian(space, 6, seed=5)
        rng = np.random.default_rng(6)
        f0 = rng.standard_normal(6)
        value, _ = sigma_m_exact(f0, d, 6)
        assert value <= 1e-10 * norm(space, f0)

    def test_duplicate_columns_resolved(self):
        # the scan returns NaN on singular supports; the explicit re-solve
        # must still produce the subspace distance
        space = GridSpace.uniform(4, 2.0)
        g = np.array([1.0, 2.0, 0.0, -1.0])
        d = build_custom(space, np.column_stack([g, g]))
        f0 = np.array([1.0, 0.0, 3.0, 0.0])
        value, support = sigma_m_exact(f0, d, 2)
        sw = np.sqrt(space.weights)
        u = (g * sw) / np.linalg.norm(g * sw)
        y = f0 * sw
        expected = np.linalg.norm(y - (u @ y) * u)
        assert value == pytest.approx(expected, abs=1e-12)
        assert support == (0, 1)

    def test_matches_brute_force_lstsq(self):
        space = GridSpace.uniform(6, 2.0)
        d = build_gaussian(space, 9, seed=7)
        rng = np.random.default_rng(8)
        f0 = rng.standard_normal(6)
        sw = np.sqrt(space.weights)
        B = d.elements * sw[:, None]
        y = f0 * sw
        for m in (1, 2, 3):
            best = math.inf
            for idx in itertools.combinations(range(9), m):
                c, _, _, _ = np.linalg.lstsq(B[:, idx], y, rcond=None)
                best = min(best, float(np.linalg.norm(y - B[:, idx] @ c)))
            value, _ = sigma_m_exact(f0, d, m)
            assert value == pytest.approx(best, abs=1e-12)

    def test_m_beyond_count_clamps(self):
        space = GridSpace.uniform(6, 2.0)
        d = build_gaussian(space, 4, seed=9)
        f0 = np.ones(6)
        v4, s4 = sigma_m_exact(f0, d, 4)
        v9, s9 = sigma_m_exact(f0, d, 9)
        assert v9 == pytest.approx(v4, abs=1e-12)
        assert s9 == s4


class TestSigmaGeneralP:
    @pytest.mark.parametrize("p", [1.5, 4.0])
    def test_matches_direct_minimization(self, p):
        space = GridSpace.uniform(8, p)
        d = build_trigonometric(space, d=1, max_freq=2)
        rng = np.random.default_rng(10)
        f0 = rng.standard_normal(8)
        for m in (1, 2):
            value, _ = sigma_m_exact(f0, d, m)
            best = math.inf
            for idx in itertools.combinations(range(d.count), m):
                cols = d.elements[:, list(idx)]
                out = minimize(
                    lambda c: norm(space, f0 - cols @ c),
                    np.zeros(m),
                    method="Nelder-Mead",
                    options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000},
                )
                best = min(best, float(out.fun))
            assert value == pytest.approx(best, abs=1e-7)

    def test_planted_sparse_general_p(self):
        space = GridSpace.uniform(10, 3.0)
        d = build_gaussian(space, 8, seed=11)
        f0 = 1.0 * d.element(2) + 0.25 * d.element(5)
        value, support = sigma_m_exact(f0, d, 2)
        assert value <= 1e-9 * norm(space, f0)
        assert support == (2, 5)

    def test_nonincreasing_in_m(self):
        space = GridSpace.uniform(8, 4.0)
        d = build_gaussian(space, 7, seed=12)
        rng = np.random.default_rng(13)
        f0 = rng.standard_normal(8)
        values = [sigma_m_exact(f0, d, m)[0] for m in range(4)]
        for a, b in zip(values, values[1:]):
            assert b <= a + 1e-9


class TestValidation:
    def test_cap_exceeded(self):
        space = GridSpace.uniform(8, 2.0)
        d = build_gaussian(space, 20, seed=14)
        with pytest.raises(ConfigurationError, match="cap"):
            sigma_m_exact(np.ones(8), d, 10, OracleConfig(cap=100))

    def test_negative_m(self):
        space = GridSpace.uniform(4, 2.0)
        d = build_gaussian(space, 4, seed=15)
        with pytest.raises(DomainError):
            sigma_m_exact(np.ones(4), d, -1)

    def test_shape_mismatch(self):
        space = GridSpace.uniform(4, 2.0)
        d = build_gaussian(space, 4, seed=16)
        with pytest.raises(StructuralError):
            sigma_m_exact(np.ones(5), d, 1)

    def test_config_validation(self):
        with pytest.raises(DomainError):
            OracleConfig(cap=0)
        with pytest.raises(DomainError):
            OracleConfig(kkt_tol=0.0)


class TestGreedyNeverBeatsOracle:
    def test_womp_residuals_dominate_sigma(self):
        space = GridSpace.uniform(8, 2.0)
        for seed in range(5):
            d = build_gaussian(space, 12, seed=100 + seed)
            rng = np.random.default_rng(seed)
            f0 = rng.standard_normal(8)
            trace = womp(f0, d, max_m=4)
            for m in range(trace.iterations + 1):
                sigma, _ = sigma_m_exact(f0, d, m)
                assert trace.residual_norms[m] >= sigma - 1e-10

    def test_wcga_residuals_dominate_sigma(self):
        space = GridSpace.uniform(8, 3.0)
        d = build_gaussian(space, 8, seed=17)
        rng = np.random.default_rng(18)
        f0 = rng.standard_normal(8)
        trace = wcga(f0, d, WeaknessPolicy(), max_m=3)
        for m in range(trace.iterations + 1):
            sigma, _ = sigma_m_exact(f0, d, m)
            assert trace.residual_norms[m] >= sigma - 1e-10


class TestLebesgueRatio:
    def test_exact_recovery_is_one(self):
        space = GridSpace.uniform(10, 2.0)
        d = build_gaussian(space, 14, seed=19)
        f0 = d.element(1) - 2.0 * d.element(6)
        trace = womp(f0, d, max_m=8)
        assert trace.termination == "residual_tol"
        assert lebesgue_ratio(trace, f0, d, 2) == 1.0

    def test_orthonormal_equals_one(self):
        space = GridSpace.uniform(8, 2.0)
        d = build_haar(space, d=1, levels=3)
        rng = np.random.default_rng(20)
        f0 = rng.standard_normal(8)
        m = 3
        trace = womp(f0, d, max_m=m)
        ratio = lebesgue_ratio(trace, f0, d, m, iterations_used=m)
        assert ratio == pytest.approx(1.0, abs=1e-10)

    def test_general_p_ratio_recomputed(self):
        space = GridSpace.uniform(8, 4.0)
        d = build_trigonometric(space, d=1, max_freq=2)
        rng = np.random.default_rng(21)
        f0 = rng.standard_normal(8)
        m = 2
        trace = wcga(f0, d, WeaknessPolicy(), max_m=m)
        ratio = lebesgue_ratio(trace, f0, d, m)
        sigma, _ = sigma_m_exact(f0, d, m)
        assert math.isfinite(ratio) and ratio >= 1.0 - 1e-10
        assert ratio == pytest.approx(trace.residual_norms[trace.iterations] / sigma)

    def test_failure_sentinel(self):
        # sigma_1 vanishes but the run was stopped before selecting anything
        space = GridSpace.uniform(8, 2.0)
        d = build_gaussian(space, 10, seed=22)
        f0 = 3.0 * d.element(4)
        trace = womp(f0, d, max_m=1)
        ratio = lebesgue_ratio(trace, f0, d, 1, iterations_used=0)
        assert math.isinf(ratio)

    def test_iterations_validation(self):
        space = GridSpace.uniform(8, 2.0)
        d = build_gaussian(space, 10, seed=23)
        rng = np.random.default_rng(24)
        f0 = rng.standard_normal(8)
        trace = womp(f0, d, max_m=2)
        with pytest.raises(StructuralError):
            lebesgue_ratio(trace, f0, d, 2, iterations_used=5)
