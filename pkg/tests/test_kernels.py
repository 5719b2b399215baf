"""Backend equivalence tests for the support-scan kernels."""
import itertools
import os
import subprocess
import sys

import numpy as np
import pytest

from lpgreedy import StructuralError, kernels
from lpgreedy.kernels import _pure

try:
    from lpgreedy import _scan as _compiled
except ImportError:
    _compiled = None

needs_compiled = pytest.mark.skipif(_compiled is None, reason="compiled core not built")


def make_problem(n, count, size, seed, singular_at=None):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, count))
    if singular_at is not None:
        i, j = singular_at
        B[:, j] = B[:, i]
    y = rng.standard_normal(n)
    G = B.T @ B
    b = B.T @ y
    supports = np.array(list(itertools.combinations(range(count), size)), dtype=np.int64)
    return G, b, float(y @ y), supports


class TestPureContract:
    def test_residuals_match_lstsq(self):
        G, b, f2, supports = make_problem(8, 10, 3, seed=0)
        vals = _pure.least_squares_scan(G, b, f2, supports)
        rng = np.random.default_rng(0)
        B = rng.standard_normal((8, 10))
        y = rng.standard_normal(8)
        for k, idx in enumerate(supports):
            c, _, _, _ = np.linalg.lstsq(B[:, idx], y, rcond=None)
            res2 = float(np.sum((y - B[:, idx] @ c) ** 2))
            assert vals[k] == pytest.approx(res2, abs=1e-10)

    def test_singular_support_nan(self):
        G, b, f2, supports = make_problem(8, 6, 2, seed=1, singular_at=(0, 1))
        vals = _pure.least_squares_scan(G, b, f2, supports)
        assert np.isnan(vals[0])  # support (0, 1) is the duplicated pair
        assert np.isfinite(vals[1:]).all()

    def test_extremes_match_eigvalsh(self):
        G, _, _, supports = make_problem(8, 9, 3, seed=2)
        lo, hi = _pure.gram_extremes_scan(G, supports)
        for k, idx in enumerate(supports):
            lam = np.linalg.eigvalsh(G[np.ix_(idx, idx)])
            assert lo[k] == pytest.approx(lam[0], abs=1e-10)
            assert hi[k] == pytest.approx(lam[-1], abs=1e-10)


@needs_compiled
class TestBackendEquivalence:
    @pytest.mark.parametrize("size", [1, 2, 3, 5])
    def test_least_squares_scan(self, size):
        G, b, f2, supports = make_problem(10, 12, size, seed=3)
        pure = _pure.least_squares_scan(G, b, f2, supports)
        fast = _compiled.least_squares_scan(G, b, f2, supports)
        np.testing.assert_allclose(fast, pure, atol=1e-10, rtol=1e-8)

    def test_nan_positions_agree(self):
        G, b, f2, supports = make_problem(8, 7, 2, seed=4, singular_at=(2, 5))
        pure = _pure.least_squares_scan(G, b, f2, supports)
        fast = _compiled.least_squares_scan(G, b, f2, supports)
        np.testing.assert_array_equal(np.isnan(fast), np.isnan(pure))
        mask = ~np.isnan(pure)
        np.testing.assert_allclose(fast[mask], pure[mask], atol=1e-10)

    @pytest.mark.parametrize("size", [1, 2, 4])
    def test_gram_extremes_scan(self, size):
        G, _, _, supports = make_problem(9, 11, size, seed=5)
        plo, phi = _pure.gram_extremes_scan(G, supports)
        flo, fhi = _compiled.gram_extremes_scan(G, supports)
        np.testing.assert_allclose(flo, plo, atol=1e-9)
        np.testing.assert_allclose(fhi, phi, atol=1e-9)

    def test_large_batch_consistency(self):
        G, b, f2, supports = make_problem(16, 20, 3, seed=6)
        assert len(supports) == 1140
        pure = _pure.least_squares_scan(G, b, f2, supports)
        fast = _compiled.least_squares_scan(G, b, f2, supports)
        np.testing.assert_allclose(fast, pure, atol=1e-9)


class TestDispatch:
    def test_backend_name(self):
        assert kernels.backend() in ("compiled", "pure")

    def test_validation(self):
        G = np.eye(3)
        with pytest.raises(StructuralError):
            kernels.least_squares_scan(G[:2], np.zeros(3), 1.0, np.zeros((1, 1), dtype=np.int64))
        with pytest.raises(StructuralError):
            kernels.least_squares_scan(G, np.zeros(2), 1.0, np.zeros((1, 1), dtype=np.int64))
        with pytest.raises(StructuralError):
            kernels.gram_extremes_scan(G, np.array([[5]], dtype=np.int64))
        with pytest.raises(StructuralError):
            kernels.gram_extremes_scan(G, np.array([0], dtype=np.int64))

    def test_force_pure_env(self):
        code = (
            "import lpgreedy.kernels as k; print(k.backend())"
        )
        env = dict(os.environ, LPGREEDY_FORCE_PURE="1")
        out = subprocess.run(
            [sys.executable, "-c", code], capture_output=True, text=True, env=env
        )
        assert out.returncode == 0, out.stderr
        assert out.stdout.strip() == "pure"

    def test_results_identical_through_dispatch(self):
        G, b, f2, supports = make_problem(8, 9, 2, seed=7)
        direct = _pure.least_squares_scan(G, b, f2, supports)
        via = kernels.least_squares_scan(G, b, f2, supports)
        np.testing.assert_allclose(via, direct, atol=1e-10)
