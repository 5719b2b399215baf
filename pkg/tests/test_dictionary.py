"""Dictionary builders, normalization, ordering, and interchange formats."""
import math

import numpy as np
import pytest

from lpgreedy import GridSpace, norm
from lpgreedy.dictionary import (
    Dictionary,
    SparseRepresentation,
    build_custom,
    build_gaussian,
    build_haar,
    build_from_descriptor,
    build_trigonometric,
    load_csv,
    load_descriptor,
    save_csv,
    save_descriptor,
    synthesize,
)
from lpgreedy.errors import ConfigurationError, DomainError, StructuralError


def norm_oracle(weights, values, p):
    return math.fsum(w * abs(v) ** p for w, v in zip(weights, values)) ** (1.0 / p)


def weighted_gram(d):
    return d.elements.T @ (d.space.weights[:, None] * d.elements)


class TestTrigonometric:
    def test_univariate_counts_and_orthonormality(self):
        space = GridSpace.uniform(8, 2.0)
        d = build_trigonometric(space, d=1, max_freq=1)
        assert d.count == 3
        assert d.labels == ("1", "cos1", "sin1")
        # {1, sqrt(2) cos, sqrt(2) sin}: Gram = identity
        assert np.abs(weighted_gram(d) - np.eye(3)).max() < 1e-12
        assert np.allclose(d.elements[:, 0], 1.0)
        x = np.arange(8) / 8.0
        assert np.allclose(d.elements[:, 1], math.sqrt(2) * np.cos(2 * np.pi * x), atol=1e-12)
        assert np.allclose(d.elements[:, 2], math.sqrt(2) * np.sin(2 * np.pi * x), atol=1e-12)

    def test_bivariate_count(self):
        space = GridSpace.uniform(64, 2.0)
        d = build_trigonometric(space, d=2, max_freq=1)
        assert d.count == 9

    def test_unit_norms_p4_by_quadrature(self):
        space = GridSpace.uniform(16, 4.0)
        d = build_trigonometric(space, d=1, max_freq=2)
        for j in range(d.count):
            assert norm_oracle(space.weights, d.elements[:, j], 4.0) == pytest.approx(
                1.0, abs=1e-12
            )

    def test_gram_identity_within_tolerance(self):
        space = GridSpace.uniform(32, 2.0)
        d = build_trigonometric(space, d=1, max_freq=7)
        assert np.abs(weighted_gram(d) - np.eye(d.count)).max() <= 1e-10

    def test_grid_too_coarse(self):
        space = GridSpace.uniform(8, 2.0)
        with pytest.raises(ConfigurationError):
            build_trigonometric(space, d=1, max_freq=4)

    def test_labels_unique(self):
        space = GridSpace.uniform(49, 3.0)
        d = build_trigonometric(space, d=2, max_freq=1)
        assert len(set(d.labels)) == d.count


class TestHaar:
    def test_levels_one(self):
        space = GridSpace.uniform(2, 2.0)
        d = build_haar(space, d=1, levels=1)
        assert d.count == 2
        assert d.labels == ("[0,1]", "[0,1)")
        assert np.allclose(d.elements[:, 0], 1.0)
        # step function +/- c on the two halves
        assert d.elements[0, 1] == -d.elements[1, 1]

    def test_levels_two_orthonormal(self):
        space = GridSpace.uniform(4, 2.0)
        d = build_haar(space, d=1, levels=2)
        assert d.count == 4
        assert np.abs(weighted_gram(d) - np.eye(4)).max() <= 1e-10

    def test_normalization_p3_by_quadrature(self):
        space = GridSpace.uniform(4, 3.0)
        d = build_haar(space, d=1, levels=2)
        j = d.labels.index("[0,1/2)")
        col = d.elements[:, j]
        assert norm_oracle(space.weights, col, 3.0) == pytest.approx(1.0, abs=1e-12)
        # supported on [0,1/2) with opposite signs on the two quarters
        assert col[0] > 0 > col[1]
        assert col[2] == col[3] == 0.0

    def test_element_count_tensor(self):
        space = GridSpace.uniform(16, 2.0)
        d = build_haar(space, d=2, levels=2)
        assert d.count == 16
        assert np.abs(weighted_gram(d) - np.eye(16)).max() <= 1e-10

    def test_grid_not_power_of_two(self):
        space = GridSpace.uniform(6, 2.0)
        with pytest.raises(ConfigurationError):
            build_haar(space, d=1, levels=2)


class TestGaussian:
    def test_unit_norms_and_determinism(self):
        space = GridSpace.uniform(16, 2.0)
        d1 = build_gaussian(space, count=32, seed=7)
        d2 = build_gaussian(space, count=32, seed=7)
        assert d1.count == 32
        assert np.array_equal(d1.elements, d2.elements)
        for j in range(32):
            assert norm(space, d1.elements[:, j]) == pytest.approx(1.0, abs=1e-12)

    def test_different_seeds_differ(self):
        space = GridSpace.uniform(16, 2.0)
        a = build_gaussian(space, count=8, seed=1)
        b = build_gaussian(space, count=8, seed=2)
        assert not np.array_equal(a.elements, b.elements)

    def test_unit_norms_general_p(self):
        space = GridSpace.uniform(10, 3.0)
        d = build_gaussian(space, count=5, seed=3)
        for j in range(5):
            assert norm_oracle(space.weights, d.elements[:, j], 3.0) == pytest.approx(
                1.0, abs=1e-12
            )


class TestSynthesize:
    def test_empty_support(self):
        space = GridSpace.uniform(8, 2.0)
        d = build_trigonometric(space, d=1, max_freq=1)
        assert np.array_equal(synthesize(d, SparseRepresentation({})), np.zeros(8))

    def test_single_element(self):
        space = GridSpace.uniform(8, 2.0)
        d = build_trigonometric(space, d=1, max_freq=1)
        f = synthesize(d, SparseRepresentation({2: 1.0}))
        assert np.array_equal(f, d.elements[:, 2])

    def test_pythagoras_orthonormal(self):
        space = GridSpace.uniform(8, 2.0)
        d = build_trigonometric(space, d=1, max_freq=1)
        f = synthesize(d, SparseRepresentation({0: 3.0, 1: 4.0}))
        assert norm(space, f) == pytest.approx(5.0, rel=1e-13)

    def test_linearity_on_disjoint_merge(self):
        space = GridSpace.uniform(16, 2.5)
        d = build_gaussian(space, count=10, seed=5)
        r1 = SparseRepresentation({0: 2.0, 3: -1.0})
        r2 = SparseRepresentation({5: 0.5, 7: 4.0})
        merged = SparseRepresentation({**r1.coefficients, **r2.coefficients})
        assert np.allclose(
            synthesize(d, merged), synthesize(d, r1) + synthesize(d, r2), atol=1e-14
        )

    def test_index_out_of_range(self):
        space = GridSpace.uniform(8, 2.0)
        d = build_trigonometric(space, d=1, max_freq=1)
        with pytest.raises(StructuralError):
            synthesize(d, SparseRepresentation({99: 1.0}))

    def test_zero_coefficients_dropped(self):
        rep = SparseRepresentation({0: 1.0, 1: 0.0})
        assert rep.support == frozenset({0})
        assert rep.sparsity == 1


class TestCustomAndInterchange:
    def test_custom_renormalizes(self):
        space = GridSpace.uniform(4, 3.0)
        mat = np.array([[2.0, 0.0], [0.0, 5.0], [1.0, 0.0], [0.0, 0.1]])
        d = build_custom(space, mat)
        for j in range(2):
            assert norm(space, d.elements[:, j]) == pytest.approx(1.0, abs=1e-12)

    def test_custom_zero_column_rejected(self):
        space = GridSpace.uniform(3, 2.0)
        with pytest.raises(DomainError):
            build_custom(space, np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]))

    def test_duplicate_labels_rejected(self):
        space = GridSpace.uniform(3, 2.0)
        mat = np.eye(3)[:, :2] * 3
        with pytest.raises(StructuralError):
            build_custom(space, mat, labels=("a", "a"))

    def test_csv_round_trip_exact(self, tmp_path):
        space = GridSpace.uniform(12, 2.5)
        d = build_gaussian(space, count=6, seed=9)
        path = tmp_path / "dict.csv"
        save_csv(d, path)
        d2 = load_csv(space, path)
        assert d2.labels == d.labels
        assert np.array_equal(d2.elements, d.elements)

    def test_descriptor_round_trip_builder(self, tmp_path):
        space = GridSpace.uniform(16, 2.0)
        d = build_gaussian(space, count=8, seed=13)
        path = tmp_path / "dict.json"
        save_descriptor(d, path)
        d2 = load_descriptor(path)
        assert d2.kind == "gaussian"
        assert np.array_equal(d2.elements, d.elements)

    def test_descriptor_round_trip_custom(self, tmp_path):
        space = GridSpace.uniform(5, 3.0)
        rng = np.random.default_rng(2)
        d = build_custom(space, rng.standard_normal((5, 4)))
        save_csv(d, tmp_path / "d.csv")
        save_descriptor(d, tmp_path / "d.json", csv_filename="d.csv")
        d2 = load_descriptor(tmp_path / "d.json")
        assert np.allclose(d2.elements, d.elements, atol=1e-15)

    def test_unit_norm_invariant_enforced(self):
        space = GridSpace.uniform(4, 2.0)
        bad = np.full((4, 1), 2.0)
        with pytest.raises(StructuralError):
            Dictionary(space=space, elements=bad, labels=("a",), kind="custom")
