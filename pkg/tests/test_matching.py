"""Tests for permutation matching and simplex projection."""

import itertools

import numpy as np
import pytest

from mmsbm_spectral.models import REFERENCE_B, InvalidParameterError
from mmsbm_spectral.tools.matching import (
    match_permutation,
    match_vertices,
    permute_matrix,
    project_to_simplex,
    vertex_error,
)

B = np.array(REFERENCE_B)


class TestMatchPermutation:
    """Row-column permutation search."""

    def test_identity(self):
        match = match_permutation(B, B)
        np.testing.assert_array_equal(match.permutation, [0, 1, 2])
        assert match.error == 0.0
        assert match.exhaustive

    def test_recovers_known_permutation(self):
        rho = np.array([2, 0, 1])
        shuffled = B[np.ix_(np.argsort(rho), np.argsort(rho))]
        match = match_permutation(shuffled, B)
        assert match.error == pytest.approx(0.0, abs=1e-15)
        np.testing.assert_allclose(permute_matrix(shuffled, match.permutation), B)

    def test_perturbed_matches_brute_force(self, rng):
        for _ in range(20):
            k = 4
            b = rng.uniform(size=(k, k))
            b = 0.5 * (b + b.T)
            noise = rng.normal(size=(k, k))
            noise = 0.5 * (noise + noise.T)
            noise *= 0.1 / np.linalg.norm(noise)
            rho = rng.permutation(k)
            b_hat = permute_matrix(b, rho) + noise

            match = match_permutation(b_hat, b)
            brute = min(
                np.linalg.norm(permute_matrix(b_hat, np.array(p)) - b)
                for p in itertools.permutations(range(k))
            )
            assert match.error == pytest.approx(brute)
            assert match.error <= 0.1 + 1e-12

    def test_heuristic_above_threshold(self, rng):
        k = 10
        b = np.diag(np.linspace(0.5, 0.95, k)) + 0.01
        rho = rng.permutation(k)
        match = match_permutation(permute_matrix(b, rho), b, exhaustive_max_k=8)
        assert not match.exhaustive
        assert match.error == pytest.approx(0.0, abs=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidParameterError):
            match_permutation(np.eye(2), np.eye(3))


class TestVertexMatching:
    """Max-distance vertex matching."""

    def test_identical(self):
        v = np.eye(3)
        assert vertex_error(v, v) == 0.0

    def test_one_vertex_displaced(self):
        v = np.eye(3)
        moved = v.copy()
        moved[1] += np.array([0.0, 0.0, 0.05])
        assert vertex_error(moved, v) == pytest.approx(0.05)

    def test_permuted_copy(self, rng):
        v = rng.normal(size=(4, 2))
        rho = rng.permutation(4)
        match = match_vertices(v[rho], v)
        assert match.error == 0.0
        np.testing.assert_array_equal(v[rho][match.permutation], v)


class TestProjectToSimplex:
    """Euclidean projection onto the probability simplex."""

    def test_points_on_simplex_unchanged(self):
        v = np.array([[0.2, 0.3, 0.5], [1.0, 0.0, 0.0]])
        np.testing.assert_allclose(project_to_simplex(v), v)

    def test_known_projection(self):
        np.testing.assert_allclose(project_to_simplex(np.array([2.0, 0.0, 0.0])), [[1, 0, 0]])
        np.testing.assert_allclose(
            project_to_simplex(np.array([0.6, 0.6, -0.2])), [[0.5, 0.5, 0.0]]
        )

    def test_matches_brute_force_optimum(self, rng):
        """The projection is closer than any random simplex point."""
        for _ in range(20):
            v = rng.normal(size=3)
            p = project_to_simplex(v)[0]
            assert p.min() >= 0
            assert p.sum() == pytest.approx(1.0)
            candidates = rng.dirichlet(np.ones(3), size=2000)
            assert np.linalg.norm(v - p) <= np.min(np.linalg.norm(candidates - v, axis=1)) + 1e-12
