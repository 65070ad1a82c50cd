"""Tests for polytope geometry and shrinkage."""

import math

import numpy as np
import pytest

from mmsbm_spectral.models import DegenerateInputError, InvalidParameterError, Polytope
from mmsbm_spectral.tools.polytope import (
    A_STAR,
    barycentric,
    calibrate_rate_constant,
    contains,
    contains_points,
    facet_distances,
    interval_hull,
    polytope_volume,
    shrink,
    shrink_factor,
    simplex_facets,
    simplex_volume,
    symdiff_volume_mc,
)

TRIANGLE = Polytope(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))


class TestShrinkage:
    """Shrink factor and contraction."""

    def test_rate_constant(self):
        assert A_STAR == pytest.approx(3.29505, abs=1e-4)
        assert calibrate_rate_constant(0.9, 10_000) == A_STAR

    def test_rate_matches_fixed_at_reference_n(self):
        assert shrink_factor(10_000, A_STAR) == pytest.approx(0.9, abs=1e-12)

    def test_shrink_factor_natural_log(self):
        assert shrink_factor(100, 1.0) == pytest.approx(1 - math.sqrt(math.log(100) / 100))

    def test_shrink_factor_clamped(self):
        assert shrink_factor(2, 100.0) == 0.0
        assert shrink_factor(5, 0.0) == 1.0

    def test_shrink_factor_domain(self):
        with pytest.raises(InvalidParameterError):
            shrink_factor(1, 1.0)
        with pytest.raises(InvalidParameterError):
            shrink_factor(10, -1.0)

    def test_shrink_toward_center(self):
        shrunk = shrink(TRIANGLE, TRIANGLE.centroid, 0.5)
        np.testing.assert_allclose(shrunk.centroid, TRIANGLE.centroid)
        assert simplex_volume(shrunk) == pytest.approx(0.25 * simplex_volume(TRIANGLE))

    def test_identity_and_collapse(self):
        same = shrink(TRIANGLE, np.zeros(2), 1.0)
        np.testing.assert_array_equal(same.vertices, TRIANGLE.vertices)
        collapsed = shrink(TRIANGLE, np.array([0.2, 0.2]), 0.0)
        np.testing.assert_allclose(collapsed.vertices, np.full((3, 2), 0.2))

    @pytest.mark.parametrize("m", [2, 3])
    def test_smaller_eta_nests_inside(self, rng, m):
        """Shrinking less leaves a polytope that contains the more-shrunk one."""
        base = np.vstack([np.zeros(m), np.eye(m)])
        for _ in range(200):
            poly = Polytope(base + 0.2 * rng.normal(size=base.shape))
            eta = rng.uniform(0.1, 1.0)
            smaller = rng.uniform(0.05, eta)
            outer = shrink(poly, poly.centroid, eta)
            inner = shrink(poly, poly.centroid, smaller)
            assert np.all(contains_points(outer, inner.vertices))

    def test_eta_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            shrink(TRIANGLE, TRIANGLE.centroid, 1.5)


class TestVolume:
    """Simplex and hull volumes."""

    def test_unit_simplices(self):
        assert simplex_volume(TRIANGLE) == pytest.approx(0.5)
        tetra = Polytope(np.vstack([np.zeros(3), np.eye(3)]))
        assert simplex_volume(tetra) == pytest.approx(1 / 6)

    def test_square(self):
        square = Polytope(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
        assert polytope_volume(square) == pytest.approx(1.0)

    def test_interval(self):
        interval = interval_hull(np.array([0.3, -0.2, 0.7]))
        np.testing.assert_allclose(interval.vertices, [[-0.2], [0.7]])
        assert polytope_volume(interval) == pytest.approx(0.9)


class TestContainment:
    """Facets, containment and barycentric coordinates."""

    def test_facets_outward_unit_normals(self):
        normals, offsets = simplex_facets(TRIANGLE)
        np.testing.assert_allclose(np.linalg.norm(normals, axis=1), 1.0)
        # Facet 0 is opposite the origin: x + y = 1.
        np.testing.assert_allclose(normals[0], [1 / math.sqrt(2), 1 / math.sqrt(2)])
        assert offsets[0] == pytest.approx(1 / math.sqrt(2))

    def test_signed_distances(self):
        distances = facet_distances(TRIANGLE, np.array([[2.0, 0.0]]))
        assert distances.max() == pytest.approx(1 / math.sqrt(2))

    def test_contains(self):
        assert contains(TRIANGLE, np.array([0.2, 0.2]))
        assert contains(TRIANGLE, np.array([0.5, 0.5]))
        assert not contains(TRIANGLE, np.array([0.6, 0.6]))
        assert contains(TRIANGLE, np.array([0.5 + 1e-12, 0.5]))

    def test_contains_hull_and_interval(self):
        square = Polytope(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
        mask = contains_points(square, np.array([[0.5, 0.5], [1.5, 0.5]]))
        np.testing.assert_array_equal(mask, [True, False])
        interval = Polytope(np.array([[0.0], [1.0]]))
        assert contains(interval, np.array([0.5]))
        assert not contains(interval, np.array([1.5]))

    def test_barycentric_vertices_and_centroid(self):
        np.testing.assert_allclose(barycentric(TRIANGLE, TRIANGLE.vertices), np.eye(3), atol=1e-12)
        np.testing.assert_allclose(barycentric(TRIANGLE, TRIANGLE.centroid), np.full(3, 1 / 3))

    def test_barycentric_outside_has_negative_entry(self):
        coefficients = barycentric(TRIANGLE, np.array([1.0, 1.0]))
        assert coefficients.sum() == pytest.approx(1.0)
        assert coefficients.min() < 0

    def test_degenerate_simplex(self):
        flat = Polytope(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]))
        with pytest.raises(DegenerateInputError):
            barycentric(flat, np.array([0.5, 0.5]))

    def test_barycentric_needs_simplex(self):
        square = Polytope(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
        with pytest.raises(InvalidParameterError):
            barycentric(square, np.array([0.5, 0.5]))


class TestSymmetricDifference:
    """Monte Carlo symmetric-difference volume."""

    def test_identical_polytopes(self, rng):
        estimate = symdiff_volume_mc(TRIANGLE, TRIANGLE, 10_000, rng)
        assert estimate.value == 0.0

    def test_nested_triangles(self, rng):
        """A triangle against its 1/2-scaled copy at the origin differs by 0.5 - 0.125."""
        half = Polytope(TRIANGLE.vertices * 0.5)
        estimate = symdiff_volume_mc(TRIANGLE, half, 200_000, rng)
        assert estimate.value == pytest.approx(0.375, abs=4 * estimate.stderr + 1e-3)

    def test_sample_count_checked(self, rng):
        with pytest.raises(InvalidParameterError):
            symdiff_volume_mc(TRIANGLE, TRIANGLE, 0, rng)
