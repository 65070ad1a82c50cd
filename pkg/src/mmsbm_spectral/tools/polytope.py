"""Polytope geometry: shrinkage, volume, containment and barycentric coordinates.

Simplices (k = m + 1 vertices in R^m) are handled in closed form through the affine
map x -> barycentric(x). Other vertex sets fall back to a qhull convex hull.
"""

import logging
import math
from typing import NamedTuple

import numpy as np
from scipy.spatial import ConvexHull

from ..config import get_config
from ..models import DegenerateInputError, InvalidParameterError, Polytope

logger = logging.getLogger(__name__)

DEGENERATE_COND = 1e12


def calibrate_rate_constant(eta_ref: float = 0.9, n_ref: int = 10_000) -> float:
    """Constant a with 1 - a n^{-1/2} log^{1/2}(n) = eta_ref at n = n_ref."""
    return (1.0 - eta_ref) * math.sqrt(n_ref) / math.sqrt(math.log(n_ref))


# Rate constant matching the fixed 10% shrink at n = 10 000 (about 3.2951).
A_STAR = calibrate_rate_constant()


class VolumeEstimate(NamedTuple):
    value: float
    stderr: float


def shrink_factor(n: int, a: float) -> float:
    """eta = clamp(1 - a n^{-1/2} log^{1/2}(n), 0, 1) with the natural logarithm."""
    if n < 2:
        raise InvalidParameterError(f"n must be >= 2, got {n}", stage="polytope")
    if a < 0:
        raise InvalidParameterError(f"rate constant must be >= 0, got {a}", stage="polytope")
    eta = 1.0 - a * math.sqrt(math.log(n)) / math.sqrt(n)
    return min(max(eta, 0.0), 1.0)


def shrink(poly: Polytope, center: np.ndarray, eta: float) -> Polytope:
    """Contract every vertex toward ``center``: v -> center + eta (v - center)."""
    if not 0.0 <= eta <= 1.0:
        raise InvalidParameterError(f"eta must lie in [0, 1], got {eta}", stage="polytope")
    center = np.asarray(center, dtype=float)
    if eta == 1.0:
        return Polytope(poly.vertices.copy())
    return Polytope(center + eta * (poly.vertices - center))


def interval_hull(points: np.ndarray) -> Polytope:
    """Two-vertex polytope [min, max] around one-dimensional points."""
    values = np.asarray(points, dtype=float).reshape(-1)
    return Polytope(np.array([[values.min()], [values.max()]]))


def simplex_volume(poly: Polytope) -> float:
    """|det(v_2 - v_1, ..., v_{m+1} - v_1)| / m!."""
    if not poly.is_simplex:
        raise InvalidParameterError(
            f"simplex_volume needs k = m + 1, got k={poly.k}, m={poly.ambient_dim}"
        )
    edges = poly.vertices[1:] - poly.vertices[0]
    return float(abs(np.linalg.det(edges)) / math.factorial(poly.ambient_dim))


def polytope_volume(poly: Polytope) -> float:
    """Volume of the convex hull of the vertices."""
    if poly.is_simplex:
        return simplex_volume(poly)
    if poly.ambient_dim == 1:
        return float(np.ptp(poly.vertices))
    return float(ConvexHull(poly.vertices).volume)


def _affine_system(poly: Polytope) -> np.ndarray:
    """Inverse of [V^T; 1^T], so that lambda(x) = G[:, :m] x + G[:, m]."""
    system = np.vstack([poly.vertices.T, np.ones(poly.k)])
    if np.linalg.cond(system) > DEGENERATE_COND:
        raise DegenerateInputError(
            "simplex vertices are affinely dependent", stage="polytope"
        )
    return np.linalg.inv(system)


def simplex_facets(poly: Polytope) -> tuple[np.ndarray, np.ndarray]:
    """Outward unit normals and offsets; row i is the facet opposite vertex i.

    A point x is inside iff ``normals @ x - offsets <= 0`` row-wise, and each entry of
    that vector is the signed distance to the corresponding facet plane.
    """
    inverse = _affine_system(poly)
    linear, constant = inverse[:, :-1], inverse[:, -1]
    norms = np.linalg.norm(linear, axis=1)
    return -linear / norms[:, None], constant / norms


def facet_distances(poly: Polytope, points: np.ndarray) -> np.ndarray:
    """Signed distance of every point to every facet (positive means outside)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != poly.ambient_dim:
        raise InvalidParameterError(
            f"points live in R^{points.shape[1]}, polytope in R^{poly.ambient_dim}"
        )
    if poly.is_simplex:
        normals, offsets = simplex_facets(poly)
        return points @ normals.T - offsets
    if poly.ambient_dim == 1:
        lo, hi = poly.vertices.min(), poly.vertices.max()
        return np.column_stack([lo - points[:, 0], points[:, 0] - hi])
    equations = ConvexHull(poly.vertices).equations
    return points @ equations[:, :-1].T + equations[:, -1]


def contains_points(poly: Polytope, points: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Boolean mask: inside or within ``tol`` of every facet."""
    if tol is None:
        tol = get_config().containment_tol
    return np.all(facet_distances(poly, points) <= tol, axis=1)


def contains(poly: Polytope, point: np.ndarray, tol: float | None = None) -> bool:
    """True iff ``point`` lies inside ``poly`` or within ``tol`` of every facet."""
    return bool(contains_points(poly, np.asarray(point, dtype=float)[None, :], tol)[0])


def barycentric(poly: Polytope, point: np.ndarray) -> np.ndarray:
    """Affine coefficients c with sum(c) = 1 and sum_j c_j v_j = point.

    Accepts one point (returns a k-vector) or an (n, m) array (returns (n, k)).
    No sign constraint is applied.
    """
    if not poly.is_simplex:
        raise InvalidParameterError(
            f"barycentric coordinates need k = m + 1, got k={poly.k}, m={poly.ambient_dim}"
        )
    inverse = _affine_system(poly)
    point = np.asarray(point, dtype=float)
    single = point.ndim == 1
    points = np.atleast_2d(point)
    coefficients = points @ inverse[:, :-1].T + inverse[:, -1]
    return coefficients[0] if single else coefficients


def symdiff_volume_mc(
    p1: Polytope,
    p2: Polytope,
    samples: int,
    rng: np.random.Generator,
    chunk_size: int = 100_000,
) -> VolumeEstimate:
    """Monte Carlo estimate of the volume of the symmetric difference p1 xor p2.

    Samples uniformly over the joint bounding box; no alignment is attempted.
    """
    if samples < 1:
        raise InvalidParameterError(f"samples must be >= 1, got {samples}")
    if p1.ambient_dim != p2.ambient_dim:
        raise InvalidParameterError(
            f"ambient dimensions differ: {p1.ambient_dim} vs {p2.ambient_dim}"
        )

    both = np.vstack([p1.vertices, p2.vertices])
    lo, hi = both.min(axis=0), both.max(axis=0)
    box_volume = float(np.prod(hi - lo))

    hits = 0
    remaining = samples
    while remaining:
        size = min(chunk_size, remaining)
        draws = rng.uniform(lo, hi, size=(size, p1.ambient_dim))
        inside_1 = contains_points(p1, draws, tol=0.0)
        inside_2 = contains_points(p2, draws, tol=0.0)
        hits += int(np.count_nonzero(inside_1 ^ inside_2))
        remaining -= size

    fraction = hits / samples
    stderr = box_volume * math.sqrt(fraction * (1 - fraction) / samples)
    return VolumeEstimate(box_volume * fraction, stderr)
