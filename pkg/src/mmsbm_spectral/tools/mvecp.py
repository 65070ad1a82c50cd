"""Minimum-volume enclosing convex polytope (MVECP-k) around a point cloud.

The simplex case k = m + 1 is solved by local facet descent on the half-space form
{x : a_j^T x <= b_j}. Each pass translates every facet onto the cloud (b_j = max
a_j^T x) and then rotates its normal in small steps, keeping only moves that reduce
the volume. Only the convex-hull vertices of the cloud can be active, so all
evaluations run on those. The search is deterministic.

For k > m + 1 in the plane the convex hull is reduced to k vertices by repeatedly
removing the edge whose elimination adds the least area.
"""

import logging
import math

import numpy as np
import scipy.linalg
from scipy.spatial import ConvexHull
from scipy.spatial.distance import pdist, squareform

from ..config import get_config
from ..models import DegenerateInputError, InvalidParameterError, Polytope
from ..utils.validators import check_affine_span
from .polytope import interval_hull, simplex_facets, simplex_volume

logger = logging.getLogger(__name__)

MAX_MOVES_PER_FACET = 50
SOLVE_COND = 1e12


class MinimumVolumeSimplexFitter:
    """Facet-descent search for the minimum-volume simplex enclosing a cloud.

    After ``fit`` the attributes ``initial_volume``, ``volume``, ``passes`` and
    ``volume_trace`` describe the run.
    """

    def __init__(
        self,
        max_passes: int | None = None,
        rel_tol: float | None = None,
        initial_angle: float | None = None,
        min_angle: float | None = None,
    ):
        config = get_config()
        self.max_passes = max_passes if max_passes is not None else config.mvecp_max_passes
        self.rel_tol = rel_tol if rel_tol is not None else config.mvecp_rel_tol
        self.initial_angle = (
            initial_angle if initial_angle is not None else config.mvecp_initial_angle
        )
        self.min_angle = min_angle if min_angle is not None else config.mvecp_min_angle

        self.initial_volume: float | None = None
        self.volume: float | None = None
        self.passes = 0
        self.volume_trace: list[float] = []

    def fit(self, points: np.ndarray, k: int) -> Polytope:
        points = np.asarray(points, dtype=float)
        if points.ndim != 2:
            raise InvalidParameterError("points must be an (n, m) array", stage="polytope")
        n, m = points.shape
        if k < m + 1:
            raise InvalidParameterError(
                f"k={k} vertices cannot enclose a cloud spanning R^{m}", stage="polytope"
            )
        if n < k:
            raise InvalidParameterError(f"need n >= k, got n={n}, k={k}", stage="polytope")
        check_affine_span(points)

        if k > m + 1:
            if m != 2:
                raise InvalidParameterError(
                    f"k > m + 1 is supported only in the plane, got m={m}", stage="polytope"
                )
            poly = enclosing_polygon(points, k)
            self.initial_volume = self.volume = float(ConvexHull(poly.vertices).volume)
            return poly

        if m == 1:
            poly = interval_hull(points)
            self.initial_volume = self.volume = float(np.ptp(points))
            return poly

        active = points[ConvexHull(points).vertices]
        # Lexicographic order makes the search independent of input row order.
        active = active[np.lexsort(active.T[::-1])]
        normals, offsets = self._initial_simplex(active)
        self.initial_volume = self.volume = _volume(normals, offsets)
        self.volume_trace = [self.volume]

        for pass_number in range(1, self.max_passes + 1):
            self.passes = pass_number
            before = self.volume
            for j in range(k):
                offsets[j] = np.max(active @ normals[j])
                self.volume = _volume(normals, offsets)
                self._rotate_facet(active, normals, offsets, j)
            self.volume_trace.append(self.volume)
            if (before - self.volume) < self.rel_tol * before:
                break

        # Final translation pass: every facet touches the cloud.
        offsets = np.max(active @ normals.T, axis=0)
        self.volume = _volume(normals, offsets)
        logger.info(
            f"MVECP: m={m}, k={k}, passes={self.passes}, "
            f"volume {self.initial_volume:.6g} -> {self.volume:.6g}"
        )
        return Polytope(_vertices(normals, offsets))

    def _initial_simplex(self, active: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Greedy max-volume inscribed simplex, dilated about its centroid to enclose."""
        m = active.shape[1]
        distances = squareform(pdist(active))
        first, second = np.unravel_index(np.argmax(distances), distances.shape)
        chosen = [int(first), int(second)]
        while len(chosen) < m + 1:
            spanned = active[chosen[1:]] - active[chosen[0]]
            q, _ = np.linalg.qr(spanned.T)
            offsets = active - active[chosen[0]]
            heights = np.linalg.norm(offsets - offsets @ q @ q.T, axis=1)
            heights[chosen] = -1.0
            chosen.append(int(np.argmax(heights)))

        inscribed = Polytope(active[chosen])
        normals, offsets = simplex_facets(inscribed)
        center = inscribed.centroid
        slack = offsets - normals @ center
        scale = max(1.0, float(np.max((active - center) @ normals.T / slack)))
        logger.debug(
            f"MVECP init: inscribed volume {simplex_volume(inscribed):.6g}, dilation {scale:.4f}"
        )
        return normals, normals @ center + scale * slack

    def _rotate_facet(
        self, active: np.ndarray, normals: np.ndarray, offsets: np.ndarray, j: int
    ) -> None:
        """Coordinate descent on facet j's normal, halving the angle on failure."""
        angle = self.initial_angle
        moves = 0
        while angle >= self.min_angle and moves < MAX_MOVES_PER_FACET:
            tangents = scipy.linalg.null_space(normals[j][None, :])
            accepted = False
            for tangent in tangents.T:
                for sign in (1.0, -1.0):
                    candidate = math.cos(angle) * normals[j] + sign * math.sin(angle) * tangent
                    candidate /= np.linalg.norm(candidate)
                    trial_normals = normals.copy()
                    trial_offsets = offsets.copy()
                    trial_normals[j] = candidate
                    trial_offsets[j] = np.max(active @ candidate)
                    volume = _volume(trial_normals, trial_offsets)
                    if volume < self.volume:
                        normals[j], offsets[j] = candidate, trial_offsets[j]
                        self.volume = volume
                        accepted = True
                        break
                if accepted:
                    break
            if accepted:
                moves += 1
            else:
                angle /= 2


def _vertices(normals: np.ndarray, offsets: np.ndarray) -> np.ndarray | None:
    """Vertex i solves the facet equations of every facet except i; None if invalid."""
    k = normals.shape[0]
    vertices = np.empty((k, normals.shape[1]))
    for i in range(k):
        rows = np.arange(k) != i
        system = normals[rows]
        if np.linalg.cond(system) > SOLVE_COND:
            return None
        vertices[i] = np.linalg.solve(system, offsets[rows])
        # Vertex i must lie strictly inside facet i, otherwise the region is unbounded.
        if normals[i] @ vertices[i] >= offsets[i]:
            return None
    return vertices


def _volume(normals: np.ndarray, offsets: np.ndarray) -> float:
    vertices = _vertices(normals, offsets)
    if vertices is None:
        return math.inf
    edges = vertices[1:] - vertices[0]
    return float(abs(np.linalg.det(edges)) / math.factorial(normals.shape[1]))


def enclosing_polygon(points: np.ndarray, k: int) -> Polytope:
    """k-gon enclosing planar points, by greedy edge elimination on the convex hull."""
    hull = ConvexHull(points)
    polygon = [points[i] for i in hull.vertices]  # counter-clockwise in 2-D

    while len(polygon) > k:
        h = len(polygon)
        best_area, best_index, best_point = math.inf, None, None
        for i in range(h):
            before, start = polygon[i - 1], polygon[i]
            end, after = polygon[(i + 1) % h], polygon[(i + 2) % h]
            direction_in = start - before
            direction_out = end - after
            system = np.column_stack([direction_in, -direction_out])
            if abs(np.linalg.det(system)) < 1e-15:
                continue
            s, t = np.linalg.solve(system, end - start)
            if s <= 0 or t <= 0:
                continue
            apex = start + s * direction_in
            edge, rise = end - start, apex - start
            area = 0.5 * abs(edge[0] * rise[1] - edge[1] * rise[0])
            if area < best_area:
                best_area, best_index, best_point = area, i, apex
        if best_index is None:
            raise DegenerateInputError(
                "no hull edge can be eliminated", stage="polytope", context={"k": k}
            )
        h = len(polygon)
        polygon[best_index] = best_point
        del polygon[(best_index + 1) % h]

    while len(polygon) < k:
        lengths = [
            np.linalg.norm(polygon[(i + 1) % len(polygon)] - polygon[i])
            for i in range(len(polygon))
        ]
        i = int(np.argmax(lengths))
        midpoint = 0.5 * (polygon[i] + polygon[(i + 1) % len(polygon)])
        polygon.insert(i + 1, midpoint)

    return Polytope(np.array(polygon))


def fit_mvecp(points: np.ndarray, k: int, **fitter_options) -> Polytope:
    """Fit the minimum-volume enclosing convex k-polytope around ``points``."""
    return MinimumVolumeSimplexFitter(**fitter_options).fit(points, k)
