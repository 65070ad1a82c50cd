"""Samplers for the undirected MMSBM and the random dot product graph.

Both samplers walk the upper triangle one row at a time, so an n-node graph costs
O(n^2) random draws but only O(n) working memory beyond the edge list. Given the same
parameters and the same ``numpy.random.Generator`` state they produce the same graph.
"""

import logging
from collections.abc import Callable

import numpy as np
import scipy.linalg

from ..models import (
    RANK_TOL,
    GraphSample,
    GroundTruth,
    InvalidParameterError,
    LatentPositions,
    MembershipMatrix,
    ModelSpec,
)
from ..utils.validators import check_nonnegative_definite, validate_positive_vector

logger = logging.getLogger(__name__)

PROB_TOL = 1e-10


def sample_dirichlet(alpha, n: int, rng: np.random.Generator) -> MembershipMatrix:
    """Draw ``n`` i.i.d. Dirichlet(alpha) rows."""
    alpha = validate_positive_vector(alpha, "alpha")
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}", stage="model")

    pi = rng.dirichlet(alpha, size=n)
    # Tiny alphas can underflow every gamma variate of a row; redraw those rows.
    bad = ~np.isfinite(pi).all(axis=1) | (pi.sum(axis=1) <= 0)
    while np.any(bad):
        pi[bad] = rng.dirichlet(alpha, size=int(bad.sum()))
        bad = ~np.isfinite(pi).all(axis=1) | (pi.sum(axis=1) <= 0)

    pi /= pi.sum(axis=1, keepdims=True)
    return MembershipMatrix(pi)


def _eigenbasis(b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of B above the rank tolerance, largest first."""
    check_nonnegative_definite(b)
    eigenvalues, eigenvectors = scipy.linalg.eigh(b)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues, eigenvectors = eigenvalues[order], eigenvectors[:, order]
    if eigenvalues[0] <= 0:
        return np.zeros(0), np.zeros((b.shape[0], 0))
    keep = eigenvalues > RANK_TOL * eigenvalues[0]
    return eigenvalues[keep], eigenvectors[:, keep]


def latent_positions(pi: MembershipMatrix, spec: ModelSpec | np.ndarray) -> LatentPositions:
    """X = Pi U Sigma^{1/2} from the retained eigenpairs of B = U Sigma U^T."""
    b = spec.b_matrix if isinstance(spec, ModelSpec) else np.asarray(spec, dtype=float)
    if pi.k != b.shape[0]:
        raise InvalidParameterError(
            f"memberships have k={pi.k} columns but B is {b.shape[0]}x{b.shape[0]}",
            stage="model",
        )
    eigenvalues, eigenvectors = _eigenbasis(b)
    return LatentPositions(pi.pi @ (eigenvectors * np.sqrt(eigenvalues)))


def true_vertices(spec: ModelSpec) -> np.ndarray:
    """Vertices of the support S: one row of U Sigma^{1/2} per community."""
    return latent_positions(MembershipMatrix(np.eye(spec.k)), spec).x


def edge_probability(pi_i: np.ndarray, pi_j: np.ndarray, b: np.ndarray) -> float:
    """pi_i^T B pi_j."""
    return float(np.asarray(pi_i) @ np.asarray(b) @ np.asarray(pi_j))


def _draw_upper_triangle(
    n: int,
    row_probabilities: Callable[[int, np.ndarray], np.ndarray],
    rng: np.random.Generator,
) -> np.ndarray:
    """Bernoulli-sample pairs (i, j), i < j, row by row."""
    chunks = []
    for i in range(n - 1):
        js = np.arange(i + 1, n)
        p = row_probabilities(i, js)
        hits = js[rng.random(js.shape[0]) < p]
        if hits.size:
            chunks.append(np.column_stack([np.full(hits.size, i), hits]))
    if not chunks:
        return np.zeros((0, 2), dtype=np.int64)
    return np.concatenate(chunks)


def sample_mmsbm(
    spec: ModelSpec,
    n: int,
    rng: np.random.Generator,
    pi: MembershipMatrix | None = None,
) -> GraphSample:
    """Sample an undirected MMSBM graph on ``n`` nodes.

    For each pair i < j both endpoints draw a community for this interaction from
    their own membership vector, and the edge is Bernoulli(B[z_ij, z_ji]). Memberships
    are drawn from Dirichlet(alpha) unless ``pi`` fixes them.
    """
    if n < 2:
        raise InvalidParameterError(f"n must be >= 2, got {n}", stage="model")

    if pi is None:
        pi = sample_dirichlet(spec.alpha_vector, n, rng)
    elif pi.n != n or pi.k != spec.k:
        raise InvalidParameterError(
            f"pi must be {n}x{spec.k}, got {pi.n}x{pi.k}", stage="model"
        )
    b = spec.b_matrix
    cdf = np.cumsum(pi.pi, axis=1)
    cdf[:, -1] = 1.0
    last = spec.k - 1

    def row_probabilities(i: int, js: np.ndarray) -> np.ndarray:
        z_out = np.minimum(
            np.searchsorted(cdf[i], rng.random(js.shape[0]), side="right"), last
        )
        u = rng.random(js.shape[0])
        z_in = np.minimum((u[:, None] >= cdf[js]).sum(axis=1), last)
        return b[z_out, z_in]

    edges = _draw_upper_triangle(n, row_probabilities, rng)
    truth = GroundTruth(x=latent_positions(pi, spec), pi=pi)
    graph = GraphSample(n=n, edges=edges, truth=truth)
    logger.info(f"Sampled MMSBM graph: n={n}, edges={graph.n_edges}, density={graph.density:.4f}")
    return graph


def sample_rdpg(x: LatentPositions, rng: np.random.Generator) -> GraphSample:
    """Sample A_ij ~ Bernoulli(X_i^T X_j) independently for i < j."""
    positions = x.x

    def row_probabilities(i: int, js: np.ndarray) -> np.ndarray:
        p = positions[js] @ positions[i]
        if p.size and (p.min() < -PROB_TOL or p.max() > 1 + PROB_TOL):
            raise InvalidParameterError(
                f"dot products of row {i} leave [0, 1]: "
                f"range [{p.min():.3g}, {p.max():.3g}]",
                stage="model",
            )
        return np.clip(p, 0.0, 1.0)

    edges = _draw_upper_triangle(x.n, row_probabilities, rng)
    graph = GraphSample(n=x.n, edges=edges, truth=GroundTruth(x=x))
    logger.info(f"Sampled RDPG graph: n={x.n}, edges={graph.n_edges}")
    return graph
