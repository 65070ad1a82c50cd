"""Label matching under the S_k gauge, and Euclidean projection onto the simplex."""

import itertools
import logging
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..config import get_config
from ..models import InvalidParameterError

logger = logging.getLogger(__name__)


class PermutationMatch(NamedTuple):
    permutation: np.ndarray
    error: float
    exhaustive: bool


def permute_matrix(m: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Row-column permutation M^(rho)_ij = M_rho(i) rho(j)."""
    return m[np.ix_(rho, rho)]


def match_permutation(
    b_hat: np.ndarray, b: np.ndarray, exhaustive_max_k: int | None = None
) -> PermutationMatch:
    """Minimize ||B_hat^(rho) - B||_F over rho in S_k.

    Exhaustive for k up to ``exhaustive_max_k``; above that a row-signature assignment
    is used and ``exhaustive`` is False.
    """
    b_hat, b = np.asarray(b_hat, float), np.asarray(b, float)
    if b_hat.shape != b.shape or b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise InvalidParameterError(f"shape mismatch: {b_hat.shape} vs {b.shape}")
    if exhaustive_max_k is None:
        exhaustive_max_k = get_config().exhaustive_perm_max_k
    k = b.shape[0]

    if k <= exhaustive_max_k:
        best_error, best = np.inf, None
        for rho in itertools.permutations(range(k)):
            rho = np.array(rho)
            error = np.linalg.norm(permute_matrix(b_hat, rho) - b)
            if error < best_error:
                best_error, best = error, rho
        return PermutationMatch(best, float(best_error), True)

    # Sorted rows are invariant to relabeling, so they pair communities up to ties.
    signature_hat = np.sort(b_hat, axis=1)
    signature = np.sort(b, axis=1)
    cost = (
        (signature[:, None, :] - signature_hat[None, :, :]) ** 2
    ).sum(axis=2) + (np.diag(b)[:, None] - np.diag(b_hat)[None, :]) ** 2
    rows, cols = linear_sum_assignment(cost)
    rho = cols[np.argsort(rows)]
    error = float(np.linalg.norm(permute_matrix(b_hat, rho) - b))
    logger.debug(f"Heuristic permutation match for k={k}: error={error:.6g}")
    return PermutationMatch(rho, error, False)


def match_vertices(
    v_hat: np.ndarray, v_true: np.ndarray, exhaustive_max_k: int | None = None
) -> PermutationMatch:
    """Permutation rho minimizing max_j ||v_hat[rho(j)] - v_true[j]||."""
    v_hat, v_true = np.atleast_2d(v_hat), np.atleast_2d(v_true)
    if v_hat.shape != v_true.shape:
        raise InvalidParameterError(f"shape mismatch: {v_hat.shape} vs {v_true.shape}")
    if exhaustive_max_k is None:
        exhaustive_max_k = get_config().exhaustive_perm_max_k
    k = v_true.shape[0]
    distances = np.linalg.norm(v_true[:, None, :] - v_hat[None, :, :], axis=2)

    if k <= exhaustive_max_k:
        best_error, best = np.inf, None
        for rho in itertools.permutations(range(k)):
            rho = np.array(rho)
            error = distances[np.arange(k), rho].max()
            if error < best_error:
                best_error, best = error, rho
        return PermutationMatch(best, float(best_error), True)

    rows, cols = linear_sum_assignment(distances**2)
    rho = cols[np.argsort(rows)]
    return PermutationMatch(rho, float(distances[np.arange(k), rho].max()), False)


def vertex_error(v_hat: np.ndarray, v_true: np.ndarray) -> float:
    """Largest vertex displacement after the best vertex matching."""
    return match_vertices(v_hat, v_true).error


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row of ``v`` onto the probability simplex."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    k = v.shape[1]
    u = -np.sort(-v, axis=1)
    cumulative = np.cumsum(u, axis=1) - 1.0
    index = np.arange(1, k + 1)
    support = u - cumulative / index > 0
    rank = k - np.argmax(support[:, ::-1], axis=1)
    theta = cumulative[np.arange(v.shape[0]), rank - 1] / rank
    return np.maximum(v - theta[:, None], 0.0)
