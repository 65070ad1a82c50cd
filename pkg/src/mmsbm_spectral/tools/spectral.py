"""Adjacency spectral embedding, PCA frame and orthogonal Procrustes alignment."""

import logging
from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from ..config import get_config
from ..models import (
    EigenSolverError,
    Embedding,
    GraphSample,
    InvalidParameterError,
    PcaFrame,
    Polytope,
)
from ..utils.retry import create_solver_retrying
from ..utils.validators import is_symmetric

logger = logging.getLogger(__name__)


class EigenPairs(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray
    residual: float


class ProcrustesFit(NamedTuple):
    rotation: np.ndarray
    max_row_error: float


def _magnitude_order(eigenvalues: np.ndarray) -> np.ndarray:
    # Largest |lambda| first; equal magnitudes keep the algebraically larger first.
    return np.lexsort((-eigenvalues, -np.abs(eigenvalues)))


def _frobenius(sym) -> float | None:
    if isinstance(sym, np.ndarray):
        return float(np.linalg.norm(sym))
    if scipy.sparse.issparse(sym):
        return float(scipy.sparse.linalg.norm(sym))
    return None


def _residuals(sym, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    product = sym @ vectors
    return np.linalg.norm(product - vectors * values, axis=0)


def _arpack_topk(sym, d: int, max_iter: int, tol: float) -> tuple[np.ndarray, np.ndarray]:
    n = sym.shape[0]
    v0 = np.random.default_rng(0).standard_normal(n)
    base_ncv = max(2 * d + 1, 20)
    for attempt in create_solver_retrying([scipy.sparse.linalg.ArpackNoConvergence]):
        with attempt:
            ncv = min(n - 1, base_ncv * attempt.retry_state.attempt_number)
            logger.debug(f"eigsh attempt {attempt.retry_state.attempt_number}: ncv={ncv}")
            return scipy.sparse.linalg.eigsh(
                sym, k=d, which="LM", v0=v0, ncv=ncv, maxiter=max_iter, tol=tol
            )
    raise AssertionError("unreachable")


def eigen_topk_by_magnitude(
    sym,
    d: int,
    *,
    dense_max_n: int | None = None,
    max_iter: int | None = None,
    tol_factor: float | None = None,
) -> EigenPairs:
    """Return the ``d`` eigenpairs of a symmetric operator largest in magnitude.

    Eigenvalues keep their sign and come in decreasing magnitude order. Dense
    matrices up to ``dense_max_n`` rows use a full symmetric decomposition; larger
    inputs (and scipy sparse matrices or ``LinearOperator`` objects above that size)
    use implicitly restarted Lanczos.

    Raises:
        InvalidParameterError: if ``d`` is not in ``[1, n)`` or the input is not
            symmetric.
        EigenSolverError: if the solver does not converge or a residual
            ``||A v - lambda v||`` exceeds ``tol_factor * ||A||_F``.
    """
    config = get_config()
    dense_max_n = dense_max_n if dense_max_n is not None else config.dense_eig_max_n
    max_iter = max_iter if max_iter is not None else config.eig_max_iter
    tol_factor = tol_factor if tol_factor is not None else config.eig_tol_factor

    n = sym.shape[0]
    if sym.shape != (n, n):
        raise InvalidParameterError(f"operator must be square, got {sym.shape}")
    if not 1 <= d < n:
        raise InvalidParameterError(f"need 1 <= d < n, got d={d}, n={n}", stage="embedding")
    is_operator = isinstance(sym, scipy.sparse.linalg.LinearOperator)
    if not is_operator:
        scale = 1.0 + float(abs(sym).max()) if n else 1.0
        if not is_symmetric(sym, tol=1e-10 * scale):
            raise InvalidParameterError("operator is not symmetric", stage="embedding")

    if n <= dense_max_n and not is_operator:
        dense = sym.toarray() if scipy.sparse.issparse(sym) else np.asarray(sym, dtype=float)
        values, vectors = scipy.linalg.eigh(dense)
    else:
        try:
            values, vectors = _arpack_topk(sym, d, max_iter, tol_factor * 1e-2)
        except scipy.sparse.linalg.ArpackNoConvergence as e:
            worst = np.inf
            if e.eigenvectors is not None and len(e.eigenvalues):
                worst = float(_residuals(sym, e.eigenvalues, e.eigenvectors).max())
            raise EigenSolverError(
                f"eigsh did not converge after {max_iter} iterations", worst_residual=worst
            ) from e

    order = _magnitude_order(values)[:d]
    values, vectors = values[order], vectors[:, order]

    residual = float(_residuals(sym, values, vectors).max())
    frobenius = _frobenius(sym)
    if frobenius is None:
        frobenius = float(np.linalg.norm(values))
    if residual > tol_factor * max(frobenius, np.finfo(float).tiny):
        raise EigenSolverError(
            f"eigen-residual {residual:.3g} exceeds {tol_factor:g} * ||A||_F",
            worst_residual=residual,
        )
    return EigenPairs(values, vectors, residual)


def embed_matrix(sym, d: int, **solver_options) -> Embedding:
    """Spectral embedding U |S|^{1/2} of any symmetric matrix."""
    pairs = eigen_topk_by_magnitude(sym, d, **solver_options)
    xhat = pairs.vectors * np.sqrt(np.abs(pairs.values))
    return Embedding(xhat=xhat, eigenvalues=pairs.values, residual=pairs.residual)


def spectral_embed(g: GraphSample, d: int, **solver_options) -> Embedding:
    """Adjacency spectral embedding of ``g`` into R^d."""
    if not 1 <= d < g.n:
        raise InvalidParameterError(
            f"need 1 <= d < n, got d={d}, n={g.n}", stage="embedding"
        )
    dense_max_n = solver_options.get("dense_max_n", get_config().dense_eig_max_n)
    adjacency = g.to_dense() if g.n <= dense_max_n else g.to_sparse()
    embedding = embed_matrix(adjacency, d, **solver_options)
    logger.info(
        f"ASE: n={g.n}, d={d}, eigenvalues={np.round(embedding.eigenvalues, 4).tolist()}, "
        f"residual={embedding.residual:.2e}"
    )
    return embedding


def pca_project(e: Embedding | np.ndarray) -> tuple[np.ndarray, PcaFrame]:
    """Project the embedding onto its d-1 principal components.

    Returns ``(xtilde, frame)`` with ``xtilde = (xhat - mean) @ basis`` and the
    covariance computed with divisor n.
    """
    xhat = e.xhat if isinstance(e, Embedding) else np.asarray(e, dtype=float)
    n, d = xhat.shape
    if d < 2:
        raise InvalidParameterError("PCA step needs d >= 2", stage="embedding")

    mean = xhat.mean(axis=0)
    centered = xhat - mean
    covariance = centered.T @ centered / n
    values, vectors = scipy.linalg.eigh(covariance)
    values, vectors = values[::-1], vectors[:, ::-1]
    basis = vectors[:, : d - 1]
    # Orient each component so the projected cloud has non-negative third moment.
    skew = ((centered @ basis) ** 3).sum(axis=0)
    basis = basis * np.where(skew < 0, -1.0, 1.0)

    frame = PcaFrame(
        mean=mean,
        basis=basis,
        spectrum=np.clip(values[: d - 1], 0.0, None),
        dropped=values[d - 1 :],
    )
    return centered @ frame.basis, frame


def pca_project_points(points: np.ndarray, frame: PcaFrame) -> np.ndarray:
    """Coordinates of R^d points in an existing PCA frame."""
    return (np.atleast_2d(points) - frame.mean) @ frame.basis


def pca_reconstruct(poly: Polytope, frame: PcaFrame) -> Polytope:
    """Map a polytope in PCA coordinates back to R^d: v -> basis v + mean."""
    if poly.ambient_dim != frame.basis.shape[1]:
        raise InvalidParameterError(
            f"polytope lives in R^{poly.ambient_dim}, frame expects "
            f"R^{frame.basis.shape[1]}",
            stage="embedding",
        )
    return Polytope(poly.vertices @ frame.basis.T + frame.mean)


def procrustes_align(a: np.ndarray, b: np.ndarray) -> ProcrustesFit:
    """Orthogonal W minimizing ||a W - b||_F, and the worst row error after alignment."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise InvalidParameterError(f"shape mismatch: {a.shape} vs {b.shape}")

    u, _, vt = np.linalg.svd(a.T @ b)
    w = u @ vt
    error = float(np.linalg.norm(a @ w - b, axis=1).max())
    return ProcrustesFit(w, error)
