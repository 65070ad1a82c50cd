"""Validation helpers for matrices, point clouds and membership rows."""

import logging

import numpy as np
import scipy.linalg

from ..models import (
    NND_TOL,
    RANK_TOL,
    SIMPLEX_TOL,
    DegenerateInputError,
    InvalidParameterError,
    NotNonnegativeDefiniteError,
)

logger = logging.getLogger(__name__)


def check_nonnegative_definite(b: np.ndarray, tol: float = NND_TOL) -> np.ndarray:
    """Return the ascending eigenvalues of ``b``; raise if any is below ``-tol``."""
    eigenvalues = scipy.linalg.eigh(b, eigvals_only=True)
    if eigenvalues[0] < -tol:
        raise NotNonnegativeDefiniteError(float(eigenvalues[0]))
    return eigenvalues


def numerical_rank(b: np.ndarray, tol: float = RANK_TOL) -> int:
    """Count eigenvalues above ``tol`` times the largest eigenvalue."""
    eigenvalues = scipy.linalg.eigh(b, eigvals_only=True)
    top = eigenvalues[-1]
    if top <= 0:
        return 0
    return int(np.sum(eigenvalues > tol * top))


def validate_simplex_rows(pi: np.ndarray, tol: float = SIMPLEX_TOL) -> tuple[bool, list[str]]:
    """Check that every row is non-negative and sums to one."""
    errors: list[str] = []

    if np.any(pi < -tol):
        errors.append(f"{int(np.sum(np.any(pi < -tol, axis=1)))} rows have negative entries")
    drift = np.abs(pi.sum(axis=1) - 1)
    if np.any(drift > tol):
        errors.append(f"row sums deviate from 1 by up to {drift.max():.3g}")

    return len(errors) == 0, errors


def validate_positive_vector(values: np.ndarray, name: str) -> np.ndarray:
    """Return ``values`` as a float array, raising unless every entry is > 0."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise InvalidParameterError(f"{name} must be a non-empty vector")
    if not np.all(values > 0):
        raise InvalidParameterError(f"every {name} component must be > 0, got {values}")
    return values


def check_affine_span(points: np.ndarray, rel_tol: float = 1e-12) -> np.ndarray:
    """Raise unless ``points`` span their full ambient dimension.

    Returns the descending covariance spectrum.
    """
    centered = points - points.mean(axis=0)
    cov = centered.T @ centered / points.shape[0]
    spectrum = scipy.linalg.eigh(cov, eigvals_only=True)[::-1]
    if spectrum[0] <= 0 or spectrum[-1] <= rel_tol * spectrum[0]:
        raise DegenerateInputError(
            "point cloud does not span its ambient space "
            f"(covariance spectrum {spectrum.tolist()})",
            stage="polytope",
            context={"spectrum": spectrum.tolist()},
        )
    return spectrum


def is_symmetric(a, tol: float = 1e-12) -> bool:
    """Symmetry check for dense arrays and scipy sparse matrices."""
    import scipy.sparse

    if scipy.sparse.issparse(a):
        diff = abs(a - a.T)
        return diff.nnz == 0 or diff.max() <= tol
    return bool(np.max(np.abs(a - a.T), initial=0.0) <= tol)
