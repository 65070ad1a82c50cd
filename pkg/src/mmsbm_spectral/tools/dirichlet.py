"""Dirichlet maximum likelihood by damped Newton iteration.

The Hessian of the Dirichlet log-likelihood is diag(-trigamma(alpha)) plus a rank-one
term trigamma(sum(alpha)) 1 1^T, so each Newton step is solved in O(k) with the
Sherman-Morrison identity.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import digamma, gammaln, polygamma

from ..config import get_config
from ..models import InvalidParameterError, NonConvergenceError

logger = logging.getLogger(__name__)

MAX_HALVINGS = 60
ASCENT_SLACK = 1e-14


@dataclass
class DirichletFit:
    """Result of ``fit_dirichlet``."""

    alpha: np.ndarray
    iterations: int
    log_likelihood: float
    trace: list[float] = field(default_factory=list)
    clipped_entries: int = 0


def clip_memberships(pi: np.ndarray, floor: float) -> tuple[np.ndarray, int]:
    """Raise entries below ``floor`` to ``floor`` and renormalize rows."""
    clipped = int(np.count_nonzero(pi < floor))
    safe = np.maximum(pi, floor)
    return safe / safe.sum(axis=1, keepdims=True), clipped


def mean_log_likelihood(alpha: np.ndarray, mean_log: np.ndarray) -> float:
    """Per-row Dirichlet log-likelihood from the sufficient statistic mean(log pi)."""
    return float(
        gammaln(alpha.sum()) - gammaln(alpha).sum() + ((alpha - 1.0) * mean_log).sum()
    )


def dirichlet_log_likelihood(alpha: np.ndarray, pi: np.ndarray) -> float:
    """Total log-likelihood of the rows of ``pi`` under Dirichlet(alpha)."""
    pi = np.asarray(pi, dtype=float)
    return pi.shape[0] * mean_log_likelihood(np.asarray(alpha, float), np.log(pi).mean(axis=0))


def moment_match(pi: np.ndarray, ceiling: float) -> np.ndarray:
    """Method-of-moments start: alpha = s * mean, s from per-coordinate variances."""
    mean = pi.mean(axis=0)
    second = (pi**2).mean(axis=0)
    variance = second - mean**2
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = (mean - second) / variance
    precision = precision[np.isfinite(precision) & (precision > 0)]
    s = float(np.median(precision)) if precision.size else ceiling
    return np.maximum(s * mean, 1e-3)


def fit_dirichlet(
    pi_hat: np.ndarray,
    *,
    max_iter: int | None = None,
    grad_tol: float | None = None,
    alpha_ceiling: float | None = None,
    clip_floor: float | None = None,
) -> DirichletFit:
    """Maximize the Dirichlet log-likelihood of the rows of ``pi_hat``.

    Raises:
        InvalidParameterError: fewer than two rows.
        NonConvergenceError: the gradient did not reach ``grad_tol`` within
            ``max_iter`` iterations, or sum(alpha) passed ``alpha_ceiling``.
    """
    config = get_config()
    max_iter = max_iter if max_iter is not None else config.dirichlet_max_iter
    grad_tol = grad_tol if grad_tol is not None else config.dirichlet_grad_tol
    alpha_ceiling = alpha_ceiling if alpha_ceiling is not None else config.dirichlet_alpha_ceiling
    clip_floor = clip_floor if clip_floor is not None else config.dirichlet_clip_floor

    pi_hat = np.asarray(pi_hat, dtype=float)
    if pi_hat.ndim != 2 or pi_hat.shape[0] < 2:
        raise InvalidParameterError("need at least two membership rows", stage="estimation")

    pi, clipped = clip_memberships(pi_hat, clip_floor)
    if clipped:
        logger.warning(f"Dirichlet MLE: clipped {clipped} entries below {clip_floor:g}")
    mean_log = np.log(pi).mean(axis=0)

    alpha = moment_match(pi, alpha_ceiling)
    current = mean_log_likelihood(alpha, mean_log)
    trace = [current]

    for iteration in range(1, max_iter + 1):
        if alpha.sum() > alpha_ceiling:
            raise NonConvergenceError(
                f"sum(alpha) exceeded the ceiling {alpha_ceiling:g}",
                iterations=iteration - 1,
                trace_length=len(trace),
            )
        gradient = digamma(alpha.sum()) - digamma(alpha) + mean_log
        if np.max(np.abs(gradient)) < grad_tol:
            logger.info(f"Dirichlet MLE converged in {iteration - 1} iterations: {alpha}")
            return DirichletFit(alpha, iteration - 1, current, trace, clipped)

        q = -polygamma(1, alpha)
        z = polygamma(1, alpha.sum())
        b = np.sum(gradient / q) / (1.0 / z + np.sum(1.0 / q))
        step = (gradient - b) / q

        scale = 1.0
        for _ in range(MAX_HALVINGS):
            proposal = alpha - scale * step
            if np.all(proposal > 0):
                value = mean_log_likelihood(proposal, mean_log)
                if value >= current - ASCENT_SLACK * max(1.0, abs(current)):
                    break
            scale /= 2
        else:
            raise NonConvergenceError(
                "no ascent step found", iterations=iteration, trace_length=len(trace)
            )

        alpha, current = proposal, value
        trace.append(current)
        logger.debug(f"Dirichlet MLE iter {iteration}: alpha={alpha}, ll={current:.12g}")

    raise NonConvergenceError(
        f"Dirichlet MLE did not converge in {max_iter} iterations",
        iterations=max_iter,
        trace_length=len(trace),
    )


def dirichlet_mle(pi_hat: np.ndarray, **options) -> np.ndarray:
    """Maximum likelihood alpha for the rows of ``pi_hat``."""
    return fit_dirichlet(pi_hat, **options).alpha
