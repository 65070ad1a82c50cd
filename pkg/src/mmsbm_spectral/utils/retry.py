"""Retry utilities with tenacity.

Numerical retries never sleep: a retried solver changes its own parameters
(for example a wider Krylov subspace) on each attempt instead of waiting.
"""

import logging

from tenacity import (
    Retrying,
    before_sleep_log,
    retry_if_exception_type,
    stop_after_attempt,
    wait_none,
)

from ..config import settings

logger = logging.getLogger(__name__)


def create_solver_retrying(
    retry_exceptions: list[type[Exception]],
    max_attempts: int | None = None,
) -> Retrying:
    """
    Create a ``Retrying`` controller for solvers that adapt per attempt.

    Use as ``for attempt in create_solver_retrying(...): with attempt: ...`` and read
    ``attempt.retry_state.attempt_number`` to escalate solver parameters.

    Args:
        retry_exceptions: Exception types that trigger another attempt
        max_attempts: Maximum attempts (default ``settings.eig_retry_attempts``)

    Returns:
        Retrying controller that re-raises the last error when attempts run out
    """
    if max_attempts is None:
        max_attempts = settings.eig_retry_attempts

    return Retrying(
        stop=stop_after_attempt(max_attempts),
        wait=wait_none(),
        retry=retry_if_exception_type(tuple(retry_exceptions)),
        before_sleep=before_sleep_log(logger, logging.WARNING),
        reraise=True,
    )
