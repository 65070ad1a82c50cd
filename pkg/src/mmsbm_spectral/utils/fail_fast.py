"""Fail-fast switch for sweeps.

With fail-fast disabled a failing replicate is recorded and the sweep continues;
with it enabled the exception propagates and aborts the run.
"""

import logging

logger = logging.getLogger(__name__)

# When set, sweep replicates re-raise instead of recording an error row
FAIL_FAST_ENABLED = False


def enable_fail_fast() -> None:
    """Make failing replicates abort the sweep."""
    global FAIL_FAST_ENABLED
    FAIL_FAST_ENABLED = True
    logger.debug("Fail-fast on: replicate errors propagate")


def disable_fail_fast() -> None:
    """Record failing replicates and keep sweeping."""
    global FAIL_FAST_ENABLED
    FAIL_FAST_ENABLED = False
    logger.debug("Fail-fast off: replicate errors are recorded")


def fail_fast_on_exception(exc: Exception, context: str | None = None) -> str:
    """Handle a replicate failure.

    Args:
        exc: The exception raised by the replicate
        context: Optional context string for logging

    Returns:
        A one-line description suitable for the sweep's ``error`` column

    Raises:
        The original exception when fail-fast is enabled
    """
    message = f"{type(exc).__name__}: {exc}"
    where = f" in {context}" if context else ""

    if FAIL_FAST_ENABLED:
        logger.error(f"Fail-fast enabled, raising exception{where}: {message}")
        raise exc

    logger.warning(f"Error occurred{where}: {message}")
    return message.replace("\n", " ")
