"""Debug logging utilities for pipeline monitoring."""

import logging
import time
from collections.abc import Iterator
from contextlib import contextmanager

logger = logging.getLogger(__name__)


def log_step(step_name: str, **kwargs) -> None:
    """Log a pipeline step with context."""
    logger.debug(f"Step: {step_name} - {kwargs}")


@contextmanager
def timed(step_name: str, timings: dict[str, float] | None = None) -> Iterator[None]:
    """Time a block, log it, and optionally record seconds under ``step_name``."""
    start = time.perf_counter()
    try:
        yield
    finally:
        elapsed = time.perf_counter() - start
        if timings is not None:
            timings[step_name] = elapsed
        logger.debug(f"Step: {step_name} took {elapsed:.4f}s")
