"""Pytest configuration for mmsbm-spectral tests."""

import numpy as np
import pytest

from mmsbm_spectral.models import MembershipMatrix, ModelSpec
from mmsbm_spectral.tools.sampling import latent_positions


def pytest_addoption(parser):
    """Add custom pytest options."""
    parser.addoption(
        "--run-slow",
        action="store_true",
        default=False,
        help="Run the scaled simulation-study sweeps (tens of minutes)",
    )


def pytest_configure(config):
    """Configure pytest."""
    config.addinivalue_line("markers", "slow: mark test as a long-running simulation study")


def pytest_collection_modifyitems(config, items):
    """Skip tests marked as slow unless --run-slow is provided."""
    if config.getoption("--run-slow"):
        return

    skip_slow = pytest.mark.skip(reason="need --run-slow option to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    """Seeded random stream."""
    return np.random.default_rng(20240611)


@pytest.fixture
def reference_spec():
    """Three-community model with alpha = (1, 1, 1)."""
    return ModelSpec.reference()


@pytest.fixture
def noiseless_positions(reference_spec, rng):
    """True latent positions with the three pure-membership rows appended."""
    pi = rng.dirichlet(np.ones(3), size=500)
    pi = np.vstack([pi, np.eye(3)])
    return MembershipMatrix(pi), latent_positions(MembershipMatrix(pi), reference_spec)
