"""Tests for utility modules."""

import logging

import numpy as np
import pytest
import scipy.sparse

from mmsbm_spectral.config import Settings, ensure_directories, get_run_paths
from mmsbm_spectral.models import (
    DegenerateInputError,
    InvalidParameterError,
    NotNonnegativeDefiniteError,
)
from mmsbm_spectral.utils import fail_fast
from mmsbm_spectral.utils.debug_logger import timed
from mmsbm_spectral.utils.retry import create_solver_retrying
from mmsbm_spectral.utils.validators import (
    check_affine_span,
    check_nonnegative_definite,
    is_symmetric,
    numerical_rank,
    validate_positive_vector,
    validate_simplex_rows,
)


class TestValidators:
    """Matrix and point-cloud validators."""

    def test_nonnegative_definite_accepts_psd(self):
        eigenvalues = check_nonnegative_definite(np.array([[1.0, 0.5], [0.5, 1.0]]))
        np.testing.assert_allclose(eigenvalues, [0.5, 1.5])

    def test_nonnegative_definite_reports_eigenvalue(self):
        with pytest.raises(NotNonnegativeDefiniteError) as info:
            check_nonnegative_definite(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert info.value.eigenvalue == pytest.approx(-1.0)

    def test_numerical_rank(self):
        assert numerical_rank(np.ones((3, 3))) == 1
        assert numerical_rank(np.eye(3)) == 3
        assert numerical_rank(np.zeros((2, 2))) == 0

    def test_simplex_rows(self):
        ok, errors = validate_simplex_rows(np.array([[0.2, 0.8], [1.0, 0.0]]))
        assert ok and errors == []

        ok, errors = validate_simplex_rows(np.array([[-0.1, 1.1], [0.5, 0.6]]))
        assert not ok
        assert len(errors) == 2

    def test_positive_vector(self):
        np.testing.assert_array_equal(validate_positive_vector([1, 2], "alpha"), [1.0, 2.0])
        with pytest.raises(InvalidParameterError, match="alpha"):
            validate_positive_vector([1.0, -1.0], "alpha")

    def test_affine_span_rejects_collinear_points(self):
        t = np.linspace(0, 1, 10)
        with pytest.raises(DegenerateInputError):
            check_affine_span(np.column_stack([t, 2 * t]))

    def test_is_symmetric_dense_and_sparse(self):
        a = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert is_symmetric(a)
        assert is_symmetric(scipy.sparse.csr_matrix(a))
        assert not is_symmetric(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestSolverRetrying:
    """tenacity controller used by the iterative eigensolver."""

    def test_retries_then_succeeds(self):
        attempts = []
        for attempt in create_solver_retrying([RuntimeError], max_attempts=3):
            with attempt:
                attempts.append(attempt.retry_state.attempt_number)
                if len(attempts) < 3:
                    raise RuntimeError("not yet")
        assert attempts == [1, 2, 3]

    def test_reraises_last_error(self):
        with pytest.raises(RuntimeError, match="still failing"):
            for attempt in create_solver_retrying([RuntimeError], max_attempts=2):
                with attempt:
                    raise RuntimeError("still failing")

    def test_other_errors_not_retried(self):
        calls = []
        with pytest.raises(KeyError):
            for attempt in create_solver_retrying([RuntimeError], max_attempts=5):
                with attempt:
                    calls.append(1)
                    raise KeyError("boom")
        assert len(calls) == 1


class TestFailFast:
    """Fail-fast switch for sweep replicates."""

    def teardown_method(self):
        fail_fast.disable_fail_fast()

    def test_disabled_returns_message(self):
        fail_fast.disable_fail_fast()
        message = fail_fast.fail_fast_on_exception(ValueError("bad\nvalue"), "replicate 3")
        assert message == "ValueError: bad value"

    def test_enabled_reraises(self):
        fail_fast.enable_fail_fast()
        with pytest.raises(ValueError):
            fail_fast.fail_fast_on_exception(ValueError("bad"))


def test_timed_records_duration(caplog):
    """timed() stores elapsed seconds and logs at debug level."""
    timings = {}
    with caplog.at_level(logging.DEBUG, logger="mmsbm_spectral.utils.debug_logger"):
        with timed("stage", timings):
            sum(range(1000))
    assert timings["stage"] >= 0.0
    assert "stage" in caplog.text


class TestSettings:
    """Environment-driven numerical settings."""

    def test_defaults(self):
        config = Settings()
        assert config.dense_eig_max_n == 2000
        assert config.eig_tol_factor == 1e-8
        assert config.exhaustive_perm_max_k == 8

    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("MMSBM_DENSE_EIG_MAX_N", "50")
        monkeypatch.setenv("MMSBM_FAIL_FAST_ENABLED", "true")
        config = Settings()
        assert config.dense_eig_max_n == 50
        assert config.fail_fast_enabled is True

    def test_run_paths(self, tmp_path):
        ensure_directories(tmp_path / "run")
        paths = get_run_paths(tmp_path / "run")
        assert paths["matrices"].is_dir()
        assert paths["sweep"].name == "sweep.csv"
