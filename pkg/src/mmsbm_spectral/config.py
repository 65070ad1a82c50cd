"""Configuration management using Pydantic settings."""

from pathlib import Path

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Numerical settings loaded from environment variables (prefix ``MMSBM_``).

    Every library function that depends on one of these takes an explicit keyword
    override; when the caller passes nothing the value here is used.

    Note: tolerances are absolute unless the name says otherwise. The eigensolver
    tolerance is relative to the Frobenius norm of the operator.
    """

    model_config = {
        "extra": "ignore",
        "env_prefix": "MMSBM_",
        "env_file": ".env",
        "env_file_encoding": "utf-8",
    }

    # Development settings
    fail_fast_enabled: bool = False
    log_level: str = "INFO"

    # Eigensolver
    dense_eig_max_n: int = 2000  # dense eigh at or below this size
    eig_max_iter: int = 10000
    eig_tol_factor: float = 1e-8  # residual bound, times ||A||_F
    eig_retry_attempts: int = 3  # ARPACK restarts with a wider Krylov space

    # Graph storage
    densify_max_n: int = 20000

    # Minimum-volume enclosing polytope
    mvecp_max_passes: int = 500
    mvecp_rel_tol: float = 1e-6  # relative volume improvement per pass
    mvecp_initial_angle: float = 0.1  # radians
    mvecp_min_angle: float = 1e-6
    containment_tol: float = 1e-9

    # Dirichlet maximum likelihood
    dirichlet_max_iter: int = 500
    dirichlet_grad_tol: float = 1e-10
    dirichlet_alpha_ceiling: float = 1e6
    dirichlet_clip_floor: float = 1e-10

    # Permutation matching
    exhaustive_perm_max_k: int = 8

    # Diagnostics
    symdiff_samples: int = 200_000

    # Sweeps
    default_jobs: int = 1


def get_run_paths(out_dir: str | Path) -> dict[str, Path]:
    """Get standardized output paths for a run directory."""
    base_dir = Path(out_dir)

    return {
        "base": base_dir,
        "graph": base_dir / "graph.txt",
        "pi": base_dir / "pi.csv",
        "x": base_dir / "x.csv",
        "result": base_dir / "result.json",
        "matrices": base_dir / "matrices",
        "sweep": base_dir / "sweep.csv",
        "summary": base_dir / "summary.csv",
    }


def ensure_directories(out_dir: str | Path) -> None:
    """Create the run directory tree."""
    paths = get_run_paths(out_dir)
    paths["base"].mkdir(parents=True, exist_ok=True)
    paths["matrices"].mkdir(parents=True, exist_ok=True)


# Global settings instance
settings = Settings()


def get_config() -> Settings:
    """Get the global configuration instance."""
    return settings
