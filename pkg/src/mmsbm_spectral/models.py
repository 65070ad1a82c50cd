"""Data models and error types for spectral MMSBM estimation.

Configuration-facing objects (model specifications, shrink policies, experiment
configs, serialized reports) are Pydantic models. Array containers that flow through
the numerical pipeline are plain dataclasses around numpy arrays.
"""

from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Reference three-community block matrix used throughout the simulation studies.
REFERENCE_B: list[list[float]] = [
    [0.9, 0.2, 0.3],
    [0.2, 0.9, 0.5],
    [0.3, 0.5, 0.9],
]

SYMMETRY_TOL = 1e-12
NND_TOL = 1e-10
RANK_TOL = 1e-10
SIMPLEX_TOL = 1e-12


class MmsbmError(Exception):
    """Base exception for estimation failures."""

    def __init__(self, message: str, stage: str = "", context: dict | None = None):
        super().__init__(message)
        self.stage = stage
        self.context = context or {}


class InvalidParameterError(MmsbmError, ValueError):
    """Raised when an argument is outside its documented domain."""

    pass


class DegenerateInputError(MmsbmError):
    """Raised when a point cloud or simplex is rank deficient."""

    pass


class NotNonnegativeDefiniteError(MmsbmError, ValueError):
    """Raised when B has an eigenvalue below the non-negativity tolerance."""

    def __init__(self, eigenvalue: float, stage: str = "model"):
        super().__init__(
            f"B is not non-negative definite: eigenvalue {eigenvalue:.6g} < -{NND_TOL:g}",
            stage=stage,
            context={"eigenvalue": eigenvalue},
        )
        self.eigenvalue = eigenvalue


class EigenSolverError(MmsbmError):
    """Raised when the eigensolver fails to meet its residual contract."""

    def __init__(self, message: str, worst_residual: float, stage: str = "embedding"):
        super().__init__(message, stage=stage, context={"worst_residual": worst_residual})
        self.worst_residual = worst_residual


class NonConvergenceError(MmsbmError):
    """Raised when an iterative estimator stops without converging."""

    def __init__(
        self, message: str, iterations: int, trace_length: int, stage: str = "estimation"
    ):
        super().__init__(
            message,
            stage=stage,
            context={"iterations": iterations, "trace_length": trace_length},
        )
        self.iterations = iterations
        self.trace_length = trace_length


class ConfigError(MmsbmError):
    """Raised when an experiment configuration cannot be loaded."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message, stage="config", context={"field": field})
        self.field = field


class EdgeListParseError(MmsbmError):
    """Raised when an edge-list file is malformed."""

    def __init__(self, message: str, line_number: int):
        super().__init__(
            f"line {line_number}: {message}",
            stage="storage",
            context={"line_number": line_number},
        )
        self.line_number = line_number


class ModelSpec(BaseModel):
    """Generative parameters (k, d, B, alpha) of an undirected MMSBM.

    ``d`` may be left out, in which case it is set to the numerical rank of B.
    """

    k: int = Field(gt=0)
    d: int | None = None
    B: list[list[float]]
    alpha: list[float]

    @field_validator("alpha")
    @classmethod
    def _alpha_positive(cls, value: list[float]) -> list[float]:
        if any(not a > 0 for a in value):
            raise ValueError(f"every alpha component must be > 0, got {value}")
        return value

    @model_validator(mode="after")
    def _check_b(self) -> "ModelSpec":
        from .utils.validators import check_nonnegative_definite, numerical_rank

        b = np.asarray(self.B, dtype=float)
        if b.shape != (self.k, self.k):
            raise ValueError(f"B must be {self.k}x{self.k}, got shape {b.shape}")
        if len(self.alpha) != self.k:
            raise ValueError(f"alpha must have {self.k} components")
        if not np.all(np.isfinite(b)):
            raise ValueError("B has non-finite entries")
        if np.max(np.abs(b - b.T)) > SYMMETRY_TOL:
            raise ValueError("B is not symmetric")
        if b.min() < 0 or b.max() > 1:
            raise ValueError("B entries must lie in [0, 1]")
        check_nonnegative_definite(b)
        rank = numerical_rank(b)
        if self.d is None:
            self.d = rank
        elif self.d != rank:
            raise ValueError(f"d={self.d} but B has numerical rank {rank}")
        return self

    @property
    def b_matrix(self) -> np.ndarray:
        return np.asarray(self.B, dtype=float)

    @property
    def alpha_vector(self) -> np.ndarray:
        return np.asarray(self.alpha, dtype=float)

    @classmethod
    def reference(cls, alpha: list[float] | None = None) -> "ModelSpec":
        """The three-community model used in the simulation studies."""
        return cls(k=3, B=REFERENCE_B, alpha=alpha or [1.0, 1.0, 1.0])


@dataclass
class MembershipMatrix:
    """Rows pi_1..pi_n, each on the standard (k-1)-simplex."""

    pi: np.ndarray

    def __post_init__(self) -> None:
        from .utils.validators import validate_simplex_rows

        self.pi = np.atleast_2d(np.asarray(self.pi, dtype=float))
        ok, errors = validate_simplex_rows(self.pi)
        if not ok:
            raise InvalidParameterError(
                "membership rows must be non-negative and sum to 1: " + "; ".join(errors),
                stage="model",
            )

    @property
    def n(self) -> int:
        return self.pi.shape[0]

    @property
    def k(self) -> int:
        return self.pi.shape[1]


@dataclass
class LatentPositions:
    """Rows X_1..X_n of an RDPG; P = X X^T is never stored."""

    x: np.ndarray

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=float)
        if self.x.ndim == 1:
            self.x = self.x[:, None]

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


@dataclass
class GroundTruth:
    """Latent positions retained by a sampler, with memberships when they exist."""

    x: LatentPositions
    pi: MembershipMatrix | None = None


@dataclass
class GraphSample:
    """Symmetric hollow graph stored as sorted upper-triangle pairs (0-based)."""

    n: int
    edges: np.ndarray
    truth: GroundTruth | None = None

    def __post_init__(self) -> None:
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if np.any(edges[:, 0] >= edges[:, 1]):
                raise InvalidParameterError(
                    "edges must satisfy i < j (no self-loops)", stage="model"
                )
            if edges.min() < 0 or edges.max() >= self.n:
                raise InvalidParameterError("edge endpoint out of range", stage="model")
            keys = edges[:, 0] * self.n + edges[:, 1]
            if np.any(np.diff(keys) <= 0):
                order = np.argsort(keys, kind="stable")
                edges, keys = edges[order], keys[order]
                if np.any(np.diff(keys) == 0):
                    raise InvalidParameterError("duplicate edges", stage="model")
        self.edges = edges

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def density(self) -> float:
        return self.n_edges / (self.n * (self.n - 1) / 2)

    def to_sparse(self):
        """Symmetric adjacency as a scipy CSR matrix."""
        import scipy.sparse

        rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        data = np.ones(rows.shape[0], dtype=float)
        return scipy.sparse.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def to_dense(self, max_n: int | None = None) -> np.ndarray:
        """Dense symmetric adjacency; refused above ``densify_max_n`` nodes."""
        from .config import get_config

        limit = max_n if max_n is not None else get_config().densify_max_n
        if self.n > limit:
            raise InvalidParameterError(
                f"refusing to densify a graph with n={self.n} > {limit}", stage="model"
            )
        a = np.zeros((self.n, self.n))
        a[self.edges[:, 0], self.edges[:, 1]] = 1.0
        a[self.edges[:, 1], self.edges[:, 0]] = 1.0
        return a

    def relabel(self, perm: np.ndarray) -> "GraphSample":
        """Return the graph with node ``i`` renamed ``perm[i]``."""
        perm = np.asarray(perm)
        mapped = perm[self.edges]
        mapped = np.sort(mapped, axis=1)
        truth = None
        if self.truth is not None:
            inverse = np.argsort(perm)
            pi = self.truth.pi
            truth = GroundTruth(
                x=LatentPositions(self.truth.x.x[inverse]),
                pi=None if pi is None else MembershipMatrix(pi.pi[inverse]),
            )
        return GraphSample(n=self.n, edges=mapped, truth=truth)


@dataclass
class Embedding:
    """Adjacency spectral embedding U_A |S_A|^{1/2}."""

    xhat: np.ndarray
    eigenvalues: np.ndarray
    residual: float

    @property
    def n(self) -> int:
        return self.xhat.shape[0]

    @property
    def d(self) -> int:
        return self.xhat.shape[1]


@dataclass
class PcaFrame:
    """Mean, orthonormal basis and spectrum of the (d-1) principal components."""

    mean: np.ndarray
    basis: np.ndarray
    spectrum: np.ndarray
    dropped: np.ndarray = field(default_factory=lambda: np.zeros(0))


@dataclass
class Polytope:
    """Ordered vertex list in R^m; a simplex when k = m + 1."""

    vertices: np.ndarray

    def __post_init__(self) -> None:
        self.vertices = np.asarray(self.vertices, dtype=float)
        if self.vertices.ndim == 1:
            self.vertices = self.vertices[:, None]
        if self.vertices.shape[0] < 2:
            raise InvalidParameterError("a polytope needs at least 2 vertices")
        if not np.all(np.isfinite(self.vertices)):
            raise InvalidParameterError("polytope vertices must be finite")

    @property
    def k(self) -> int:
        return self.vertices.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def is_simplex(self) -> bool:
        return self.k == self.ambient_dim + 1

    @property
    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)


class ShrinkPolicy(BaseModel):
    """How far to contract the fitted polytope: none, a fixed eta, or a rate."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["none", "fixed", "rate"] = "none"
    value: float = 1.0

    @model_validator(mode="after")
    def _check_value(self) -> "ShrinkPolicy":
        if self.kind == "fixed" and not 0 <= self.value <= 1:
            raise ValueError(f"fixed eta must lie in [0, 1], got {self.value}")
        if self.kind == "rate" and self.value < 0:
            raise ValueError(f"rate constant must be >= 0, got {self.value}")
        return self

    @classmethod
    def parse(cls, text: str) -> "ShrinkPolicy":
        """Parse ``none``, ``fixed:<eta>``, ``rate:<a>`` or ``rate:auto``."""
        from .tools.polytope import A_STAR

        kind, _, raw = text.strip().partition(":")
        kind = kind.lower()
        if kind == "none":
            return cls(kind="none", value=1.0)
        if kind not in ("fixed", "rate") or not raw:
            raise InvalidParameterError(
                f"unknown shrink policy {text!r}; expected none, fixed:<eta> or rate:<a>"
            )
        if kind == "rate" and raw.lower() == "auto":
            return cls(kind="rate", value=A_STAR)
        try:
            value = float(raw)
        except ValueError as e:
            raise InvalidParameterError(f"bad shrink policy value in {text!r}") from e
        return cls(kind=kind, value=value)

    def eta(self, n: int) -> float:
        """Shrink factor for a graph on ``n`` nodes."""
        from .tools.polytope import shrink_factor

        if self.kind == "none":
            return 1.0
        if self.kind == "fixed":
            return self.value
        return shrink_factor(n, self.value)

    def label(self) -> str:
        from .tools.polytope import A_STAR

        if self.kind == "none":
            return "none"
        if self.kind == "rate" and self.value == A_STAR:
            return "rate:auto"
        return f"{self.kind}:{self.value!r}"


@dataclass
class EstimationResult:
    """Output of the five-step spectral estimator."""

    b_hat: np.ndarray
    pi_hat: np.ndarray | None
    alpha_hat: np.ndarray | None
    s_hat: Polytope
    s_hat_raw: Polytope
    frame: PcaFrame | None
    eta: float
    policy: ShrinkPolicy
    xhat: np.ndarray
    diagnostics: dict[str, float] = field(default_factory=dict)
    embedding: Embedding | None = None

    @property
    def k(self) -> int:
        return self.b_hat.shape[0]

    @property
    def n(self) -> int:
        return self.xhat.shape[0]

    @property
    def d(self) -> int:
        return self.xhat.shape[1]

    @property
    def community_vertices(self) -> np.ndarray:
        """The k points whose Gram matrix is B_hat."""
        if self.s_hat.k == self.k:
            return self.s_hat.vertices
        return self.s_hat.centroid[None, :]

    def to_report(self) -> "EstimationReport":
        frame = None
        if self.frame is not None:
            frame = {
                "mean": self.frame.mean.tolist(),
                "basis": self.frame.basis.tolist(),
                "spectrum": self.frame.spectrum.tolist(),
            }
        return EstimationReport(
            n=self.n,
            k=self.k,
            d=self.d,
            policy=self.policy.label(),
            eta=self.eta,
            b_hat=self.b_hat.tolist(),
            pi_hat=None if self.pi_hat is None else self.pi_hat.tolist(),
            alpha_hat=None if self.alpha_hat is None else self.alpha_hat.tolist(),
            s_hat=self.s_hat.vertices.tolist(),
            s_hat_raw=self.s_hat_raw.vertices.tolist(),
            frame=frame,
            diagnostics=dict(self.diagnostics),
        )


class EstimationReport(BaseModel):
    """JSON form of an estimation result (matrices row-major)."""

    n: int
    k: int
    d: int
    policy: str
    eta: float
    b_hat: list[list[float]]
    pi_hat: list[list[float]] | None = None
    alpha_hat: list[float] | None = None
    s_hat: list[list[float]]
    s_hat_raw: list[list[float]]
    frame: dict[str, Any] | None = None
    diagnostics: dict[str, float] = Field(default_factory=dict)


class ExperimentConfig(BaseModel):
    """Sweep protocol: model, node-count grid, replicates and shrink policies."""

    model: ModelSpec = Field(default_factory=ModelSpec.reference)
    n_grid: list[int] = Field(default_factory=lambda: [100, 500, 1000, 5000, 10000])
    replicates: int = Field(default=100, ge=1)
    policies: list[ShrinkPolicy] = Field(
        default_factory=lambda: [
            ShrinkPolicy(kind="none"),
            ShrinkPolicy(kind="fixed", value=0.9),
            ShrinkPolicy.parse("rate:auto"),
        ]
    )
    alpha_panels: list[list[float]] | None = None
    seed: int = 0
    output: str = "runs/sweep"
    jobs: int | None = None
    symdiff: bool = False

    @field_validator("policies", mode="before")
    @classmethod
    def _parse_policies(cls, value: Any) -> Any:
        if isinstance(value, list):
            return [ShrinkPolicy.parse(v) if isinstance(v, str) else v for v in value]
        return value

    @field_validator("n_grid")
    @classmethod
    def _check_grid(cls, value: list[int]) -> list[int]:
        if not value:
            raise ValueError("n_grid must not be empty")
        if value[0] < 2:
            raise ValueError("every n must be >= 2")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("n_grid must be strictly increasing")
        return value

    @model_validator(mode="after")
    def _check_panels(self) -> "ExperimentConfig":
        for panel in self.alpha_panels or []:
            if len(panel) != self.model.k or any(not a > 0 for a in panel):
                raise ValueError(
                    f"alpha panel {panel} must have {self.model.k} positive components"
                )
        return self

    def panels(self) -> list[ModelSpec]:
        """One model per alpha panel (the configured model when none are given)."""
        if not self.alpha_panels:
            return [self.model]
        return [
            self.model.model_copy(update={"alpha": list(alpha)})
            for alpha in self.alpha_panels
        ]


class SweepRow(BaseModel):
    """One (panel, n, replicate, policy) record of a sweep."""

    model_config = ConfigDict(populate_by_name=True)

    panel: int
    n: int
    replicate: int
    policy: str
    eta: float | None = None
    B_error: float | None = None  # noqa: N815
    vertex_error: float | None = None
    alpha_error: float | None = None
    pi_max_error: float | None = None
    symdiff: float | None = None
    runtime: float | None = None
    error: str = ""

    @classmethod
    def columns(cls) -> list[str]:
        return list(cls.model_fields)
