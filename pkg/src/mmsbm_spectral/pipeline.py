"""Five-step spectral estimator for the undirected MMSBM, and its error metrics.

1. embed the graph (ASE) and project onto the d-1 principal components
2. fit the minimum-volume enclosing k-polytope, shrink it, map it back to R^d
3. B_hat = V_hat V_hat^T from the polytope vertices
4. pi_hat from barycentric coordinates (d = k only)
5. alpha_hat by Dirichlet maximum likelihood (d = k only)
"""

import logging

import numpy as np

from .config import get_config
from .models import (
    EstimationResult,
    GraphSample,
    GroundTruth,
    InvalidParameterError,
    ModelSpec,
    Polytope,
    ShrinkPolicy,
)
from .tools.dirichlet import fit_dirichlet
from .tools.matching import match_permutation, match_vertices, project_to_simplex
from .tools.mvecp import MinimumVolumeSimplexFitter
from .tools.polytope import (
    VolumeEstimate,
    barycentric,
    interval_hull,
    shrink,
    symdiff_volume_mc,
)
from .tools.sampling import true_vertices
from .tools.spectral import (
    pca_project,
    pca_project_points,
    pca_reconstruct,
    procrustes_align,
    spectral_embed,
)
from .utils.debug_logger import log_step, timed

logger = logging.getLogger(__name__)


def estimate_B(vertices: np.ndarray) -> tuple[np.ndarray, dict[str, float]]:
    """Gram matrix of the vertices, clipped to [0, 1].

    Returns the clipped matrix and ``{"b_clip_count", "b_clip_max"}``.
    """
    vertices = np.atleast_2d(np.asarray(vertices, dtype=float))
    gram = vertices @ vertices.T
    gram = 0.5 * (gram + gram.T)
    clipped = np.clip(gram, 0.0, 1.0)
    magnitude = np.abs(gram - clipped)
    stats = {
        "b_clip_count": float(np.count_nonzero(magnitude)),
        "b_clip_max": float(magnitude.max(initial=0.0)),
    }
    if stats["b_clip_count"]:
        logger.warning(
            f"B_hat: clipped {int(stats['b_clip_count'])} entries into [0, 1] "
            f"(largest excursion {stats['b_clip_max']:.3g}); pre-clip values {gram.tolist()}"
        )
    return clipped, stats


def estimate_memberships(
    xhat: np.ndarray, s_hat: Polytope
) -> tuple[np.ndarray, dict[str, float]]:
    """Barycentric memberships; rows outside the polytope are projected onto the simplex."""
    if s_hat.k != s_hat.ambient_dim:
        raise InvalidParameterError(
            f"memberships need d = k, got k={s_hat.k} vertices in R^{s_hat.ambient_dim}",
            stage="estimation",
        )
    # The vertices span a (d-1)-dimensional plane in R^d; solve in its own frame.
    xtilde, frame = pca_project(s_hat.vertices)
    local = Polytope(xtilde)
    coefficients = barycentric(local, pca_project_points(xhat, frame))

    outside = np.any(coefficients < 0, axis=1)
    pi_hat = coefficients.copy()
    if np.any(outside):
        pi_hat[outside] = project_to_simplex(coefficients[outside])
    pi_hat /= pi_hat.sum(axis=1, keepdims=True)

    residual = np.linalg.norm(pi_hat @ s_hat.vertices - xhat, axis=1)
    stats = {
        "pi_clip_count": float(np.count_nonzero(outside)),
        "pi_residual_max": float(residual.max(initial=0.0)),
    }
    if stats["pi_clip_count"]:
        logger.info(
            f"pi_hat: projected {int(stats['pi_clip_count'])} rows onto the simplex "
            f"(max reconstruction residual {stats['pi_residual_max']:.3g})"
        )
    return pi_hat, stats


def estimate_from_embedding(
    xhat: np.ndarray,
    k: int,
    shrink_policy: ShrinkPolicy | None = None,
    **fitter_options,
) -> EstimationResult:
    """Steps 2-5 of the estimator, starting from latent positions ``xhat``."""
    shrink_policy = shrink_policy or ShrinkPolicy()
    xhat = np.atleast_2d(np.asarray(xhat, dtype=float))
    n, d = xhat.shape
    if not k >= d >= 1:
        raise InvalidParameterError(f"need k >= d >= 1, got k={k}, d={d}", stage="estimation")
    eta = shrink_policy.eta(n)
    diagnostics: dict[str, float] = {"eta": eta}
    timings: dict[str, float] = {}

    if d == 1:
        if k > 2:
            raise InvalidParameterError(
                "d = 1 supports at most k = 2 communities", stage="estimation"
            )
        frame = None
        s_hat_raw = interval_hull(xhat)
        s_hat = shrink(s_hat_raw, xhat.mean(axis=0), eta)
    else:
        with timed("pca", timings):
            xtilde, frame = pca_project(xhat)
        with timed("mvecp", timings):
            fitter = MinimumVolumeSimplexFitter(**fitter_options)
            s_tilde = fitter.fit(xtilde, k)
        diagnostics.update(
            mvecp_passes=float(fitter.passes),
            mvecp_volume=float(fitter.volume),
            mvecp_initial_volume=float(fitter.initial_volume),
        )
        shrunk = shrink(s_tilde, xtilde.mean(axis=0), eta)
        s_hat_raw = pca_reconstruct(s_tilde, frame)
        s_hat = pca_reconstruct(shrunk, frame)
    log_step("polytope", k=k, d=d, eta=eta)

    result = EstimationResult(
        b_hat=np.zeros((k, k)),
        pi_hat=None,
        alpha_hat=None,
        s_hat=s_hat,
        s_hat_raw=s_hat_raw,
        frame=frame,
        eta=eta,
        policy=shrink_policy,
        xhat=xhat,
        diagnostics=diagnostics,
    )
    result.b_hat, b_stats = estimate_B(result.community_vertices)
    diagnostics.update(b_stats)

    if d == k == 1:
        result.pi_hat = np.ones((n, 1))
    elif d == k:
        with timed("memberships", timings):
            result.pi_hat, pi_stats = estimate_memberships(xhat, s_hat)
        diagnostics.update(pi_stats)
        with timed("dirichlet", timings):
            fit = fit_dirichlet(result.pi_hat)
        result.alpha_hat = fit.alpha
        diagnostics.update(
            mle_iterations=float(fit.iterations), mle_clipped_entries=float(fit.clipped_entries)
        )
    else:
        logger.info(f"d={d} < k={k}: pi_hat and alpha_hat are not identifiable, skipped")

    diagnostics.update({f"time_{name}": value for name, value in timings.items()})
    return result


def estimate(
    g: GraphSample,
    k: int,
    d: int,
    shrink_policy: ShrinkPolicy | None = None,
    **fitter_options,
) -> EstimationResult:
    """Estimate (B, pi, alpha) from a single observed graph."""
    if not k >= d >= 1:
        raise InvalidParameterError(f"need k >= d >= 1, got k={k}, d={d}", stage="estimation")
    if g.n < 2:
        raise InvalidParameterError("graph must have at least two nodes", stage="estimation")

    timings: dict[str, float] = {}
    with timed("embedding", timings):
        embedding = spectral_embed(g, d)
    result = estimate_from_embedding(embedding.xhat, k, shrink_policy, **fitter_options)
    result.embedding = embedding
    result.diagnostics["eigen_residual"] = embedding.residual
    result.diagnostics["time_embedding"] = timings["embedding"]
    logger.info(
        f"Estimated B_hat (n={g.n}, k={k}, d={d}, eta={result.eta:.4f}): "
        f"{np.round(result.b_hat, 4).tolist()}"
    )
    return result


def align_to_truth(xhat: np.ndarray, x_true: np.ndarray) -> np.ndarray:
    """Orthogonal W mapping the embedding gauge onto the true latent positions."""
    return procrustes_align(xhat, x_true).rotation


def evaluate_against_truth(
    result: EstimationResult, truth: GroundTruth, spec: ModelSpec
) -> dict[str, float]:
    """Gauge-aware errors of an estimate against the generating model.

    ``B_error`` minimizes over row-column permutations. The vertex, membership and
    alpha errors share one vertex matching after Procrustes alignment of X_hat onto X.
    """
    metrics: dict[str, float] = {
        "B_error": match_permutation(result.b_hat, spec.b_matrix).error
    }

    w = align_to_truth(result.xhat, truth.x.x)
    match = match_vertices(result.community_vertices @ w, true_vertices(spec))
    metrics["vertex_error"] = match.error
    rho = match.permutation

    if result.pi_hat is not None and truth.pi is not None:
        deviations = np.linalg.norm(result.pi_hat[:, rho] - truth.pi.pi, axis=1)
        metrics["pi_max_error"] = float(deviations.max())
    if result.alpha_hat is not None:
        metrics["alpha_error"] = float(
            np.linalg.norm(result.alpha_hat[rho] - spec.alpha_vector)
        )
    return metrics


def symdiff_diagnostic(
    result: EstimationResult,
    truth: GroundTruth,
    spec: ModelSpec,
    rng: np.random.Generator,
    samples: int | None = None,
) -> VolumeEstimate:
    """Monte Carlo volume of (W S_hat) xor S inside the affine hull of S.

    W comes from Procrustes alignment of X_hat onto X and vertices are matched
    before comparison. Both polytopes are expressed in the (d-1)-dimensional frame of
    S, where their volume is non-trivial.
    """
    if samples is None:
        samples = get_config().symdiff_samples
    if result.d < 2:
        raise InvalidParameterError("symmetric difference needs d >= 2", stage="estimation")

    w = align_to_truth(result.xhat, truth.x.x)
    vertices = true_vertices(spec)
    aligned = result.community_vertices @ w
    aligned = aligned[match_vertices(aligned, vertices).permutation]

    local_true, frame = pca_project(vertices)
    local_hat = pca_project_points(aligned, frame)
    return symdiff_volume_mc(Polytope(local_hat), Polytope(local_true), samples, rng)
