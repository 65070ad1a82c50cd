"""Experiment runner: simulate, estimate, and replicate sweeps over n and shrink policy."""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, NamedTuple

import numpy as np

from .config import ensure_directories, get_config, get_run_paths
from .models import (
    EstimationResult,
    ExperimentConfig,
    GraphSample,
    ModelSpec,
    ShrinkPolicy,
    SweepRow,
)
from .pipeline import (
    estimate,
    estimate_from_embedding,
    evaluate_against_truth,
    symdiff_diagnostic,
)
from .storage import (
    read_edge_list,
    save_estimation_result,
    save_truth,
    write_edge_list,
    write_summary_csv,
    write_sweep_csv,
)
from .tools.sampling import sample_mmsbm
from .tools.spectral import spectral_embed
from .utils.debug_logger import timed
from .utils.fail_fast import disable_fail_fast, enable_fail_fast, fail_fast_on_exception

logger = logging.getLogger(__name__)

METRICS = ("B_error", "vertex_error", "alpha_error", "pi_max_error", "symdiff", "runtime")


class SweepTask(NamedTuple):
    panel: int
    spec: ModelSpec
    n: int
    replicate: int
    seed: int
    policies: list[ShrinkPolicy]
    symdiff: bool
    fail_fast: bool


class SweepSummary(NamedTuple):
    records: list[dict[str, Any]]
    slopes: dict[tuple[int, str], float]


def _configure_fail_fast(enabled: bool | None = None) -> None:
    if enabled is None:
        enabled = get_config().fail_fast_enabled
    # Reset fail-fast state unless explicitly enabled
    disable_fail_fast()
    if enabled:
        enable_fail_fast()


def run_simulate(
    config: ExperimentConfig, out: str | Path, n: int | None = None, seed: int | None = None
) -> dict[str, Path]:
    """Sample one MMSBM graph and write the edge list plus ground-truth CSVs.

    ``n`` defaults to the first grid point and ``seed`` to the configured base seed.
    """
    n = n if n is not None else config.n_grid[0]
    seed = seed if seed is not None else config.seed

    ensure_directories(out)
    paths = get_run_paths(out)
    g = sample_mmsbm(config.model, n, np.random.default_rng(seed))

    written = {"graph": write_edge_list(g, paths["graph"])}
    written.update(save_truth(g.truth, out))
    logger.info(f"Simulated n={n} (seed={seed}): {g.n_edges} edges, density {g.density:.4f}")
    return written


def run_estimate(
    graph: str | Path | GraphSample,
    k: int,
    d: int,
    policy: ShrinkPolicy | str = "none",
    out: str | Path | None = None,
) -> EstimationResult:
    """Estimate from an edge-list file (or an in-memory graph), optionally saving results."""
    g = graph if isinstance(graph, GraphSample) else read_edge_list(graph)
    if isinstance(policy, str):
        policy = ShrinkPolicy.parse(policy)
    result = estimate(g, k, d, policy)
    if out is not None:
        path = save_estimation_result(result, out)
        logger.info(f"Saved estimate to {path}")
    return result


def _failed_rows(task: SweepTask, message: str, runtime: float | None = None) -> list[SweepRow]:
    return [
        SweepRow(
            panel=task.panel,
            n=task.n,
            replicate=task.replicate,
            policy=policy.label(),
            runtime=runtime,
            error=message,
        )
        for policy in task.policies
    ]


def run_sweep_task(task: SweepTask) -> list[SweepRow]:
    """One graph, embedded once, estimated under every policy.

    The graph depends only on the seed, so all policies see the same sample.
    """
    _configure_fail_fast(task.fail_fast)
    context = f"panel={task.panel} n={task.n} replicate={task.replicate}"
    timings: dict[str, float] = {}

    try:
        g = sample_mmsbm(task.spec, task.n, np.random.default_rng(task.seed))
        with timed("embedding", timings):
            embedding = spectral_embed(g, task.spec.d)
    except Exception as e:
        return _failed_rows(task, fail_fast_on_exception(e, context), timings.get("embedding"))

    rows = []
    for policy in task.policies:
        row = SweepRow(panel=task.panel, n=task.n, replicate=task.replicate, policy=policy.label())
        start = time.perf_counter()
        try:
            result = estimate_from_embedding(embedding.xhat, task.spec.k, policy)
            row.eta = result.eta
            metrics = evaluate_against_truth(result, g.truth, task.spec)
            if task.symdiff:
                rng = np.random.default_rng([task.seed, 1])
                metrics["symdiff"] = symdiff_diagnostic(result, g.truth, task.spec, rng).value
            for name, value in metrics.items():
                setattr(row, name, value)
        except Exception as e:
            row.error = fail_fast_on_exception(e, f"{context} policy={policy.label()}")
        row.runtime = timings["embedding"] + time.perf_counter() - start
        rows.append(row)
    return rows


def build_sweep_tasks(config: ExperimentConfig) -> list[SweepTask]:
    """Tasks in (panel, n, replicate) order; seed = base seed + replicate index."""
    fail_fast = get_config().fail_fast_enabled
    return [
        SweepTask(
            panel=panel,
            spec=spec,
            n=n,
            replicate=replicate,
            seed=config.seed + replicate,
            policies=list(config.policies),
            symdiff=config.symdiff,
            fail_fast=fail_fast,
        )
        for panel, spec in enumerate(config.panels())
        for n in config.n_grid
        for replicate in range(config.replicates)
    ]


def run_sweep(
    config: ExperimentConfig, out: str | Path | None = None, jobs: int | None = None
) -> list[SweepRow]:
    """Run every (panel, n, replicate, policy) combination and write ``sweep.csv``.

    Failing replicates become rows with an ``error`` entry unless fail-fast is enabled.
    Rows are written in deterministic (panel, n, replicate, policy) order whatever
    the number of workers.
    """
    out = out if out is not None else config.output
    jobs = jobs or config.jobs or get_config().default_jobs
    _configure_fail_fast()

    tasks = build_sweep_tasks(config)
    logger.info(
        f"Sweep: {len(tasks)} graphs x {len(config.policies)} policies "
        f"(n_grid={config.n_grid}, replicates={config.replicates}, jobs={jobs})"
    )

    rows: list[SweepRow] = []
    if jobs == 1:
        for number, task in enumerate(tasks, start=1):
            rows.extend(run_sweep_task(task))
            logger.debug(f"Sweep progress: {number}/{len(tasks)}")
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for number, task_rows in enumerate(pool.map(run_sweep_task, tasks), start=1):
                rows.extend(task_rows)
                logger.debug(f"Sweep progress: {number}/{len(tasks)}")

    order = {policy.label(): index for index, policy in enumerate(config.policies)}
    rows.sort(key=lambda r: (r.panel, r.n, r.replicate, order[r.policy]))

    failures = sum(1 for r in rows if r.error)
    if failures:
        logger.warning(f"Sweep finished with {failures} failed rows out of {len(rows)}")

    write_sweep_csv(rows, get_run_paths(out)["sweep"])
    return rows


def _median(values: list[float]) -> float | None:
    finite = [v for v in values if v is not None and np.isfinite(v)]
    return float(np.median(finite)) if finite else None


def loglog_slope(ns: list[int], values: list[float]) -> float:
    """Least-squares slope of log(value) against log(n) (natural logarithms)."""
    slope, _ = np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(values, float)), 1)
    return float(slope)


def summarize_sweep(rows: list[SweepRow]) -> SweepSummary:
    """Per (panel, policy, n) medians, and the log-log slope of median vertex error vs n."""
    groups: dict[tuple[int, str, int], list[SweepRow]] = {}
    for row in rows:
        groups.setdefault((row.panel, row.policy, row.n), []).append(row)

    records = []
    for (panel, policy, n), members in groups.items():
        ok = [r for r in members if not r.error]
        record: dict[str, Any] = {
            "panel": panel,
            "policy": policy,
            "n": n,
            "replicates": len(members),
            "failures": len(members) - len(ok),
        }
        for metric in METRICS:
            record[f"median_{metric}"] = _median([getattr(r, metric) for r in ok])
        records.append(record)

    slopes = {}
    for panel, policy in {(r["panel"], r["policy"]) for r in records}:
        curve = [
            (r["n"], r["median_vertex_error"])
            for r in records
            if (r["panel"], r["policy"]) == (panel, policy)
            and r["median_vertex_error"] is not None
            and r["median_vertex_error"] > 0
        ]
        if len(curve) >= 2:
            ns, medians = zip(*sorted(curve))
            slopes[(panel, policy)] = loglog_slope(list(ns), list(medians))
    return SweepSummary(records, slopes)


def reference_curve(ns, median_at_ref: float, n_ref: int) -> np.ndarray:
    """c n^(-1/2) log^(1/2)(n), with c chosen to pass through ``median_at_ref`` at ``n_ref``."""
    ns = np.asarray(ns, dtype=float)

    def rate(n):
        return np.sqrt(np.log(n) / n)

    return median_at_ref / rate(float(n_ref)) * rate(ns)


def write_summary(summary: SweepSummary, out: str | Path) -> Path:
    """Write summary medians, with the fitted slope and reference curve per (panel, policy)."""
    records = []
    for record in summary.records:
        key = (record["panel"], record["policy"])
        largest = max(
            (r for r in summary.records if (r["panel"], r["policy"]) == key),
            key=lambda r: r["n"],
        )
        reference = None
        if largest["median_vertex_error"] is not None:
            reference = float(
                reference_curve([record["n"]], largest["median_vertex_error"], largest["n"])[0]
            )
        records.append(
            {
                **record,
                "reference_vertex_error": reference,
                "vertex_error_slope": summary.slopes.get(key),
            }
        )
    records.sort(key=lambda r: (r["panel"], r["policy"], r["n"]))
    return write_summary_csv(records, get_run_paths(out)["summary"])
