"""CLI entry point for mmsbm-spectral."""

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import typer

from .config import get_config
from .models import (
    ConfigError,
    EdgeListParseError,
    ExperimentConfig,
    InvalidParameterError,
    MmsbmError,
    ShrinkPolicy,
)
from .runner import run_estimate, run_simulate, run_sweep, summarize_sweep, write_summary
from .storage import format_number, load_experiment_config, read_sweep_csv

cli = typer.Typer(help="Spectral estimation of mixed membership stochastic blockmodels.")

EXIT_INPUT_ERROR = 1
EXIT_NUMERIC_ERROR = 2


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Map input problems to exit status 1 and numerical failures to 2."""
    try:
        yield
    except (ConfigError, EdgeListParseError, InvalidParameterError, OSError) as e:
        typer.echo(f"❌ {e}", err=True)
        raise typer.Exit(EXIT_INPUT_ERROR) from e
    except MmsbmError as e:
        typer.echo(f"❌ {type(e).__name__}: {e}", err=True)
        raise typer.Exit(EXIT_NUMERIC_ERROR) from e


def _load_config(path: Path | None, seed: int | None) -> ExperimentConfig:
    config = load_experiment_config(path) if path is not None else ExperimentConfig()
    if seed is not None:
        config = config.model_copy(update={"seed": seed})
    return config


def _format_matrix(m: np.ndarray) -> str:
    return "\n".join("   " + " ".join(format_number(v) for v in row) for row in np.atleast_2d(m))


@cli.callback()
def main(
    log_level: str = typer.Option(
        None, "--log-level", help="Logging level (default from MMSBM_LOG_LEVEL)"
    ),
):
    """Configure logging for every subcommand."""
    level = (log_level or get_config().log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


@cli.command()
def simulate(
    config: Path | None = typer.Option(None, "--config", help="Experiment config (JSON/YAML)"),
    n: int | None = typer.Option(None, "--n", help="Node count (default: first grid point)"),
    seed: int | None = typer.Option(None, "--seed", help="Random seed"),
    out: Path = typer.Option(Path("runs/simulate"), "--out", help="Output directory"),
):
    """Sample one graph and write graph.txt, pi.csv and x.csv."""
    with _exit_codes():
        experiment = _load_config(config, seed)
        written = run_simulate(experiment, out, n=n)
    typer.echo(f"✅ Simulated graph written to {written['graph']}")
    truth_files = [str(written[name]) for name in ("pi", "x") if name in written]
    typer.echo(f"📄 Ground truth: {', '.join(truth_files)}")


@cli.command()
def estimate(
    graph: Path = typer.Argument(..., help="Edge-list file"),
    k: int = typer.Option(..., "--k", help="Number of communities"),
    d: int = typer.Option(..., "--d", help="Embedding dimension (d <= k)"),
    policy: str = typer.Option("none", "--policy", help="none | fixed:<eta> | rate:<a|auto>"),
    out: Path = typer.Option(Path("runs/estimate"), "--out", help="Output directory"),
):
    """Estimate B, pi and alpha from an edge list."""
    with _exit_codes():
        try:
            shrink_policy = ShrinkPolicy.parse(policy)
        except ValueError as e:
            raise ConfigError(str(e), field="policy") from e
        result = run_estimate(graph, k, d, shrink_policy, out=out)

    typer.echo(f"✅ Estimated n={result.n}, k={k}, d={d}, eta={format_number(result.eta)}")
    typer.echo("B_hat:")
    typer.echo(_format_matrix(result.b_hat))
    if result.alpha_hat is not None:
        typer.echo(f"alpha_hat: {' '.join(format_number(a) for a in result.alpha_hat)}")
    typer.echo(f"📄 Result: {out / 'result.json'}")


@cli.command()
def sweep(
    config: Path | None = typer.Option(None, "--config", help="Experiment config (JSON/YAML)"),
    seed: int | None = typer.Option(None, "--seed", help="Base seed"),
    out: Path | None = typer.Option(None, "--out", help="Output directory"),
    jobs: int | None = typer.Option(None, "--jobs", help="Worker processes"),
    policy: list[str] | None = typer.Option(
        None, "--policy", help="Shrink policy; repeat to compare several"
    ),
):
    """Replicate sweep over n and shrink policies, written as sweep.csv."""
    with _exit_codes():
        experiment = _load_config(config, seed)
        if policy:
            try:
                experiment = ExperimentConfig(
                    **{**experiment.model_dump(), "policies": list(policy)}
                )
            except ValueError as e:
                raise ConfigError(str(e), field="policies") from e
        out = out if out is not None else Path(experiment.output)
        rows = run_sweep(experiment, out, jobs=jobs)
        summary = summarize_sweep(rows)
        write_summary(summary, out)

    failures = sum(1 for r in rows if r.error)
    typer.echo(f"✅ Sweep wrote {len(rows)} rows to {out / 'sweep.csv'}")
    if failures:
        typer.echo(f"⚠️  {failures} rows recorded errors")
    for (panel, label), slope in sorted(summary.slopes.items()):
        typer.echo(f"   panel {panel} {label}: vertex-error log-log slope {slope:.3f}")


@cli.command()
def summarize(
    sweep_csv: Path = typer.Argument(..., help="sweep.csv from a previous sweep"),
    out: Path | None = typer.Option(None, "--out", help="Output directory for summary.csv"),
):
    """Median metrics per (panel, policy, n) and the fitted vertex-error slope."""
    with _exit_codes():
        summary = summarize_sweep(read_sweep_csv(sweep_csv))
        path = write_summary(summary, out if out is not None else sweep_csv.parent)

    for record in sorted(summary.records, key=lambda r: (r["panel"], r["policy"], r["n"])):
        typer.echo(
            f"   panel {record['panel']} {record['policy']} n={record['n']}: "
            f"B_error={format_number(record['median_B_error'])} "
            f"vertex_error={format_number(record['median_vertex_error'])}"
        )
    typer.echo(f"📄 Summary: {path}")


if __name__ == "__main__":
    cli()
