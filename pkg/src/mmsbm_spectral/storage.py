"""Storage and persistence for graphs, ground truth, estimates and sweeps."""

import csv
import json
import logging
from pathlib import Path
from typing import Any

import numpy as np
import yaml
from pydantic import ValidationError

from .config import ensure_directories, get_run_paths
from .models import (
    ConfigError,
    EdgeListParseError,
    EstimationReport,
    EstimationResult,
    ExperimentConfig,
    GraphSample,
    GroundTruth,
    InvalidParameterError,
    Polytope,
    SweepRow,
)

logger = logging.getLogger(__name__)

NUMBER_FORMAT = "%.17g"


def format_number(value: float | None) -> str:
    """Render a float at 17 significant digits (empty for missing values)."""
    if value is None:
        return ""
    return NUMBER_FORMAT % value


def write_edge_list(g: GraphSample, path: str | Path) -> Path:
    """Write ``g`` as a ``# n=<n>`` header followed by sorted 1-indexed ``i j`` lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# n={g.n}\n")
        for i, j in g.edges + 1:
            f.write(f"{i} {j}\n")
    return path


def _parse_header(line: str, line_number: int) -> int | None:
    body = line[1:].strip()
    if not body.startswith("n="):
        return None
    try:
        n = int(body[2:])
    except ValueError:
        raise EdgeListParseError(f"bad node count {body[2:]!r}", line_number) from None
    if n < 1:
        raise EdgeListParseError(f"node count must be positive, got {n}", line_number)
    return n


def read_edge_list(path: str | Path, n: int | None = None) -> GraphSample:
    """Parse an edge-list file.

    Comment lines start with ``#``; ``# n=<n>`` sets the node count. Without a header (and
    without ``n``) the node count is the largest label seen. Pairs may appear in either
    order; self-loops, duplicates and labels outside ``1..n`` are errors.

    Raises:
        EdgeListParseError: naming the offending line.
    """
    path = Path(path)
    header_n = None
    pairs: list[tuple[int, int]] = []
    line_numbers: list[int] = []

    with open(path, encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parsed = _parse_header(line, line_number)
                if parsed is not None:
                    if header_n is not None and parsed != header_n:
                        raise EdgeListParseError("conflicting node-count headers", line_number)
                    header_n = parsed
                continue

            tokens = line.split()
            if len(tokens) != 2:
                raise EdgeListParseError(
                    f"expected two node labels, got {len(tokens)} fields", line_number
                )
            try:
                i, j = int(tokens[0]), int(tokens[1])
            except ValueError:
                raise EdgeListParseError(f"non-integer node label in {line!r}", line_number) from None
            if i == j:
                raise EdgeListParseError(f"self-loop on node {i}", line_number)
            if min(i, j) < 1:
                raise EdgeListParseError("node labels are 1-indexed", line_number)
            pairs.append((min(i, j), max(i, j)))
            line_numbers.append(line_number)

    if n is None:
        n = header_n
    if n is None:
        n = max((j for _, j in pairs), default=0)
        logger.warning(f"{path}: no '# n=' header, inferring n={n} from labels")

    edges = np.array(pairs, dtype=np.int64).reshape(-1, 2) - 1
    if edges.size:
        too_large = np.nonzero(edges[:, 1] >= n)[0]
        if too_large.size:
            bad = int(too_large[0])
            raise EdgeListParseError(
                f"node label {edges[bad, 1] + 1} exceeds n={n}", line_numbers[bad]
            )
        keys = edges[:, 0] * n + edges[:, 1]
        order = np.argsort(keys, kind="stable")
        repeated = np.nonzero(np.diff(keys[order]) == 0)[0]
        if repeated.size:
            raise EdgeListParseError(
                "duplicate edge", line_numbers[int(order[repeated[0] + 1])]
            )
        edges = edges[order]

    logger.info(f"Loaded {edges.shape[0]} edges on {n} nodes from {path}")
    return GraphSample(n=n, edges=edges)


def save_matrix_csv(matrix: np.ndarray, path: str | Path) -> Path:
    """Save a matrix as comma-separated rows at 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.atleast_2d(matrix), fmt=NUMBER_FORMAT, delimiter=",")
    return path


def load_matrix_csv(path: str | Path) -> np.ndarray:
    """Load a matrix written by ``save_matrix_csv``."""
    return np.loadtxt(path, delimiter=",", ndmin=2)


def save_polytope(poly: Polytope, path: str | Path) -> Path:
    """Save polytope vertices; ``.json`` adds ``ambient_dim``, anything else is CSV rows."""
    path = Path(path)
    if path.suffix == ".json":
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(
                {"vertices": poly.vertices.tolist(), "ambient_dim": poly.ambient_dim},
                f,
                indent=2,
            )
        return path
    return save_matrix_csv(poly.vertices, path)


def load_polytope(path: str | Path) -> Polytope:
    path = Path(path)
    if path.suffix != ".json":
        return Polytope(load_matrix_csv(path))

    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    poly = Polytope(np.asarray(data["vertices"], dtype=float))
    ambient_dim = data.get("ambient_dim", poly.ambient_dim)
    if ambient_dim != poly.ambient_dim:
        raise InvalidParameterError(
            f"{path}: ambient_dim is {ambient_dim} but vertices live in R^{poly.ambient_dim}"
        )
    return poly


def save_truth(truth: GroundTruth, out_dir: str | Path) -> dict[str, Path]:
    """Write Pi and X as ``pi.csv`` and ``x.csv`` in the run directory.

    A zero-rank model has no latent coordinates; ``x.csv`` is then skipped.
    """
    paths = get_run_paths(out_dir)
    ensure_directories(out_dir)
    written: dict[str, Path] = {}
    if truth.pi is not None:
        written["pi"] = save_matrix_csv(truth.pi.pi, paths["pi"])
    if truth.x.d == 0:
        logger.warning(f"Latent positions have no columns; not writing {paths['x']}")
    else:
        written["x"] = save_matrix_csv(truth.x.x, paths["x"])
    return written


def save_estimation_result(result: EstimationResult, out_dir: str | Path) -> Path:
    """Write ``result.json`` plus one CSV per matrix under ``matrices/``.

    Besides the estimates this exports the embedding (``xhat``, ``eigenvalues``) and
    the PCA frame (``frame_mean``, ``frame_basis``, ``frame_spectrum``) for plotting.
    """
    paths = get_run_paths(out_dir)
    ensure_directories(out_dir)
    matrices = paths["matrices"]

    report = result.to_report()
    with open(paths["result"], "w", encoding="utf-8") as f:
        json.dump(report.model_dump(), f, indent=2)

    save_matrix_csv(result.b_hat, matrices / "b_hat.csv")
    save_polytope(result.s_hat, matrices / "s_hat.csv")
    save_polytope(result.s_hat_raw, matrices / "s_hat_raw.csv")
    if result.pi_hat is not None:
        save_matrix_csv(result.pi_hat, matrices / "pi_hat.csv")
    if result.alpha_hat is not None:
        save_matrix_csv(result.alpha_hat[None, :], matrices / "alpha_hat.csv")

    save_matrix_csv(result.xhat, matrices / "xhat.csv")
    if result.embedding is not None:
        save_matrix_csv(result.embedding.eigenvalues[None, :], matrices / "eigenvalues.csv")
    if result.frame is not None:
        save_matrix_csv(result.frame.mean[None, :], matrices / "frame_mean.csv")
        save_matrix_csv(result.frame.basis, matrices / "frame_basis.csv")
        save_matrix_csv(result.frame.spectrum[None, :], matrices / "frame_spectrum.csv")
    return paths["result"]


def load_estimation_report(path: str | Path) -> EstimationReport:
    with open(path, encoding="utf-8") as f:
        return EstimationReport(**json.load(f))


def _field_path(loc: tuple) -> str:
    return ".".join(str(part) for part in loc)


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    """Load an ``ExperimentConfig`` from JSON or YAML (chosen by file suffix).

    Raises:
        ConfigError: unreadable file, syntax error (with line and column) or a field that
            fails validation (with its dotted path).
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e

    try:
        if path.suffix in (".yaml", ".yml"):
            data = yaml.safe_load(text) or {}
        else:
            data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f"line {mark.line + 1} column {mark.column + 1}: " if mark else ""
        raise ConfigError(f"{path}: {where}{e}") from e

    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")

    try:
        return ExperimentConfig(**data)
    except ValidationError as e:
        first = e.errors()[0]
        field = _field_path(first["loc"])
        raise ConfigError(f"{path}: {field}: {first['msg']}", field=field) from e


def _cell(value: Any) -> Any:
    if value is None or isinstance(value, float):
        return format_number(value)
    return value


def write_sweep_csv(rows: list[SweepRow], path: str | Path) -> Path:
    """Write sweep rows in long format; floats at 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = SweepRow.columns()
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            record = row.model_dump()
            writer.writerow([_cell(record[c]) for c in columns])
    logger.info(f"Wrote {len(rows)} sweep rows to {path}")
    return path


def _parse_cell(value: str) -> Any:
    return None if value == "" else value


def read_sweep_csv(path: str | Path) -> list[SweepRow]:
    """Read rows written by ``write_sweep_csv``."""
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        rows = []
        for record in reader:
            data = {key: _parse_cell(value) for key, value in record.items()}
            data["error"] = record.get("error", "")
            rows.append(SweepRow(**data))
    return rows


def write_summary_csv(records: list[dict[str, Any]], path: str | Path) -> Path:
    """Write summary records (one dict per row, shared keys)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = list(records[0]) if records else []
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for record in records:
            writer.writerow([_cell(record[c]) for c in columns])
    return path
