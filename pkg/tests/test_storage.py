"""Tests for edge lists, matrix files, configs and sweep CSVs."""

import json

import numpy as np
import pytest

from mmsbm_spectral.models import (
    ConfigError,
    EdgeListParseError,
    GraphSample,
    GroundTruth,
    InvalidParameterError,
    LatentPositions,
    MembershipMatrix,
    Polytope,
    ShrinkPolicy,
    SweepRow,
)
from mmsbm_spectral.pipeline import estimate, estimate_from_embedding
from mmsbm_spectral.storage import (
    format_number,
    load_estimation_report,
    load_experiment_config,
    load_matrix_csv,
    load_polytope,
    read_edge_list,
    read_sweep_csv,
    save_estimation_result,
    save_matrix_csv,
    save_polytope,
    save_truth,
    write_edge_list,
    write_sweep_csv,
)
from mmsbm_spectral.tools.sampling import sample_mmsbm


class TestEdgeList:
    """Edge-list reading and writing."""

    def test_write_then_read(self, reference_spec, rng, tmp_path):
        g = sample_mmsbm(reference_spec, 120, rng)
        path = write_edge_list(g, tmp_path / "graph.txt")
        loaded = read_edge_list(path)
        assert loaded.n == 120
        np.testing.assert_array_equal(loaded.edges, g.edges)

    def test_file_layout(self, tmp_path):
        g = GraphSample(n=4, edges=np.array([[0, 1], [2, 3]]))
        path = write_edge_list(g, tmp_path / "graph.txt")
        assert path.read_text().splitlines() == ["# n=4", "1 2", "3 4"]

    def test_header_keeps_isolated_nodes(self, tmp_path):
        path = tmp_path / "graph.txt"
        path.write_text("# n=10\n")
        g = read_edge_list(path)
        assert g.n == 10
        assert g.n_edges == 0

    def test_reversed_pairs_and_comments(self, tmp_path):
        path = tmp_path / "graph.txt"
        path.write_text("# n=5\n# a comment\n3 1\n\n5 4\n")
        g = read_edge_list(path)
        np.testing.assert_array_equal(g.edges, [[0, 2], [3, 4]])

    def test_missing_header_infers_n(self, tmp_path):
        path = tmp_path / "graph.txt"
        path.write_text("1 2\n2 7\n")
        assert read_edge_list(path).n == 7
        assert read_edge_list(path, n=9).n == 9

    @pytest.mark.parametrize(
        "body, line_number",
        [
            ("# n=3\n1 2\n2 2\n", 3),
            ("# n=3\n1 2 3\n", 2),
            ("# n=3\n1 x\n", 2),
            ("# n=3\n1 2\n3 4\n", 3),
            ("# n=3\n1 2\n2 3\n2 1\n", 4),
            ("# n=3\n0 1\n", 2),
            ("# n=oops\n", 1),
        ],
    )
    def test_malformed_lines(self, tmp_path, body, line_number):
        path = tmp_path / "graph.txt"
        path.write_text(body)
        with pytest.raises(EdgeListParseError) as info:
            read_edge_list(path)
        assert info.value.line_number == line_number
        assert f"line {line_number}" in str(info.value)


class TestMatrixFiles:
    """CSV and JSON matrix persistence."""

    def test_seventeen_digits(self, tmp_path):
        m = np.array([[1 / 3, np.pi], [1e-300, -2.5]])
        path = save_matrix_csv(m, tmp_path / "m.csv")
        np.testing.assert_array_equal(load_matrix_csv(path), m)
        assert "0.33333333333333331" in path.read_text()

    def test_format_number(self):
        assert format_number(None) == ""
        assert float(format_number(0.1)) == 0.1

    @pytest.mark.parametrize("name", ["s.json", "s.csv"])
    def test_polytope(self, tmp_path, name):
        poly = Polytope(np.array([[0.1, 0.2], [0.7, 0.1], [0.3, 0.9]]))
        loaded = load_polytope(save_polytope(poly, tmp_path / name))
        np.testing.assert_array_equal(loaded.vertices, poly.vertices)

    def test_polytope_json_layout(self, tmp_path):
        path = save_polytope(Polytope(np.eye(2)), tmp_path / "s.json")
        assert json.loads(path.read_text()) == {
            "vertices": [[1.0, 0.0], [0.0, 1.0]],
            "ambient_dim": 2,
        }

    def test_polytope_json_dimension_mismatch(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text(json.dumps({"vertices": [[1.0, 0.0], [0.0, 1.0]], "ambient_dim": 3}))
        with pytest.raises(InvalidParameterError, match="ambient_dim"):
            load_polytope(path)

    def test_zero_rank_truth_skips_positions(self, tmp_path):
        truth = GroundTruth(
            x=LatentPositions(np.zeros((4, 0))), pi=MembershipMatrix(np.full((4, 2), 0.5))
        )
        written = save_truth(truth, tmp_path)
        assert set(written) == {"pi"}
        assert not (tmp_path / "x.csv").exists()
        assert load_matrix_csv(written["pi"]).shape == (4, 2)


def test_save_estimation_result(noiseless_positions, tmp_path):
    _, x = noiseless_positions
    result = estimate_from_embedding(x.x, 3, ShrinkPolicy.parse("fixed:0.9"))
    path = save_estimation_result(result, tmp_path / "run")

    report = load_estimation_report(path)
    assert report.k == 3 and report.d == 3
    assert report.policy == "fixed:0.9"
    assert report.eta == pytest.approx(0.9)
    np.testing.assert_array_equal(np.array(report.b_hat), result.b_hat)

    matrices = tmp_path / "run" / "matrices"
    for name in ("b_hat", "s_hat", "s_hat_raw", "pi_hat", "alpha_hat"):
        assert (matrices / f"{name}.csv").exists()
    np.testing.assert_array_equal(load_matrix_csv(matrices / "pi_hat.csv"), result.pi_hat)


def test_save_embedding_and_frame(reference_spec, rng, tmp_path):
    g = sample_mmsbm(reference_spec, 300, rng)
    result = estimate(g, 3, 3)
    save_estimation_result(result, tmp_path)

    matrices = tmp_path / "matrices"
    np.testing.assert_array_equal(load_matrix_csv(matrices / "xhat.csv"), result.xhat)
    np.testing.assert_array_equal(
        load_matrix_csv(matrices / "eigenvalues.csv")[0], result.embedding.eigenvalues
    )
    np.testing.assert_array_equal(
        load_matrix_csv(matrices / "frame_mean.csv")[0], result.frame.mean
    )
    basis = load_matrix_csv(matrices / "frame_basis.csv")
    assert basis.shape == (3, 2)
    np.testing.assert_array_equal(basis, result.frame.basis)
    np.testing.assert_array_equal(
        load_matrix_csv(matrices / "frame_spectrum.csv")[0], result.frame.spectrum
    )


class TestExperimentConfig:
    """Config files in JSON and YAML."""

    def test_json(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"n_grid": [100, 200], "replicates": 2, "seed": 7}))
        config = load_experiment_config(path)
        assert config.n_grid == [100, 200]
        assert config.seed == 7

    def test_yaml_with_policies(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("n_grid: [100, 200]\npolicies:\n  - none\n  - rate:auto\n")
        config = load_experiment_config(path)
        assert [p.label() for p in config.policies] == ["none", "rate:auto"]

    def test_json_syntax_error_reports_line(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text('{\n  "seed": 1,\n  "replicates": \n}\n')
        with pytest.raises(ConfigError, match="line 4"):
            load_experiment_config(path)

    def test_yaml_syntax_error_reports_line(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("seed: 1\nn_grid: [100, 200\n")
        with pytest.raises(ConfigError, match="line"):
            load_experiment_config(path)

    def test_invalid_field_named(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"replicates": 0}))
        with pytest.raises(ConfigError) as info:
            load_experiment_config(path)
        assert info.value.field == "replicates"

    def test_nested_field_named(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"model": {"k": 2, "B": [[0.5, 0.2], [0.2, 0.5]]}}))
        with pytest.raises(ConfigError) as info:
            load_experiment_config(path)
        assert info.value.field.startswith("model")

    def test_top_level_must_be_mapping(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError, match="mapping"):
            load_experiment_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_experiment_config(tmp_path / "absent.json")


def test_sweep_csv(tmp_path):
    rows = [
        SweepRow(panel=0, n=100, replicate=0, policy="none", eta=1.0, B_error=0.25, runtime=0.5),
        SweepRow(panel=0, n=100, replicate=1, policy="none", error="EigenSolverError: stalled"),
    ]
    path = write_sweep_csv(rows, tmp_path / "sweep.csv")
    assert path.read_text().splitlines()[0] == ",".join(SweepRow.columns())

    loaded = read_sweep_csv(path)
    assert loaded[0] == rows[0]
    assert loaded[1].B_error is None
    assert loaded[1].error == "EigenSolverError: stalled"
