"""End-to-end command-line workflows on small fixture data."""

import json
import shutil

import numpy as np
import pytest
from click.testing import CliRunner

from gwire.cli import main

from .conftest import FIXTURES


@pytest.fixture()
def runner():
    return CliRunner()


def _fixture_args(tmp_path, extra=()):
    return [
        str(FIXTURES / "example1_x.csv"),
        str(FIXTURES / "example1_responses.json"),
        "--graph", str(FIXTURES / "example1_graph.json"),
        "--bound",
        *extra,
    ]


def _strip_wall_time(payload: dict) -> dict:
    payload = dict(payload)
    manifest = dict(payload["manifest"])
    manifest.pop("wall_time")
    payload["manifest"] = manifest
    return payload


class TestFit:
    def test_fixture_roundtrip(self, runner, tmp_path):
        out = tmp_path / "fit"
        result = runner.invoke(main, ["fit", *_fixture_args(tmp_path),
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        payload = json.loads((out / "result.json").read_text())
        assert set(payload["active_set"]) <= set(range(30))
        assert payload["d"] == 1
        assert (out / "B_hat.csv").exists()
        assert (out / "directions.csv").exists()
        assert (out / "eigen_scree.png").exists()
        header = (out / "directions.csv").read_text().splitlines()[0]
        assert header == "beta1"

    def test_precision_csv_graph(self, runner, tmp_path):
        out = tmp_path / "fit"
        args = [
            "fit",
            str(FIXTURES / "example1_x.csv"),
            str(FIXTURES / "example1_responses.json"),
            "--graph", str(FIXTURES / "example1_precision.csv"),
            "--bound", "--out", str(out),
        ]
        result = runner.invoke(main, args)
        assert result.exit_code == 0, result.output

    def test_huge_lambda_empty_active_set(self, runner, tmp_path):
        out = tmp_path / "fit"
        result = runner.invoke(main, ["fit", *_fixture_args(tmp_path),
                                      "--lambda", "1e9", "--out", str(out)])
        assert result.exit_code == 0, result.output
        payload = json.loads((out / "result.json").read_text())
        assert payload["active_set"] == []

    def test_missing_response_file(self, runner, tmp_path):
        result = runner.invoke(main, [
            "fit", str(FIXTURES / "example1_x.csv"), str(tmp_path / "nope.json"),
        ])
        assert result.exit_code == 2
        assert "nope.json" in result.output

    def test_gwire_requires_graph(self, runner, tmp_path):
        result = runner.invoke(main, [
            "fit", str(FIXTURES / "example1_x.csv"),
            str(FIXTURES / "example1_responses.json"),
        ])
        assert result.exit_code == 2
        assert "--graph" in result.output

    def test_response_count_mismatch(self, runner, tmp_path):
        short = tmp_path / "short.json"
        records = json.loads((FIXTURES / "example1_responses.json").read_text())
        short.write_text(json.dumps(records[:5]))
        result = runner.invoke(main, [
            "fit", str(FIXTURES / "example1_x.csv"), str(short),
            "--graph", str(FIXTURES / "example1_graph.json"),
        ])
        assert result.exit_code == 2
        assert "5 responses" in result.output

    def test_swire_penalty_without_graph(self, runner, tmp_path):
        out = tmp_path / "fit"
        result = runner.invoke(main, [
            "fit", str(FIXTURES / "example1_x.csv"),
            str(FIXTURES / "example1_responses.json"),
            "--bound", "--penalty", "swire1", "--lambda", "0.01",
            "--out", str(out),
        ])
        assert result.exit_code == 0, result.output

    def test_deterministic_output(self, runner, tmp_path):
        payloads = []
        for name in ("a", "b"):
            out = tmp_path / name
            result = runner.invoke(main, ["fit", *_fixture_args(tmp_path),
                                          "--seed", "3", "--out", str(out)])
            assert result.exit_code == 0, result.output
            payloads.append(_strip_wall_time(
                json.loads((out / "result.json").read_text())
            ))
            # The delimited outputs must match byte for byte.
        a, b = tmp_path / "a", tmp_path / "b"
        assert payloads[0] == payloads[1]
        assert (a / "B_hat.csv").read_bytes() == (b / "B_hat.csv").read_bytes()
        assert (a / "directions.csv").read_bytes() == (b / "directions.csv").read_bytes()


class TestDim:
    def test_ladle_outputs(self, runner, tmp_path):
        out = tmp_path / "dim"
        result = runner.invoke(main, ["dim", *_fixture_args(tmp_path),
                                      "--boot", "10", "--out", str(out)])
        assert result.exit_code == 0, result.output
        payload = json.loads((out / "ladle.json").read_text())
        assert payload["d_hat"] >= 0
        assert len(payload["f"]) == len(payload["h"])
        curves = (out / "ladle_curves.csv").read_text().splitlines()
        assert curves[0] == "k,f,h,f_plus_h"
        assert len(curves) == len(payload["f"]) + 1
        assert (out / "ladle.png").exists()

    def test_graph_required(self, runner, tmp_path):
        result = runner.invoke(main, [
            "dim", str(FIXTURES / "example1_x.csv"),
            str(FIXTURES / "example1_responses.json"),
        ])
        assert result.exit_code == 2


class TestSimulate:
    def test_tiny_scenario(self, runner, tmp_path):
        out = tmp_path / "sim"
        result = runner.invoke(main, [
            "simulate", "--example", "1", "--n", "120", "--p", "25",
            "--reps", "2", "--seed", "5", "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        report = json.loads((out / "report.json").read_text())
        assert report["aggregate"]["replicates"] == 2
        lines = (out / "replicates.csv").read_text().splitlines()
        assert lines[0].startswith("replicate,general_loss")
        assert len(lines) == 3
        assert (out / "loss_boxplot.png").exists()

    def test_config_file_with_overrides(self, runner, tmp_path):
        cfg = tmp_path / "scenario.cfg"
        cfg.write_text("example = 1\nn = 120\np = 25\nreps = 1\nseed = 9\n")
        out = tmp_path / "sim"
        result = runner.invoke(main, ["simulate", "--config", str(cfg),
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        report = json.loads((out / "report.json").read_text())
        assert report["manifest"]["config"]["spec"]["n"] == 120
        assert report["manifest"]["seed"] == 9

    def test_malformed_config(self, runner, tmp_path):
        cfg = tmp_path / "scenario.cfg"
        cfg.write_text("example 1\n")
        result = runner.invoke(main, ["simulate", "--config", str(cfg)])
        assert result.exit_code == 2
        assert "key=value" in result.output

    def test_invalid_spec_value(self, runner, tmp_path):
        result = runner.invoke(main, [
            "simulate", "--example", "1", "--n", "120", "--p", "10", "--reps", "1",
        ])
        assert result.exit_code == 2


class TestGlassoCommand:
    def test_outputs(self, runner, tmp_path):
        out = tmp_path / "glasso"
        result = runner.invoke(main, [
            "glasso", str(FIXTURES / "example1_x.csv"), "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        payload = json.loads((out / "adjacency.json").read_text())
        assert len(payload["neighbors"]) == 30
        for i, ni in enumerate(payload["neighbors"]):
            assert i in ni
        omega = np.genfromtxt(out / "precision.csv", delimiter=",")
        assert omega.shape == (30, 30)
        assert (out / "pattern.png").exists()

    def test_missing_input(self, runner, tmp_path):
        result = runner.invoke(main, ["glasso", str(tmp_path / "absent.csv")])
        assert result.exit_code == 2


class TestManifest:
    def test_fields_present(self, runner, tmp_path):
        out = tmp_path / "fit"
        result = runner.invoke(main, ["fit", *_fixture_args(tmp_path),
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        manifest = json.loads((out / "result.json").read_text())["manifest"]
        assert manifest["command"] == "fit"
        assert manifest["seed"] == 0
        assert set(manifest["input_digests"]) == {"x_csv", "responses_json", "graph"}
        for digest in manifest["input_digests"].values():
            assert len(digest) == 64
        assert manifest["wall_time"] > 0

    def test_digest_changes_with_input(self, runner, tmp_path):
        x_copy = tmp_path / "x.csv"
        shutil.copy(FIXTURES / "example1_x.csv", x_copy)
        out1 = tmp_path / "o1"
        r1 = runner.invoke(main, [
            "fit", str(x_copy), str(FIXTURES / "example1_responses.json"),
            "--graph", str(FIXTURES / "example1_graph.json"), "--bound",
            "--lambda", "0.05", "--out", str(out1),
        ])
        assert r1.exit_code == 0, r1.output
        with x_copy.open("a") as fh:
            fh.write("\n")
        out2 = tmp_path / "o2"
        r2 = runner.invoke(main, [
            "fit", str(x_copy), str(FIXTURES / "example1_responses.json"),
            "--graph", str(FIXTURES / "example1_graph.json"), "--bound",
            "--lambda", "0.05", "--out", str(out2),
        ])
        m1 = json.loads((out1 / "result.json").read_text())["manifest"]
        m2 = json.loads((out2 / "result.json").read_text())["manifest"]
        assert m1["input_digests"]["x_csv"] != m2["input_digests"]["x_csv"]
