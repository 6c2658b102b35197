import json
import math

import numpy as np
import pytest

from oraclebench import psi_alpha_norm, vc_rate
from oraclebench.cli import main


@pytest.fixture
def finite_gap_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(
        json.dumps(
            {
                "scenario": "FiniteGap",
                "nGrid": [64, 128],
                "epsilon": 0.0019,
                "replications": 20,
                "masterSeed": 777,
                "gamma": 0.5,
            }
        )
    )
    return path


def run_cli(args):
    return main([str(a) for a in args])


class TestExperiment:
    def test_valid_run_writes_artifacts(self, finite_gap_config, tmp_path):
        out = tmp_path / "out"
        assert run_cli(["experiment", "--config", finite_gap_config, "--out", out]) == 0
        assert (out / "rows.csv").is_file()
        assert (out / "summary.csv").is_file()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["masterSeed"] == 777
        assert manifest["toolVersion"]

    def test_missing_ngrid_exits_2_naming_field(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"scenario": "FiniteGap"}))
        code = run_cli(["experiment", "--config", path, "--out", tmp_path / "o"])
        assert code == 2
        assert "nGrid" in capsys.readouterr().err

    def test_reruns_are_byte_identical(self, finite_gap_config, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run_cli(["experiment", "--config", finite_gap_config, "--out", out1]) == 0
        assert run_cli(["experiment", "--config", finite_gap_config, "--out", out2]) == 0
        assert (out1 / "rows.csv").read_bytes() == (out2 / "rows.csv").read_bytes()
        assert (out1 / "summary.csv").read_bytes() == (out2 / "summary.csv").read_bytes()

    def test_worker_count_does_not_change_output(self, finite_gap_config, tmp_path):
        out1, out2 = tmp_path / "w1", tmp_path / "w4"
        assert run_cli(
            ["experiment", "--config", finite_gap_config, "--out", out1, "--workers", 1]
        ) == 0
        assert run_cli(
            ["experiment", "--config", finite_gap_config, "--out", out2, "--workers", 4]
        ) == 0
        assert (out1 / "rows.csv").read_bytes() == (out2 / "rows.csv").read_bytes()

    def test_set_override_changes_seed(self, finite_gap_config, tmp_path):
        out1, out2 = tmp_path / "s1", tmp_path / "s2"
        run_cli(["experiment", "--config", finite_gap_config, "--out", out1])
        run_cli(
            [
                "experiment",
                "--config",
                finite_gap_config,
                "--out",
                out2,
                "--set",
                "masterSeed=123",
            ]
        )
        assert (out1 / "rows.csv").read_bytes() != (out2 / "rows.csv").read_bytes()
        assert json.loads((out2 / "manifest.json").read_text())["masterSeed"] == 123

    def test_env_seed_override(self, finite_gap_config, tmp_path, monkeypatch):
        monkeypatch.setenv("ORACLEBENCH_SEED", "4242")
        out = tmp_path / "env"
        assert run_cli(["experiment", "--config", finite_gap_config, "--out", out]) == 0
        assert json.loads((out / "manifest.json").read_text())["masterSeed"] == 4242

    def test_set_beats_env(self, finite_gap_config, tmp_path, monkeypatch):
        monkeypatch.setenv("ORACLEBENCH_SEED", "4242")
        out = tmp_path / "both"
        run_cli(
            ["experiment", "--config", finite_gap_config, "--out", out, "--set", "masterSeed=555"]
        )
        assert json.loads((out / "manifest.json").read_text())["masterSeed"] == 555

    def test_unparsable_config_exits_2(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert run_cli(["experiment", "--config", path, "--out", tmp_path / "o"]) == 2

    def test_missing_config_file_exits_2(self, tmp_path):
        assert run_cli(["experiment", "--config", tmp_path / "nope.json", "--out", tmp_path / "o"]) == 2

    def test_bad_cli_usage_exits_2(self):
        assert run_cli(["experiment"]) == 2
        assert run_cli([]) == 2
        assert run_cli(["unknown-command"]) == 2


class TestCompute:
    def test_penalty_unit_inputs_prints_1(self, capsys):
        e = repr(math.e)
        code = run_cli(
            ["compute", "penalty", "--n", e, "--d", e, "--x", "1e-12", "--q", "2", "--Kd", "1"]
        )
        assert code == 0
        assert capsys.readouterr().out.strip() == "1"

    def test_psi_norm_zeros_prints_0(self, tmp_path, capsys):
        path = tmp_path / "zeros.txt"
        path.write_text("0\n0\n0\n")
        assert run_cli(["compute", "psi-norm", "--file", path, "--alpha", "1"]) == 0
        assert capsys.readouterr().out.strip() == "0"

    def test_psi_norm_matches_library(self, tmp_path, capsys):
        rng = np.random.default_rng(5)
        samples = rng.exponential(1.0, 50)
        path = tmp_path / "x.txt"
        path.write_text("\n".join(repr(float(v)) for v in samples))
        assert run_cli(["compute", "psi-norm", "--file", path, "--alpha", "1.5", "--tol", "1e-10"]) == 0
        printed = capsys.readouterr().out.strip()
        expected = psi_alpha_norm(samples, 1.5, tol=1e-10).value
        assert printed == f"{expected:.12g}"

    def test_fixed_point_sqrt_table(self, tmp_path, capsys):
        grid = np.linspace(0.0, 400.0, 40001)
        path = tmp_path / "table.txt"
        path.write_text("\n".join(f"{float(lam)!r} {math.sqrt(lam)!r}" for lam in grid))
        assert run_cli(["compute", "fixed-point", "--table", path, "--epsilon", "0.4"]) == 0
        value = float(capsys.readouterr().out.strip())
        assert value == pytest.approx(100.0, abs=0.1)

    def test_massart_rate_matches_library(self, capsys):
        args = ["compute", "massart-rate", "--V", "8", "--n", "128", "--x", "2", "--epsilon", "0.25"]
        assert run_cli(args) == 0
        printed = capsys.readouterr().out.strip()
        assert printed == f"{vc_rate(8, 128, 2.0, 0.25):.12g}"

    def test_rho_a_and_rho_b(self, capsys):
        assert run_cli(
            ["compute", "rho-a", "--lambda-star", "0.7", "--bn", "0", "--Bn", "0",
             "--epsilon", "0.25", "--x", "1", "--n", "100"]
        ) == 0
        assert capsys.readouterr().out.strip() == "0.7"
        assert run_cli(
            ["compute", "rho-b", "--n", "256", "--d", "20", "--q", "2", "--Kd", "1",
             "--epsilon", "0.25", "--r", "1", "--x", "1"]
        ) == 0
        assert float(capsys.readouterr().out.strip()) > 0

    def test_dudley_two_points(self, tmp_path, capsys):
        path = tmp_path / "pts.txt"
        path.write_text("0.0 0.0\n1.0 0.0\n")
        assert run_cli(["compute", "dudley", "--file", path]) == 0
        value = float(capsys.readouterr().out.strip())
        assert value == pytest.approx(math.sqrt(math.log(2)), rel=1e-9)

    def test_bad_args_exit_2(self, tmp_path):
        assert run_cli(["compute", "penalty", "--n", "1", "--d", "2", "--x", "1", "--Kd", "1"]) == 2
        assert run_cli(["compute", "psi-norm", "--file", tmp_path / "missing.txt"]) == 2
        assert run_cli(["compute", "nonsense"]) == 2
