"""CLI: exit codes, file outputs, determinism, validation."""

import json
import subprocess
import sys

import numpy as np
import pytest

from anmasym.cli import main


def run_cli(argv):
    """Invoke main() catching argparse's SystemExit for bad flags."""
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code


class TestGenerate:
    def test_writes_dataset_and_sidecar(self, tmp_path):
        out = tmp_path / "d.csv"
        code = run_cli([
            "generate", "--oracle", "exp:a=1,norm", "--sigma", "0.1",
            "--n", "1000", "--seed", "7", "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "c,e"
        assert len(lines) == 1001
        sidecar = json.loads((tmp_path / "d.json").read_text())
        assert sidecar["seed"] == 7
        assert sidecar["parameters"]["oracle"] == "exp:a=1,norm"
        assert sidecar["parameters"]["noise_policy"] == "resample"

    def test_repeat_is_bit_identical(self, tmp_path):
        argv = [
            "generate", "--oracle", "exp:a=1,norm", "--sigma", "0.1",
            "--n", "200", "--seed", "7",
        ]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli(argv + ["--out", str(a)]) == 0
        assert run_cli(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert (tmp_path / "a.json").read_text().replace('"a.', '"x.') \
            == (tmp_path / "b.json").read_text().replace('"b.', '"x.')

    def test_negative_sigma_exits_2(self, tmp_path):
        code = run_cli([
            "generate", "--oracle", "linear,norm", "--sigma", "-1",
            "--out", str(tmp_path / "d.csv"),
        ])
        assert code == 2
        assert not (tmp_path / "d.csv").exists()

    def test_bad_oracle_exits_2(self, tmp_path):
        code = run_cli([
            "generate", "--oracle", "quadratic", "--sigma", "0.1",
            "--out", str(tmp_path / "d.csv"),
        ])
        assert code == 2
        assert not (tmp_path / "d.csv").exists()


class TestTheory:
    def test_stdout_report_linear(self, capsys):
        code = run_cli(["theory", "--oracle", "linear,norm",
                        "--sigma", "0.1"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["anticausal_integral"] == pytest.approx(1.0,
                                                               abs=1e-9)
        assert payload["expected_causal_error"] == pytest.approx(0.01)
        assert payload["expected_anticausal_error"] == pytest.approx(0.01,
                                                                     abs=1e-9)
        assert payload["config"]["oracle"] == "linear,norm"

    def test_exp_integral(self, tmp_path):
        out = tmp_path / "rep.json"
        code = run_cli(["theory", "--oracle", "exp:a=1,norm",
                        "--sigma", "0.1", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["anticausal_integral"] == pytest.approx(1.27645802,
                                                               abs=1e-5)

    def test_pow02_bound(self, capsys):
        code = run_cli(["theory", "--oracle", "pow:a=0.2,norm",
                        "--sigma", "0.05"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert np.isfinite(payload["anticausal_integral"])
        assert payload["anticausal_lower_bound"] == pytest.approx(0.0025)

    def test_divergent_configuration_exits_1(self, capsys):
        code = run_cli(["theory", "--oracle", "pow:a=5,norm",
                        "--sigma", "0.05"])
        assert code == 1


class TestBench:
    def test_known_csv_rows(self, tmp_path):
        out = tmp_path / "known"
        code = run_cli([
            "bench", "known", "--oracles", "linear,exp:a=5",
            "--sigmas", "0,0.1,0.5", "--runs", "3", "--n", "100",
            "--seed", "1", "--out", str(out),
        ])
        assert code == 0
        lines = (tmp_path / "known.csv").read_text().strip().split("\n")
        assert len(lines) == 1 + 6
        payload = json.loads((tmp_path / "known.json").read_text())
        assert len(payload["reports"]) == 6
        assert payload["reports"][0]["config"]["runs"] == 3

    def test_unknown_ordering(self, tmp_path):
        out = tmp_path / "unknown"
        code = run_cli([
            "bench", "unknown", "--oracles", "exp:a=1,norm",
            "--sigmas", "0.01", "--runs", "5", "--n", "300",
            "--seed", "1", "--out", str(out),
        ])
        assert code == 0
        payload = json.loads((tmp_path / "unknown.json").read_text())
        rep = payload["reports"][0]
        assert rep["rmse_causal_mean"] < rep["rmse_anticausal_mean"]

    def test_pairs_summary(self, tmp_path):
        from test_bench import _write_corpus
        corpus = tmp_path / "corpus"
        corpus.mkdir()
        directory, meta = _write_corpus(corpus)
        out = tmp_path / "pairs"
        code = run_cli(["bench", "pairs", "--dir", directory,
                        "--meta", meta, "--out", str(out)])
        assert code == 0
        payload = json.loads((tmp_path / "pairs.json").read_text())
        assert payload["counts"]["scored"] == 4
        assert "win_fraction" in payload
        assert payload["skip_reasons"]["pair0005"] == "multivariate"

    def test_missing_corpus_exits_1(self, tmp_path):
        code = run_cli(["bench", "pairs", "--dir", str(tmp_path),
                        "--meta", str(tmp_path / "nope"),
                        "--out", str(tmp_path / "x")])
        assert code == 1
        assert not (tmp_path / "x.csv").exists()

    def test_bench_determinism(self, tmp_path):
        argv = [
            "bench", "known", "--oracles", "exp:a=1,norm",
            "--sigmas", "0.1", "--runs", "3", "--n", "100", "--seed", "5",
        ]
        assert run_cli(argv + ["--out", str(tmp_path / "r1")]) == 0
        assert run_cli(argv + ["--out", str(tmp_path / "r2")]) == 0
        assert (tmp_path / "r1.csv").read_bytes() == \
            (tmp_path / "r2.csv").read_bytes()
        assert (tmp_path / "r1.json").read_bytes() == \
            (tmp_path / "r2.json").read_bytes()

    def test_invalid_sigma_list_exits_2(self, tmp_path):
        code = run_cli([
            "bench", "known", "--oracles", "linear", "--sigmas", "0.1,-2",
            "--out", str(tmp_path / "x"),
        ])
        assert code == 2
        assert not (tmp_path / "x.csv").exists()


def test_module_entry_point(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "anmasym", "theory", "--oracle",
         "linear,norm", "--sigma", "0.1"],
        capture_output=True, text=True, timeout=120,
    )
    assert result.returncode == 0
    payload = json.loads(result.stdout)
    assert payload["expected_causal_error"] == pytest.approx(0.01)
