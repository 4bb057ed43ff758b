import json
import os

import pandas as pd
import pytest

from hitlab.cli.main import execute
from hitlab.engine.graph_model import sample_er_graph
from hitlab.engine.hitting import mean_target_hitting_spectral
from hitlab.engine.spectral import build_normalized_adjacency, eigendecompose


@pytest.fixture(autouse=True)
def isolated_preferences(tmp_path, monkeypatch):
    monkeypatch.setenv("HITLAB_CONFIG", str(tmp_path / "no-prefs.json"))


def _load(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def _gen(tmp_path, name, n, p, seed):
    prefix = str(tmp_path / name)
    assert execute(["gen", "--n", str(n), "--p", str(p), "--seed", str(seed), "--out", prefix]) == 0
    return prefix


class TestGen:
    def test_writes_edge_list_and_metadata(self, tmp_path):
        prefix = _gen(tmp_path, "k3", 3, 1.0, 7)
        assert os.path.exists(prefix + ".csv")
        assert _load(prefix + ".json") == {"n": 3, "p": 1.0, "seed": 7, "rng_id": "numpy.PCG64"}

    def test_zero_vertices_is_usage_error(self, tmp_path):
        prefix = str(tmp_path / "bad")
        assert execute(["gen", "--n", "0", "--p", "0.5", "--seed", "1", "--out", prefix]) == 2
        assert not os.path.exists(prefix + ".csv")
        assert not os.path.exists(prefix + ".json")

    def test_probability_out_of_range(self, tmp_path):
        assert execute(["gen", "--n", "5", "--p", "1.5", "--seed", "1", "--out", str(tmp_path / "x")]) == 2

    def test_unknown_flag(self, tmp_path):
        assert execute(["gen", "--n", "5", "--p", "0.5", "--seed", "1", "--out", str(tmp_path / "x"), "--bogus"]) == 2

    def test_unknown_verb(self):
        assert execute(["plot"]) == 2


class TestHit:
    def test_k3_solve(self, tmp_path):
        prefix = _gen(tmp_path, "k3", 3, 1.0, 7)
        out = str(tmp_path / "hit.json")
        assert execute(["hit", "--in", prefix, "--target", "0", "--method", "solve", "--out", out]) == 0
        report = _load(out)
        assert report["H_j"] == pytest.approx(4 / 3)
        assert report["graph"]["rng_id"] == "numpy.PCG64"
        assert report["command"]["method"] == "solve"

    def test_spectral_matches_solve(self, tmp_path):
        prefix = _gen(tmp_path, "g", 60, 0.3, 11)
        a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
        assert execute(["hit", "--in", prefix, "--method", "spectral", "--out", a]) == 0
        assert execute(["hit", "--in", prefix, "--method", "solve", "--out", b]) == 0
        assert _load(a)["H_j"] == pytest.approx(_load(b)["H_j"], rel=1e-8)

    def test_spectral_report_carries_decomposition(self, tmp_path):
        prefix = _gen(tmp_path, "k3", 3, 1.0, 7)
        out = str(tmp_path / "hit.json")
        assert execute(["hit", "--in", prefix, "--out", out]) == 0
        decomposition = _load(out)["decomposition"]
        assert decomposition["spectral_sum"] == pytest.approx(4 / 9)
        assert decomposition["Z_n"] == pytest.approx(1 / 9)
        assert decomposition["residual"] <= 1e-12

    def test_pair_monte_carlo(self, tmp_path):
        prefix = _gen(tmp_path, "edge", 2, 1.0, 0)
        out = str(tmp_path / "pair.json")
        args = ["hit", "--in", prefix, "--method", "mc", "--source", "0", "--target", "1", "--trials", "100", "--out", out]
        assert execute(args) == 0
        report = _load(out)
        assert report["H_ij"] == 1.0
        assert report["std_error"] == 0.0

    def test_pair_spectral(self, tmp_path):
        prefix = _gen(tmp_path, "k3", 3, 1.0, 7)
        out = str(tmp_path / "pair.json")
        assert execute(["hit", "--in", prefix, "--source", "2", "--target", "0", "--out", out]) == 0
        assert _load(out)["H_ij"] == pytest.approx(2.0)

    def test_full_matrix_aggregates(self, tmp_path):
        prefix = _gen(tmp_path, "k3", 3, 1.0, 7)
        out = str(tmp_path / "full.json")
        assert execute(["hit", "--in", prefix, "--method", "solve", "--full", "--out", out]) == 0
        aggregates = _load(out)["aggregates"]
        assert aggregates["H_start"] == pytest.approx([4 / 3] * 3)
        assert aggregates["H_target"] == pytest.approx([4 / 3] * 3)

    def test_full_refused_for_monte_carlo(self, tmp_path):
        prefix = _gen(tmp_path, "k3", 3, 1.0, 7)
        assert execute(["hit", "--in", prefix, "--method", "mc", "--full"]) == 2

    def test_disconnected_is_domain_error(self, tmp_path, capsys):
        prefix = _gen(tmp_path, "empty", 5, 0.0, 1)
        assert execute(["hit", "--in", prefix, "--method", "solve"]) == 1
        assert "NotConnected" in capsys.readouterr().err

    def test_solve_pair_source_out_of_range(self, tmp_path, capsys):
        prefix = _gen(tmp_path, "k3", 3, 1.0, 7)
        assert execute(["hit", "--in", prefix, "--method", "solve", "--source", "7", "--target", "0"]) == 1
        assert "IndexOutOfRange" in capsys.readouterr().err

    def test_solve_pair_same_vertex(self, tmp_path, capsys):
        prefix = _gen(tmp_path, "k3", 3, 1.0, 7)
        assert execute(["hit", "--in", prefix, "--method", "solve", "--source", "1", "--target", "1"]) == 1
        assert "SameVertex" in capsys.readouterr().err

    def test_missing_input_is_usage_error(self, tmp_path):
        assert execute(["hit", "--in", str(tmp_path / "nothing")]) == 2

    def test_malformed_input_is_domain_error(self, tmp_path, capsys):
        prefix = _gen(tmp_path, "k3", 3, 1.0, 7)
        with open(prefix + ".csv", "a", encoding="utf-8") as f:
            f.write("0,1\n")
        assert execute(["hit", "--in", prefix]) == 1
        assert "ParseError" in capsys.readouterr().err

    def test_stdout_when_no_out(self, tmp_path, capsys):
        prefix = _gen(tmp_path, "k3", 3, 1.0, 7)
        capsys.readouterr()
        assert execute(["hit", "--in", prefix, "--no-column"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert "H_column" not in report
        assert report["H_j"] == pytest.approx(4 / 3)


class TestSpectrum:
    def test_pipeline_equals_in_memory(self, tmp_path):
        prefix = _gen(tmp_path, "g", 80, 0.2, 3)
        out = str(tmp_path / "spec.json")
        assert execute(["spectrum", "--in", prefix, "--out", out]) == 0
        g = sample_er_graph(80, 0.2, 3)
        dec = eigendecompose(build_normalized_adjacency(g))
        report = _load(out)
        assert report["eigenvalues"] == dec.eigenvalues.tolist()
        assert report["identities"]["stationary_residual"] <= 1e-9

        hit_out = str(tmp_path / "hit.json")
        assert execute(["hit", "--in", prefix, "--out", hit_out]) == 0
        assert _load(hit_out)["H_j"] == mean_target_hitting_spectral(dec, g, 0).H_j

    def test_target_out_of_range(self, tmp_path, capsys):
        prefix = _gen(tmp_path, "k3", 3, 1.0, 7)
        assert execute(["spectrum", "--in", prefix, "--target", "5"]) == 1
        assert "IndexOutOfRange" in capsys.readouterr().err

    def test_eigenvector_dump(self, tmp_path):
        prefix = _gen(tmp_path, "k3", 3, 1.0, 7)
        vec = str(tmp_path / "vec.csv")
        assert execute(["spectrum", "--in", prefix, "--out", str(tmp_path / "s.json"), "--eigenvectors", vec]) == 0
        assert pd.read_csv(vec).shape == (3, 3)


class TestClt:
    def _config(self, tmp_path, **overrides):
        cfg = {
            "schema": 1,
            "n_grid": [20, 30],
            "p_rule": {"kind": "constant", "p": 0.5},
            "replications": 4,
            "master_seed": 9,
            "statistics": ["target", "edge"],
        }
        cfg.update(overrides)
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(cfg), encoding="utf-8")
        return str(path)

    def test_report_and_samples(self, tmp_path):
        out = str(tmp_path / "report.json")
        assert execute(["clt", "--config", self._config(tmp_path), "--out", out]) == 0
        report = _load(out)
        assert report["config"]["master_seed"] == 9
        assert report["rng_id"] == "numpy.PCG64"
        assert len(report["summaries"]) == 4
        samples = pd.read_csv(tmp_path / "report_samples.csv")
        assert list(samples.columns) == ["n", "p", "rep", "statistic", "value"]
        assert len(samples) == 16

    def test_same_seed_gives_identical_samples(self, tmp_path):
        cfg = self._config(tmp_path)
        a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        assert execute(["clt", "--config", cfg, "--out", str(tmp_path / "a.json"), "--samples", a]) == 0
        assert execute(["clt", "--config", cfg, "--out", str(tmp_path / "b.json"), "--samples", b]) == 0
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_invalid_config_is_domain_error(self, tmp_path, capsys):
        cfg = self._config(tmp_path, n_grid=[2])
        assert execute(["clt", "--config", cfg, "--out", str(tmp_path / "r.json")]) == 1
        assert "ConfigError" in capsys.readouterr().err

    def test_missing_config_is_usage_error(self, tmp_path):
        assert execute(["clt", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path / "r.json")]) == 2


class TestDiag:
    def test_stored_graph(self, tmp_path):
        prefix = _gen(tmp_path, "k3", 3, 1.0, 7)
        out = str(tmp_path / "diag.json")
        assert execute(["diag", "--in", prefix, "--p-scale", "0.99", "--out", out]) == 0
        report = _load(out)
        assert report["gap"]["max_abs_nontrivial"] == pytest.approx(0.5)
        assert report["negligibility"]["lambda_sq_term"] == pytest.approx(0.99 * 0.5)

    def test_series(self, tmp_path):
        out, samples = str(tmp_path / "diag.json"), str(tmp_path / "diag.csv")
        args = ["diag", "--n-grid", "20,40", "--p", "0.4", "--seeds", "3", "--out", out, "--samples", samples]
        assert execute(args) == 0
        report = _load(out)
        assert set(report["series"]) == {"20", "40"}
        assert "conjecture_ratio" in report["series"]["40"]
        assert os.path.exists(samples)

    def test_needs_a_source(self):
        assert execute(["diag"]) == 2


class TestSavePreferences:
    def test_flags_become_defaults(self, tmp_path, monkeypatch, capsys):
        prefs = tmp_path / "prefs.json"
        monkeypatch.setenv("HITLAB_CONFIG", str(prefs))
        prefix = _gen(tmp_path, "k3", 3, 1.0, 7)
        args = ["--log-level", "ERROR", "--save-prefs", "hit", "--in", prefix, "--target", "2", "--no-column"]
        assert execute(args) == 0
        assert _load(prefs) == {"log_level": "ERROR", "default_target": 2}

        capsys.readouterr()
        assert execute(["hit", "--in", prefix, "--no-column"]) == 0
        assert json.loads(capsys.readouterr().out)["target"] == 2

    def test_not_echoed_in_reports(self, tmp_path, monkeypatch):
        monkeypatch.setenv("HITLAB_CONFIG", str(tmp_path / "prefs.json"))
        prefix = _gen(tmp_path, "k3", 3, 1.0, 7)
        out = str(tmp_path / "hit.json")
        assert execute(["--save-prefs", "hit", "--in", prefix, "--out", out]) == 0
        assert "save_prefs" not in _load(out)["command"]
