"""Command-line interface tests: full pipeline on a tiny problem, exit
codes, JSON error surface, and prerequisite diagnostics."""
import json
import os

import pytest

from annealmap.cli import main
from annealmap.ising import IsingProblem, save_instance

TINY_PROBLEM = IsingProblem(3, {}, {(0, 1): -1.0, (1, 2): -1.0}, name="tiny")


def _write_config(tmp_path, **overrides):
    inst = tmp_path / "tiny.json"
    if not inst.exists():
        save_instance(TINY_PROBLEM, str(inst))
    doc = {
        "problem": {"file": "tiny.json"},
        "backend": {"dt": 2e-5},
        "time_scale": 0.001,
        "h_grid": {"values": [0.0, 3.0]},
        "targets": [0],
        "master_seed": 1,
    }
    doc.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def _stderr_json(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    return json.loads(err[-1])


@pytest.fixture(scope="module")
def pipeline_dir(tmp_path_factory):
    """One sweep shared by the downstream-command tests."""
    tmp_path = tmp_path_factory.mktemp("cli")
    config = _write_config(tmp_path)
    out = str(tmp_path / "out")
    assert main(["sweep", "--config", config, "--out", out]) == 0
    return tmp_path, config, out


class TestPipeline:
    def test_sweep_then_analyze_cluster_network_report(self, pipeline_dir):
        _, _, out = pipeline_dir
        assert os.path.exists(os.path.join(out, "curves.csv"))

        assert main(["analyze", "--out", out]) == 0
        for name in ("records.csv", "averages.csv", "correlations.json"):
            assert os.path.exists(os.path.join(out, name))
        with open(os.path.join(out, "correlations.json"),
                  encoding="utf-8") as fh:
            corr = json.load(fh)
        assert set(corr) == {"per_gs", "pooled"}
        assert set(corr["per_gs"]) == {"0"}
        assert set(corr["per_gs"]["0"]) == {"hamming", "energy", "delta",
                                            "ra_pgs"}

        assert main(["cluster", "--out", out, "--k", "2"]) == 0
        with open(os.path.join(out, "clusters.csv"),
                  encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        assert lines[0] == "gs_index,initial_state,cluster"
        assert len(lines) == 1 + 8  # every initial state is labelled

        assert main(["network", "--out", out]) == 0
        for ext in ("json", "graphml", "dot"):
            assert os.path.exists(
                os.path.join(out, "networks", f"g00000.{ext}"))

        assert main(["report", "--out", out]) == 0
        report = os.path.join(out, "report")
        for name in ("chi_map_g00000.svg", "metrics_g00000.svg",
                     "curves_g00000.svg", "network_g00000.svg",
                     "average_chi.svg", "summary.txt"):
            assert os.path.exists(os.path.join(report, name))

        # the manifest tracks analysis artifacts too
        with open(os.path.join(out, "manifest.json"),
                  encoding="utf-8") as fh:
            manifest = json.load(fh)
        assert "records.csv" in manifest["files"]
        assert "clusters.csv" in manifest["files"]
        assert "networks/g00000.json" in manifest["files"]

    def test_cluster_is_deterministic_across_invocations(self,
                                                         pipeline_dir):
        _, _, out = pipeline_dir
        assert main(["cluster", "--out", out, "--k", "2"]) == 0
        with open(os.path.join(out, "clusters.csv"), "rb") as fh:
            first = fh.read()
        assert main(["cluster", "--out", out, "--k", "2"]) == 0
        with open(os.path.join(out, "clusters.csv"), "rb") as fh:
            assert fh.read() == first

    def test_sweep_seed_override_changes_sampled_output(self, tmp_path):
        config = _write_config(tmp_path, exact=False, num_reads=50)
        out_a = str(tmp_path / "a")
        out_b = str(tmp_path / "b")
        assert main(["sweep", "--config", config, "--out", out_a,
                     "--seed", "7"]) == 0
        assert main(["sweep", "--config", config, "--out", out_b,
                     "--seed", "8"]) == 0
        with open(os.path.join(out_a, "curves.csv"), "rb") as fh:
            curves_a = fh.read()
        with open(os.path.join(out_b, "curves.csv"), "rb") as fh:
            curves_b = fh.read()
        assert curves_a != curves_b
        with open(os.path.join(out_a, "manifest.json"),
                  encoding="utf-8") as fh:
            assert json.load(fh)["master_seed"] == 7


class TestErrorSurface:
    def test_invalid_config_names_field_path(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"problem": {"bundled": "n6"},
                                   "mode": "diagonal"}), encoding="utf-8")
        out = str(tmp_path / "out")
        assert main(["sweep", "--config", str(bad), "--out", out]) == 1
        err = _stderr_json(capsys)
        assert err["error"] == "ConfigError"
        assert "config.mode" in err["message"]

    def test_report_without_analyze_names_the_command(self, tmp_path,
                                                      capsys):
        config = _write_config(tmp_path)
        out = str(tmp_path / "out")
        assert main(["sweep", "--config", config, "--out", out]) == 0
        assert main(["report", "--out", out]) == 1
        err = _stderr_json(capsys)
        assert err["error"] == "FileNotFoundError"
        assert "run the analyze command first" in err["message"]

    def test_analyze_without_sweep_names_the_command(self, tmp_path,
                                                     capsys):
        out = str(tmp_path / "empty")
        os.makedirs(out)
        assert main(["analyze", "--out", out]) == 1
        err = _stderr_json(capsys)
        assert "sweep" in err["message"]

    def test_usage_error_is_json_with_exit_2(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main(["defragment"])
        assert exc_info.value.code == 2
        err = _stderr_json(capsys)
        assert err["error"] == "UsageError"

    def test_missing_out_everywhere(self, tmp_path, capsys):
        config = _write_config(tmp_path)
        assert main(["sweep", "--config", config]) == 1
        err = _stderr_json(capsys)
        assert "--out" in err["message"]


class TestTile:
    def test_tile_path_pattern_on_p2(self, tmp_path):
        pattern = IsingProblem(3, {}, {(0, 1): 1.0, (1, 2): -1.0},
                               name="path3")
        pattern_path = tmp_path / "path3.json"
        save_instance(pattern, str(pattern_path))
        out = str(tmp_path / "tiles")
        assert main(["tile", "--m", "2", "--pattern", str(pattern_path),
                     "--out", out]) == 0
        with open(os.path.join(out, "tile_report.json"),
                  encoding="utf-8") as fh:
            summary = json.load(fh)
        assert summary["pegasus_m"] == 2
        assert summary["fabric_nodes"] == 40
        assert summary["embeddings"] >= 2
        assert summary["validation_findings"] == []
        assert os.path.exists(os.path.join(out, "embeddings.json"))

    def test_tile_respects_defect_file(self, tmp_path):
        pattern = IsingProblem(2, {}, {(0, 1): 1.0}, name="pair")
        pattern_path = tmp_path / "pair.json"
        save_instance(pattern, str(pattern_path))
        defects = tmp_path / "defects.txt"
        # linear ids 12 and 13 are fabric qubits of P2
        defects.write_text("12\n13\n", encoding="utf-8")
        out = str(tmp_path / "tiles")
        assert main(["tile", "--m", "2", "--pattern", str(pattern_path),
                     "--defects", str(defects), "--out", out]) == 0
        with open(os.path.join(out, "tile_report.json"),
                  encoding="utf-8") as fh:
            summary = json.load(fh)
        assert summary["defects"] == 2
        assert summary["fabric_nodes"] == 38
        with open(os.path.join(out, "embeddings.json"),
                  encoding="utf-8") as fh:
            embeddings = json.load(fh)
        used = [q for emb in embeddings for q in emb.values()]
        assert 12 not in used and 13 not in used

    def test_tile_unknown_bundled_pattern_fails_cleanly(self, tmp_path,
                                                        capsys):
        out = str(tmp_path / "tiles")
        assert main(["tile", "--m", "2", "--pattern", "nonexistent.json",
                     "--out", out]) == 1
        err = _stderr_json(capsys)
        assert err["error"] in ("FileNotFoundError", "OSError")


class TestVersion:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main(["--version"])
        assert exc_info.value.code == 0
        assert capsys.readouterr().out.startswith("annealmap ")
