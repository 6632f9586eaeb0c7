"""Command-line pipeline tests: artifacts, exit codes, determinism."""

import filecmp
import json
import os

import numpy as np
import pytest

from henckyflow.cli import main

CONFIGS = os.path.join(os.path.dirname(__file__), "..", "configs")


def write_cfg(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def small_trapezoid_cfg(tmp_path, out_dir, **solver_overrides):
    cfg = json.load(open(os.path.join(CONFIGS, "trapezoid.cfg")))
    cfg["h"] = 1 / 16
    cfg["output_dir"] = str(out_dir)
    cfg["solver"].update(solver_overrides)
    cfg["analysis"]["spacing"] = 0.12
    return write_cfg(tmp_path, "trap.cfg", cfg)


class TestSolve:
    def test_artifacts_and_exit_code(self, tmp_path):
        out = tmp_path / "out"
        cfg = small_trapezoid_cfg(tmp_path, out)
        assert main(["solve", cfg]) == 0
        for name in ("fields_tri.csv", "fields_node.csv", "energy_history.csv",
                     "solve_report.json", "mesh.txt"):
            assert (out / name).exists()
        report = json.load(open(out / "solve_report.json"))
        assert report["div_residual"] <= 0.05
        assert report["converged"] is True

    def test_increasing_schedule_exit_1(self, tmp_path, capsys):
        cfg = small_trapezoid_cfg(tmp_path, tmp_path / "o",
                                  eps_schedule=[1e-4, 1e-3])
        assert main(["solve", cfg]) == 1
        assert "strictly decreasing" in capsys.readouterr().err

    def test_all_neumann_exit_1(self, tmp_path, capsys):
        cfg = json.load(open(os.path.join(CONFIGS, "trapezoid.cfg")))
        for seg in cfg["domain"]["segments"]:
            seg.pop("affine", None)
            seg["kind"] = "neumann"
            seg["g"] = 0.0
        path = write_cfg(tmp_path, "bad.cfg", cfg)
        assert main(["solve", path]) == 1
        assert "Dirichlet" in capsys.readouterr().err

    def test_parse_error_with_position(self, tmp_path, capsys):
        path = tmp_path / "broken.cfg"
        path.write_text('{\n  "h": ,\n}')
        assert main(["solve", str(path)]) == 1
        err = capsys.readouterr().err
        assert "line 2" in err and "column" in err

    def test_not_converged_exit_2(self, tmp_path):
        out = tmp_path / "out"
        cfg = small_trapezoid_cfg(tmp_path, out, max_iters_per_eps=3,
                                  grad_tol=1e-16, energy_tol=1e-16)
        assert main(["solve", cfg]) == 2
        assert (out / "fields_tri.csv").exists()  # artifacts still written


class TestAnalyze:
    def test_writes_analysis_artifacts(self, tmp_path):
        out = tmp_path / "out"
        cfg = small_trapezoid_cfg(tmp_path, out)
        assert main(["solve", cfg]) == 0
        assert main(["analyze", str(out), cfg]) == 0
        for name in ("decomposition.json", "characteristics.csv",
                     "characteristics.svg", "diagnostics.json"):
            assert (out / name).exists()
        dec = json.load(open(out / "decomposition.json"))
        assert dec["fans"] == []
        assert len(dec["constant_zones"]) == 1


class TestOracleVerify:
    def test_round_trip_trapezoid(self, tmp_path, capsys):
        out = tmp_path / "oracle_out"
        orc = os.path.join(CONFIGS, "oracle_trapezoid.cfg")
        assert main(["oracle", orc, "--h", str(1 / 32), "--out", str(out)]) == 0
        assert (out / "oracle_truth.json").exists()
        code = main(["verify", str(out), "--truth", str(out / "oracle_truth.json")])
        table = capsys.readouterr().out
        assert code == 0
        assert "stress_error_vs_truth" in table
        recs = json.load(open(out / "diagnostics.json"))
        assert all(r["pass"] for r in recs)

    def test_round_trip_fan(self, tmp_path):
        # h = 1/64: per-triangle sampling of the vortex needs this resolution
        # for the per-line sup deviations to clear the thresholds
        out = tmp_path / "fan_out"
        orc = os.path.join(CONFIGS, "oracle_fan.cfg")
        assert main(["oracle", orc, "--h", str(1 / 64), "--out", str(out)]) == 0
        assert main(["verify", str(out), "--truth",
                     str(out / "oracle_truth.json")]) == 0

    def test_byte_deterministic_artifacts(self, tmp_path):
        orc = os.path.join(CONFIGS, "oracle_trapezoid.cfg")
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["oracle", orc, "--h", str(1 / 16), "--out", str(out),
                         "--reproducible"]) == 0
            assert main(["verify", str(out)]) == 0
        names = ["fields_tri.csv", "fields_node.csv", "energy_history.csv",
                 "solve_report.json", "oracle_truth.json", "mesh.txt",
                 "diagnostics.json"]
        for name in names:
            assert filecmp.cmp(a / name, b / name, shallow=False), name


class TestUsage:
    def test_unknown_command_exit_1(self, capsys):
        assert main(["frobnicate"]) == 1

    def test_missing_file_exit_1(self, capsys):
        assert main(["solve", "/no/such/config.json"]) == 1
