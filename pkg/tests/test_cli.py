"""End-to-end command-line behavior: exit codes, files, determinism."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from chemoflux.cli import main

RUN_CFG = """
params.chi = 0.3
params.h = 5
params.alpha = 1
params.tau = 1
initial.width = 0.8
initial.amplitude = 3
grid.cells = 32
run.t_end = 0.2
run.sample_interval = 0.05
"""

CLASSIFY_BOUNDED = ["classify", "--tau", "0", "--chi", "1", "--h", "1",
                    "--alpha", "1", "--b", "5", "--c", "1", "--trace-c", "2"]


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestRun:
    def test_writes_series_and_manifest(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, RUN_CFG)
        out = tmp_path / "out"
        assert main(["run", cfg, "--out", str(out)]) == 0
        for name in ("plotMass.dat", "plotMax.dat", "manifest.json"):
            assert (out / name).exists()
        mass_lines = (out / "plotMass.dat").read_text().splitlines()
        assert mass_lines[0] == "a b"
        assert len(mass_lines) == 6  # t = 0, 0.05 ... 0.2
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["status"]["kind"] == "completed"
        assert manifest["paths"] == ["plotMass.dat", "plotMax.dat"]
        assert len(manifest["run_id"]) == 16
        captured = capsys.readouterr()
        assert "run: completed" in captured.out
        assert "t_final=0.2" in captured.out

    def test_reruns_are_byte_identical(self, tmp_path):
        cfg = write_cfg(tmp_path, RUN_CFG)
        out1, out2 = tmp_path / "one", tmp_path / "two"
        assert main(["run", cfg, "--out", str(out1)]) == 0
        assert main(["run", cfg, "--out", str(out2)]) == 0
        for name in ("plotMass.dat", "plotMax.dat", "manifest.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_default_out_dir_is_content_addressed(self, tmp_path, monkeypatch):
        cfg = write_cfg(tmp_path, RUN_CFG)
        monkeypatch.chdir(tmp_path)
        assert main(["run", cfg]) == 0
        dirs = [d for d in os.listdir(tmp_path) if d.startswith("out_")]
        assert len(dirs) == 1
        run_id = json.loads(
            (tmp_path / dirs[0] / "manifest.json").read_text())["run_id"]
        assert dirs[0] == f"out_{run_id}"

    def test_snapshots_are_emitted_on_request(self, tmp_path):
        cfg = write_cfg(tmp_path, RUN_CFG + (
            "output.snapshot_times = [0, 0.1]\n"
            "output.snapshot_resolution = 16\n"))
        out = tmp_path / "snap"
        assert main(["run", cfg, "--out", str(out)]) == 0
        for name in ("snapshot_t0.csv", "snapshot_t0.1.csv"):
            lines = (out / name).read_text().splitlines()
            assert lines[0] == "# -1 1 -1 1 16"
            assert len(lines) == 17
            first_row = lines[1].split(",")
            assert first_row[0] == "NaN"  # corner outside the disk
        manifest = json.loads((out / "manifest.json").read_text())
        assert "snapshot_t0.1.csv" in manifest["paths"]

    def test_snapshots_need_a_planar_domain(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, RUN_CFG + (
            "domain.dim = 1\noutput.snapshot_times = [0.1]\n"))
        assert main(["run", cfg, "--out", str(tmp_path / "x")]) == 1
        assert "two-dimensional" in capsys.readouterr().err

    def test_missing_config_file_exits_one(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "nope.cfg")]) == 1
        assert "error:" in capsys.readouterr().err

    def test_invalid_config_exits_one(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "params.chi = 0.3\n")
        assert main(["run", cfg, "--out", str(tmp_path / "x")]) == 1
        assert "missing required" in capsys.readouterr().err


class TestCompare:
    def test_variants_and_joined_table(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, RUN_CFG + "compare.alphas = [0.7, 1]\n")
        out = tmp_path / "cmp"
        assert main(["compare", cfg, "--out", str(out)]) == 0
        for tag in ("neumann", "alpha0.7", "alpha1"):
            assert (out / f"plotMass_{tag}.dat").exists()
            assert (out / f"plotMax_{tag}.dat").exists()
        lines = (out / "comparison.dat").read_text().splitlines()
        assert lines[0].split() == [
            "#", "t", "mass_neumann", "max_neumann", "mass_alpha0.7",
            "max_alpha0.7", "mass_alpha1", "max_alpha1"]
        table = np.array([[float(tok) for tok in ln.split()]
                          for ln in lines[1:]])
        # zero-total-flux baseline conserves mass; larger alpha gains more
        neumann, low, high = table[:, 1], table[:, 3], table[:, 5]
        assert np.max(np.abs(neumann - neumann[0])) < 1e-12 * neumann[0]
        assert np.all(high[1:] > low[1:])
        assert np.all(low[1:] > neumann[1:])
        manifest = json.loads((out / "manifest.json").read_text())
        assert set(manifest["status"]) == {"neumann", "alpha0.7", "alpha1"}
        assert "neumann: completed" in capsys.readouterr().out

    def test_baseline_can_be_disabled(self, tmp_path):
        cfg = write_cfg(tmp_path, RUN_CFG + (
            "compare.alphas = [0.5]\ncompare.neumann_baseline = false\n"))
        out = tmp_path / "cmp"
        assert main(["compare", cfg, "--out", str(out)]) == 0
        assert not (out / "plotMass_neumann.dat").exists()
        assert (out / "plotMass_alpha0.5.dat").exists()

    def test_no_variants_exits_one(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, RUN_CFG +
                        "compare.neumann_baseline = false\n")
        assert main(["compare", cfg, "--out", str(tmp_path / "x")]) == 1
        assert "compare needs" in capsys.readouterr().err


SWEEP_BASE = """
params.chi = 1
params.h = 1
params.alpha = 1
params.tau = 0
source.c = 1
initial.width = 0.5
initial.amplitude = 1
grid.cells = 32
run.t_end = 0.05
run.sample_interval = 0.05
"""


class TestSweep:
    def test_classifier_only_truth_table(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, SWEEP_BASE + (
            "source.b = 0.05\n"
            "sweep.vary.params.alpha = [0, 1]\n"
            "sweep.classifier_only = true\n"
            "sweep.trace_c = 2\n"))
        out = tmp_path / "sw"
        assert main(["sweep", cfg, "--out", str(out)]) == 0
        lines = (out / "sweep.dat").read_text().splitlines()
        assert lines[0] == "# params.alpha verdict conditions status t_final"
        assert lines[1].split() == [
            "0", "bounded", "trace_condition+flux_gap_condition",
            "skipped", "-"]
        assert lines[2].split() == ["1", "unbounded", "none", "skipped", "-"]
        # supplied constant, so no estimation note
        assert "note:" not in capsys.readouterr().err

    def test_simulated_cells_report_their_status(self, tmp_path):
        cfg = write_cfg(tmp_path, SWEEP_BASE + (
            "sweep.vary.source.b = [0, 1]\n"
            "sweep.trace_c = 2\n"))
        out = tmp_path / "sw"
        assert main(["sweep", cfg, "--out", str(out)]) == 0
        lines = (out / "sweep.dat").read_text().splitlines()
        assert lines[0] == "# source.b verdict conditions status t_final"
        b0, b1 = lines[1].split(), lines[2].split()
        assert b0[:2] == ["0", "unbounded"]
        assert b1[:2] == ["1", "bounded"]
        assert b0[3] == b1[3] == "completed"
        assert float(b0[4]) == pytest.approx(0.05)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["status"]["cells"] == 2
        assert manifest["status"]["failures"] == []

    def test_estimated_trace_constant_is_noted(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, SWEEP_BASE + (
            "sweep.vary.source.b = [1]\n"
            "sweep.classifier_only = true\n"))
        assert main(["sweep", cfg, "--out", str(tmp_path / "sw")]) == 0
        assert "note: trace constant estimated" in capsys.readouterr().err

    def test_requires_a_vary_list(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, SWEEP_BASE)
        assert main(["sweep", cfg, "--out", str(tmp_path / "x")]) == 1
        assert "sweep.vary" in capsys.readouterr().err

    def test_rejects_scalar_vary_values(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, SWEEP_BASE +
                        "sweep.vary.source.b = 1\n")
        assert main(["sweep", cfg, "--out", str(tmp_path / "x")]) == 1
        assert "nonempty list" in capsys.readouterr().err

    def test_worker_override_is_validated(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("CHEMOFLUX_WORKERS", "zero")
        cfg = write_cfg(tmp_path, SWEEP_BASE + (
            "sweep.vary.source.b = [0, 1]\n"
            "sweep.trace_c = 2\n"))
        assert main(["sweep", cfg, "--out", str(tmp_path / "x")]) == 1
        assert "CHEMOFLUX_WORKERS" in capsys.readouterr().err

    def test_worker_override_is_honoured(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CHEMOFLUX_WORKERS", "1")
        cfg = write_cfg(tmp_path, SWEEP_BASE + (
            "sweep.vary.source.b = [0, 1]\n"
            "sweep.trace_c = 2\n"))
        out = tmp_path / "sw"
        assert main(["sweep", cfg, "--out", str(out)]) == 0
        assert len((out / "sweep.dat").read_text().splitlines()) == 3


class TestClassify:
    def test_bounded_with_supplied_constant(self, capsys):
        assert main(CLASSIFY_BOUNDED) == 0
        captured = capsys.readouterr()
        lines = captured.out.splitlines()
        assert lines[0] == "verdict: bounded"
        assert lines[1] == "conditions: trace_condition, flux_gap_condition"
        assert lines[2].startswith("witness: eps1=")
        assert lines[3] == "trace constant: 2 (user-supplied)"
        assert captured.err == ""

    def test_unbounded_prints_no_witness(self, capsys):
        argv = ["classify", "--tau", "0", "--chi", "1", "--h", "1",
                "--alpha", "1", "--b", "0.05", "--c", "1", "--trace-c", "2"]
        assert main(argv) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "verdict: not bounded by the implemented conditions"
        assert lines[1] == "conditions: none"
        assert not any(ln.startswith("witness:") for ln in lines)

    def test_parabolic_damping_route(self, capsys):
        argv = ["classify", "--tau", "1", "--chi", "0.5", "--h", "1",
                "--alpha", "1", "--b", "1", "--c", "0", "--trace-c", "2"]
        assert main(argv) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "verdict: bounded"
        assert lines[1] == "conditions: damping_condition"

    def test_estimated_constant_warns_on_stderr(self, capsys):
        argv = ["classify", "--tau", "0", "--chi", "1", "--h", "1",
                "--alpha", "1", "--b", "5", "--c", "1", "--cells", "64"]
        assert main(argv) == 0
        captured = capsys.readouterr()
        assert "lower" in captured.err
        assert "numerically-estimated-lower-bound" in captured.out

    def test_missing_required_option_exits_one(self, capsys):
        argv = ["classify", "--tau", "0", "--chi", "1", "--h", "1",
                "--alpha", "1", "--c", "1"]
        assert main(argv) == 1
        assert "error:" in capsys.readouterr().err

    def test_invalid_parameters_exit_one(self, capsys):
        argv = ["classify", "--tau", "0", "--chi", "-1", "--h", "1",
                "--alpha", "1", "--b", "1", "--c", "1", "--trace-c", "2"]
        assert main(argv) == 1
        assert "chi" in capsys.readouterr().err


class TestEntryPoint:
    def test_unknown_command_exits_one(self, capsys):
        assert main(["frobnicate"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_module_invocation_round_trip(self):
        proc = subprocess.run(
            [sys.executable, "-m", "chemoflux"] + CLASSIFY_BOUNDED,
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout.startswith("verdict: bounded")
