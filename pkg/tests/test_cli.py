import os
import stat
import subprocess
import sys

import pytest

from dressedspin.cli import main

FAST_SWEEP = [
    "--set", "protocol.ramp_time_min_ns=1",
    "--set", "protocol.ramp_time_max_ns=16",
    "--set", "protocol.ramp_time_points=3",
]


def run_cli(args):
    return main(list(args))


def read_lines(path):
    with open(path, "rb") as fh:
        return fh.read().decode("utf-8").splitlines()


class TestDispatch:
    def test_unknown_subcommand_exits_64(self, capsys):
        assert run_cli(["frobnicate"]) == 64
        assert "unknown subcommand" in capsys.readouterr().err

    def test_no_arguments_exits_64(self, capsys):
        assert run_cli([]) == 64

    def test_help_exits_zero(self, capsys):
        assert run_cli(["--help"]) == 0
        assert "subcommands" in capsys.readouterr().out


class TestConfigHandling:
    def test_missing_required_field_exits_2(self, tmp_path, capsys):
        code = run_cli(["single-gate", "--out", str(tmp_path)])
        assert code == 2
        assert "omega_r" in capsys.readouterr().err

    def test_unknown_section_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[mystery]\nx = 1\n")
        assert run_cli(["crossover", "--config", str(cfg), "--out", str(tmp_path)]) == 2

    def test_unknown_set_section_exits_2(self, tmp_path):
        assert run_cli(["crossover", "--out", str(tmp_path), "--set", "nope.x=1"]) == 2

    def test_config_file_units_and_override(self, tmp_path):
        cfg = tmp_path / "run.ini"
        cfg.write_text(
            "[system]\nomega_r_mhz = 10\nu_ghz = 1000\n"
            "[protocol]\nratio_points = 3\nratio_max = 1\n"
        )
        out = tmp_path / "out"
        code = run_cli([
            "crossover", "--config", str(cfg), "--out", str(out),
            "--set", "protocol.t_c_list_ghz=1",
        ])
        assert code == 0
        lines = read_lines(out / "crossover.csv")
        header = [l for l in lines if l.startswith("#")]
        assert any("system.omega_r=1.00000000000e+07" in l for l in header)
        assert any("protocol.t_c_list=1.00000000000e+09" in l for l in header)
        data = [l for l in lines if not l.startswith("#")]
        assert data[0] == "t_c_hz,ratio,theta_rad,status"
        assert len(data) - 1 == 3  # row count equals the grid size

    def test_duplicate_unit_variants_rejected(self, tmp_path):
        cfg = tmp_path / "dup.ini"
        cfg.write_text("[system]\nt_c_ghz = 1\nt_c_mhz = 1000\n")
        assert run_cli(["crossover", "--config", str(cfg), "--out", str(tmp_path)]) == 2


class TestOutputs:
    def test_init_sweep_schema(self, tmp_path):
        out = tmp_path / "o"
        assert run_cli(["init-sweep", "--out", str(out), *FAST_SWEEP]) == 0
        lines = read_lines(out / "init_sweep.csv")
        data = [l for l in lines if not l.startswith("#")]
        assert data[0] == "ramp_time_s,p_s02,p_s11,p_t0,p_tplus,p_tminus"
        assert len(data) - 1 == 3
        first = [float(x) for x in data[1].split(",")]
        assert abs(sum(first[1:]) - 1.0) < 1e-8

    def test_decompose_check_schema(self, tmp_path):
        assert run_cli(["decompose-check", "--out", str(tmp_path)]) == 0
        lines = read_lines(tmp_path / "decompose_check.csv")
        data = [l for l in lines if not l.startswith("#")]
        assert data[0] == "gate,fidelity,gate_count"
        assert len(data) - 1 == 4

    def test_spectrum_schema(self, tmp_path):
        assert run_cli([
            "spectrum", "--out", str(tmp_path),
            "--set", "protocol.eps_scan_points=5",
        ]) == 0
        lines = read_lines(tmp_path / "spectrum.csv")
        data = [l for l in lines if not l.startswith("#")]
        assert data[0].startswith("eps_hz,branch,energy_hz,comp_s02,comp_t_plus,comp_s11")
        assert len(data) - 1 == 5 * 5

    def test_sw_validate_seed_recorded(self, tmp_path):
        assert run_cli([
            "sw-validate", "--out", str(tmp_path), "--seed", "42",
            "--set", "protocol.draws=5",
        ]) == 0
        lines = read_lines(tmp_path / "sw_validate.csv")
        assert "# seed=42" in lines
        assert len([l for l in lines if not l.startswith("#")]) - 1 == 5

    def test_unwritable_output_exits_74(self, tmp_path, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("file, not a directory")
        code = run_cli(["decompose-check", "--out", str(blocker / "sub")])
        assert code == 74

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run_cli([
                "crossover", "--out", str(out), "--set", "protocol.ratio_points=7",
            ]) == 0
        assert (a / "crossover.csv").read_bytes() == (b / "crossover.csv").read_bytes()

    def test_nonconverged_numerics_exit_3(self, tmp_path):
        code = run_cli([
            "init-sweep", "--out", str(tmp_path), *FAST_SWEEP,
            "--set", "protocol.tolerance=1e-14",
            "--set", "protocol.max_halvings=1",
        ])
        assert code == 3
        assert (tmp_path / "init_sweep.csv").exists()  # results still written

    def test_console_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "dressedspin.cli", "decompose-check", "--out", str(tmp_path)],
            capture_output=True,
        )
        assert proc.returncode == 0
