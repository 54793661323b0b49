import math
import os

import numpy as np
import pytest

from chiprobe.cli import ConfigError, execute, main, parse_config
from chiprobe.functionals import f_harmonic_approx
from chiprobe.model import TWO_PI

FIG1_CONFIG = """
# Fock-5 scan at the flux-qubit operating point
command = scan
state = fock:5
omega = 100MHz*2pi
kappa = 50kHz*2pi
gamma1 = 0.4MHz*2pi
gamma2 = 0.4MHz*2pi
n_m = 19.5
r_max = 0.5
n_max = 11
grid_extent = 3.5
grid_points = 9
shots = infinite
seed = 1
"""


class TestParseConfig:
    def test_minimal_scan_fills_defaults(self):
        cfg = parse_config("command = scan\nomega = 1Hz*2pi\nn_max=10\n")
        assert cfg.command == "scan"
        assert cfg.omega == pytest.approx(TWO_PI)
        assert cfg.r_max == 0.5
        assert cfg.grid_points == 41
        assert cfg.shots == "infinite"
        assert cfg.engine == "analytic"

    def test_unitless_rate_is_named_in_error(self):
        with pytest.raises(ConfigError) as err:
            parse_config("command = scan\nomega = 1Hz*2pi\nkappa = 0.5\nn_max=10")
        assert any("kappa" in p and "unit" in p for p in err.value.problems)

    def test_all_errors_collected(self):
        with pytest.raises(ConfigError) as err:
            parse_config(
                "command = bogus\nomega = 3\nkappa = 1\nwhat = 4\n"
            )
        text = " | ".join(err.value.problems)
        assert "command" in text
        assert "omega" in text
        assert "kappa" in text
        assert "unknown key 'what'" in text

    def test_paper_operating_point_has_low_reach_cost(self):
        cfg = parse_config(FIG1_CONFIG)
        assert cfg.omega == pytest.approx(TWO_PI * 100e6)
        assert cfg.kappa == pytest.approx(TWO_PI * 50e3)
        f7 = f_harmonic_approx(cfg.r0, cfg.r_max, 0.0, 7, cfg.params, cfg.omega)
        assert math.exp(2 * f7) < 100.0

    def test_grid_beyond_reach_rejected(self):
        with pytest.raises(ConfigError) as err:
            parse_config("command = scan\nomega = 1Hz*2pi\n"
                         "grid_extent = 3.5\nn_max = 7\n")
        assert any("reach" in p for p in err.value.problems)

    def test_non_finite_numbers_rejected(self):
        with pytest.raises(ConfigError) as err:
            parse_config("command = scan\nomega = 1Hz*2pi\nn_m = inf\nn_max=10")
        assert any("n_m" in p and "finite" in p for p in err.value.problems)

    def test_rad_s_unit_is_direct(self):
        cfg = parse_config("command = budget\nf_values = 1\nomega = 6.0rad/s\n")
        assert cfg.omega == 6.0

    def test_rad_s_with_2pi_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("command = budget\nf_values = 1\nomega = 6rad/s*2pi\n")

    def test_overrides_win(self):
        cfg = parse_config("command = scan\nomega = 1Hz*2pi\nseed = 1\nn_max=10",
                           overrides={"seed": "7"})
        assert cfg.seed == 7


class TestExecute:
    def scan_config(self, outdir, extra=""):
        return parse_config(
            "command = scan\nstate = fock:1\nomega = 1Hz*2pi\n"
            "kappa = 0.01Hz*2pi\ngamma2 = 0.005Hz*2pi\nn_m = 0.3\n"
            "grid_extent = 1.2\ngrid_points = 5\nn_max = 8\n"
            f"output = {outdir}\n" + extra
        )

    def test_scan_writes_three_datasets_and_manifest(self, tmp_path):
        outdir = str(tmp_path / "scan")
        assert execute(self.scan_config(outdir)) == 0
        for name in ("records.csv", "ideal.csv", "damping.csv",
                     "run_manifest.txt"):
            assert os.path.exists(os.path.join(outdir, name))
        manifest = open(os.path.join(outdir, "run_manifest.txt")).read()
        assert "status = ok" in manifest
        assert "config.seed = 0" in manifest

    def test_reproducible_output_bytes(self, tmp_path):
        out_a = str(tmp_path / "a")
        out_b = str(tmp_path / "b")
        execute(self.scan_config(out_a, "shots = eps:0.3\nseed = 9\n"))
        execute(self.scan_config(out_b, "shots = eps:0.3\nseed = 9\n"))
        for name in ("records.csv", "ideal.csv", "damping.csv"):
            a = open(os.path.join(out_a, name), "rb").read()
            b = open(os.path.join(out_b, name), "rb").read()
            assert a == b

    def test_reconstruct_from_records(self, tmp_path):
        scan_dir = str(tmp_path / "scan")
        execute(self.scan_config(scan_dir))
        out = str(tmp_path / "rec")
        cfg = parse_config(
            "command = reconstruct\nstate = fock:1\nomega = 1Hz*2pi\n"
            f"input = {scan_dir}/records.csv\noutput = {out}\n"
        )
        assert execute(cfg) == 0
        assert os.path.exists(os.path.join(out, "corrected.csv"))
        residuals = open(os.path.join(out, "residuals.csv")).read().splitlines()
        worst = max(float(line.split(",")[2]) for line in residuals[1:])
        assert worst < 1e-8

    def test_moments_command(self, tmp_path):
        out = str(tmp_path / "mom")
        cfg = parse_config(
            "command = moments\nstate = coherent:0.5\nomega = 1Hz*2pi\n"
            "ray_phi = -pi/2\nfit_r_max = 0.04\nfit_points = 18\n"
            f"max_order = 6\noutput = {out}\n"
        )
        assert execute(cfg) == 0
        lines = open(os.path.join(out, "moments.csv")).read().splitlines()
        by_order = {int(r.split(",")[1]): float(r.split(",")[2])
                    for r in lines[1:]}
        assert by_order[1] == pytest.approx(1.0, abs=1e-6)
        assert by_order[2] == pytest.approx(2.0, abs=1e-6)

    def test_cat_command(self, tmp_path):
        out = str(tmp_path / "cat")
        cfg = parse_config(
            "command = cat\nomega = 1Hz*2pi\nkappa = 0.005Hz*2pi\n"
            "gamma1 = 0.004Hz*2pi\ngamma2 = 0.003Hz*2pi\nn_m = 0.4\n"
            "r = 0.5\nperiods = 4\nvarphi = pi/2\ncat_sign = +\n"
            f"grid_extent = 2.5\ngrid_points = 5\noutput = {out}\n"
        )
        assert execute(cfg) == 0
        lines = open(os.path.join(out, "cat.csv")).read().splitlines()
        assert lines[0].startswith("beta_re,beta_im,chi_ideal_re")
        assert len(lines) == 26

    def test_budget_command(self, tmp_path):
        out = str(tmp_path / "bud")
        cfg = parse_config(
            f"command = budget\nf_values = 0,1\neps = 0.1\noutput = {out}\n"
        )
        assert execute(cfg) == 0
        lines = open(os.path.join(out, "budget.csv")).read().splitlines()
        assert lines[1].endswith(",100")
        assert lines[2].endswith(",739")

    def test_oracle_check_command(self, tmp_path, capsys):
        out = str(tmp_path / "oc")
        cfg = parse_config(
            f"command = oracle-check\ntuples = 2\noracle_dim = 24\n"
            f"omega = 1Hz*2pi\noutput = {out}\nseed = 3\n"
        )
        assert execute(cfg) == 0
        printed = capsys.readouterr().out
        assert "max residual" in printed
        lines = open(os.path.join(out, "residuals.csv")).read().splitlines()
        assert len(lines) == 3
        assert all(float(line.split(",")[-1]) < 1e-4 for line in lines[1:])

    def test_computation_error_still_writes_manifest(self, tmp_path):
        out = str(tmp_path / "fail")
        cfg = parse_config(
            "command = reconstruct\nomega = 1Hz*2pi\n"
            f"input = {tmp_path}/missing.csv\noutput = {out}\nstate = fock:0\n"
        )
        code = execute(cfg)
        assert code == 3
        manifest = open(os.path.join(out, "run_manifest.txt")).read()
        assert "status = io-error" in manifest


class TestMain:
    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("omega = 5\n")
        assert main(["scan", "--config", str(cfg)]) == 1
        assert "config error" in capsys.readouterr().err

    def test_set_overrides(self, tmp_path):
        cfg = tmp_path / "ok.cfg"
        cfg.write_text(
            "command = budget\nf_values = 0.5\neps = 0.2\n"
        )
        out = str(tmp_path / "o")
        code = main(["budget", "--config", str(cfg), "--output", out,
                     "--set", "eps=0.5"])
        assert code == 0
        manifest = open(os.path.join(out, "run_manifest.txt")).read()
        assert "config.eps = 0.5" in manifest
