import json

import pytest

from atomristor.cli import main
from atomristor.config import default_config, parse_config_text

FAST_RUN = """
[run]
biases = 0, 0.2, 0.4
temperatures = 300
set_voltage_V = 0.4
energy_step_eV = 0.005
"""

SINGLE_DEFECT = """
[insulator]
length_nm = 1.0

[defect.1]
location_nm = 0.18
depth_eV = 0.10
width_nm = 0.10
state = vacancy
lrs_shape = coulomb
"""


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return _run


@pytest.fixture
def fast_cfg(tmp_path):
    p = tmp_path / "fast.cfg"
    p.write_text(FAST_RUN)
    return str(p)


def read_csv(path):
    lines = path.read_text().splitlines()
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


class TestTopLevel:
    def test_no_command_is_usage_error(self, run):
        code, _, err = run()
        assert code == 1
        assert "ERROR USAGE" in err

    def test_print_defaults_round_trips(self, run):
        code, out, _ = run("--print-defaults")
        assert code == 0
        assert parse_config_text(out) == default_config()

    def test_config_error_reported_with_location(self, run, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[grid]\nspacing_nm = thick\n")
        code, _, err = run("-c", str(bad), "iv")
        assert code == 1
        assert "ERROR CONFIG" in err
        assert "bad.cfg:2" in err

    def test_geometry_error_reported(self, run, tmp_path):
        cfg = tmp_path / "geo.cfg"
        cfg.write_text("[insulator]\nlength_nm = 0.1\n[run]\nbiases = 0, 0.1\n"
                       "[defect.1]\nlocation_nm = 0.05\ndepth_eV = 0.1\n"
                       "width_nm = 0.05\n")
        code, _, err = run("-c", str(cfg), "-o", str(tmp_path / "o"),
                           "--no-figures", "iv")
        assert code == 1
        assert "ERROR GEOMETRY" in err

    def test_value_error_reported(self, run, tmp_path):
        cfg = tmp_path / "val.cfg"
        cfg.write_text("[run]\nbiases = 0.2, 0.1\ntemperatures = 300\n")
        code, _, err = run("-c", str(cfg), "-o", str(tmp_path / "o"),
                           "--no-figures", "iv", "--state", "hrs")
        assert code == 1
        assert "ERROR VALUE" in err


class TestOutputDir:
    def test_env_var_respected(self, run, fast_cfg, tmp_path, monkeypatch):
        envdir = tmp_path / "envout"
        monkeypatch.setenv("ATOMRISTOR_OUTPUT_DIR", str(envdir))
        code, _, _ = run("-c", fast_cfg, "--no-figures", "ratio")
        assert code == 0
        assert (envdir / "ratio.csv").exists()

    def test_flag_overrides_env(self, run, fast_cfg, tmp_path, monkeypatch):
        monkeypatch.setenv("ATOMRISTOR_OUTPUT_DIR", str(tmp_path / "envout"))
        flagdir = tmp_path / "flagout"
        code, _, _ = run("-c", fast_cfg, "-o", str(flagdir), "--no-figures",
                         "ratio")
        assert code == 0
        assert (flagdir / "ratio.csv").exists()
        assert not (tmp_path / "envout").exists()


class TestIv:
    def test_composite_sweep_files(self, run, fast_cfg, tmp_path):
        out = tmp_path / "out"
        code, _, _ = run("-c", fast_cfg, "-o", str(out), "--no-figures", "iv")
        assert code == 0
        header, rows = read_csv(out / "iv_composite_300K.csv")
        assert header == ["bias_V", "current_A", "current_density_A_cm2",
                          "state", "temperature_K"]
        assert len(rows) == 6  # three biases up (HRS), three back down (LRS)
        assert [r[3] for r in rows] == ["HRS"] * 3 + ["LRS"] * 3
        assert not (out / "iv_composite.png").exists()

    def test_single_state_sweep(self, run, fast_cfg, tmp_path):
        out = tmp_path / "out"
        code, _, _ = run("-c", fast_cfg, "-o", str(out), "--no-figures", "iv",
                         "--state", "hrs")
        assert code == 0
        _, rows = read_csv(out / "iv_hrs_300K.csv")
        assert [r[3] for r in rows] == ["HRS"] * 3

    def test_figures_rendered(self, run, fast_cfg, tmp_path):
        out = tmp_path / "out"
        code, _, _ = run("-c", fast_cfg, "-o", str(out), "iv",
                         "--state", "hrs")
        assert code == 0
        assert (out / "iv_hrs.png").stat().st_size > 0

    def test_thread_count_does_not_change_bytes(self, run, fast_cfg, tmp_path):
        out1, out4 = tmp_path / "t1", tmp_path / "t4"
        assert run("-c", fast_cfg, "-o", str(out1), "--no-figures",
                   "--threads", "1", "iv")[0] == 0
        assert run("-c", fast_cfg, "-o", str(out4), "--no-figures",
                   "--threads", "4", "iv")[0] == 0
        a = (out1 / "iv_composite_300K.csv").read_bytes()
        b = (out4 / "iv_composite_300K.csv").read_bytes()
        assert a == b

    def test_emit_plot_script(self, run, fast_cfg, tmp_path):
        out = tmp_path / "out"
        code, _, _ = run("-c", fast_cfg, "-o", str(out), "--no-figures",
                         "--emit-plot-script", "iv", "--state", "hrs")
        assert code == 0
        assert "matplotlib" in (out / "plot_outputs.py").read_text()


class TestSpectra:
    def test_transmission_csv(self, run, fast_cfg, tmp_path):
        out = tmp_path / "out"
        code, _, _ = run("-c", fast_cfg, "-o", str(out), "--no-figures",
                         "transmission", "--bias", "0.2")
        assert code == 0
        header, rows = read_csv(out / "transmission.csv")
        assert header == ["energy_eV", "transmission"]
        energies = [float(r[0]) for r in rows]
        assert energies == sorted(energies)
        assert all(0.0 <= float(r[1]) <= 1.0 + 1e-9 for r in rows)

    def test_ldos_csv_shape(self, run, fast_cfg, tmp_path):
        out = tmp_path / "out"
        code, _, _ = run("-c", fast_cfg, "-o", str(out), "--no-figures",
                         "ldos", "--n-energies", "25")
        assert code == 0
        header, rows = read_csv(out / "ldos_hrs.csv")
        assert header[:2] == ["position_nm", "potential_eV"]
        assert len(header) == 27
        assert len(rows) == 90


class TestRatio:
    def test_ratio_csv(self, run, fast_cfg, tmp_path):
        out = tmp_path / "out"
        code, _, _ = run("-c", fast_cfg, "-o", str(out), "--no-figures",
                         "ratio")
        assert code == 0
        header, rows = read_csv(out / "ratio.csv")
        assert header == ["bias_V", "ratio", "reliable"]
        assert [float(r[0]) for r in rows] == [0.2, 0.4]  # zero bias dropped
        assert all(float(r[1]) > 1.0 for r in rows)
        assert all(r[2] == "1" for r in rows)


class TestSweep:
    def test_parameter_is_required(self, fast_cfg):
        with pytest.raises(SystemExit) as exc:
            main(["-c", fast_cfg, "--no-figures", "sweep"])
        assert exc.value.code == 2

    def test_depth_sweep_with_fit(self, run, fast_cfg, tmp_path):
        out = tmp_path / "out"
        code, _, _ = run("-c", fast_cfg, "-o", str(out), "--no-figures",
                         "sweep", "--parameter", "well_depth",
                         "--values", "0.05,0.10", "--bias", "0.4")
        assert code == 0
        header, rows = read_csv(out / "sweep_well_depth.csv")
        assert header == ["well_depth_eV", "ratio", "bias_V", "temperature_K"]
        assert len(rows) == 2
        fit = json.loads((out / "sweep_well_depth_fit.json").read_text())
        assert set(fit) == {"slope", "intercept", "r2"}

    def test_shape_sweep_has_no_fit(self, run, fast_cfg, tmp_path):
        out = tmp_path / "out"
        code, _, _ = run("-c", fast_cfg, "-o", str(out), "--no-figures",
                         "sweep", "--parameter", "lrs_shape", "--bias", "0.4")
        assert code == 0
        _, rows = read_csv(out / "sweep_lrs_shape.csv")
        assert [r[0] for r in rows] == ["deepened", "coulomb", "widened"]
        assert not (out / "sweep_lrs_shape_fit.json").exists()


class TestCalibrate:
    def test_success(self, run, tmp_path):
        cfg = tmp_path / "cal.cfg"
        cfg.write_text(FAST_RUN + SINGLE_DEFECT + """
[calibrate]
target_ratio = 3.0
tolerance = 0.3
bias_V = 0.4
depths_eV = 0.10
locations_nm = 0.18
""")
        out = tmp_path / "out"
        code, _, err = run("-c", str(cfg), "-o", str(out), "--no-figures",
                           "calibrate")
        assert code == 0, err
        payload = json.loads((out / "calibration.json").read_text())
        assert payload["status"] == "success"
        assert payload["best_depth_eV"] == 0.10
        assert payload["best_location_nm"] == 0.18
        assert abs(payload["achieved_ratio"] - 3.0) <= 0.3

    def test_failure_exits_nonzero(self, run, tmp_path):
        cfg = tmp_path / "cal.cfg"
        cfg.write_text(FAST_RUN + SINGLE_DEFECT + """
[calibrate]
depths_eV = 0.10
locations_nm = 0.18
""")
        out = tmp_path / "out"
        code, _, err = run("-c", str(cfg), "-o", str(out), "--no-figures",
                           "calibrate", "--target", "1e6", "--tolerance",
                           "0.1", "--bias", "0.4")
        assert code == 1
        assert "ERROR NO_CONVERGENCE" in err
        payload = json.loads((out / "calibration.json").read_text())
        assert payload["status"] == "nearest_only"


class TestScf:
    def test_zero_bias_converges(self, run, fast_cfg, tmp_path):
        out = tmp_path / "out"
        code, _, err = run("-c", fast_cfg, "-o", str(out), "--no-figures",
                           "scf", "--bias", "0")
        assert code == 0, err
        header, rows = read_csv(out / "scf_profile.csv")
        assert header == ["position_nm", "frozen_eV", "converged_eV",
                          "density_per_nm"]
        assert len(rows) == 90
        _, res_rows = read_csv(out / "scf_residuals.csv")
        assert len(res_rows) >= 1
        assert float(res_rows[-1][1]) < 1e-4

    def test_nonconvergence_exits_nonzero(self, run, tmp_path):
        cfg = tmp_path / "scf.cfg"
        cfg.write_text(FAST_RUN + "\n[scf]\nmax_iterations = 1\ndamping = 0.05\n")
        out = tmp_path / "out"
        code, _, err = run("-c", str(cfg), "-o", str(out), "--no-figures",
                           "scf", "--bias", "0.5")
        assert code == 1
        assert "ERROR NO_CONVERGENCE" in err
