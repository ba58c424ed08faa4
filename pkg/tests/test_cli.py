import json
from dataclasses import replace

import pandas as pd
import pytest

from app.cli import (
    EXIT_ADMISSIBILITY,
    EXIT_CONDITIONS,
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_SOLVER,
    _print_report,
    main,
)
from app.services.optimize import FixedPointCertificate, minimize_ground_state


def _write_config(tmp_path, config, name="problem.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config), encoding="utf-8")
    return str(path)


def test_solve_writes_ground_state(config_file, tmp_path, capsys):
    out = tmp_path / "solve"
    assert main(["solve", "--config", str(config_file), "--out-dir", str(out)]) == EXIT_OK
    report = json.loads((out / "groundstate.json").read_text(encoding="utf-8"))
    assert 0.405 <= report["lambda_squared"] <= 0.495
    assert report["lambda"] ** 2 == pytest.approx(report["lambda_squared"])
    u = pd.read_csv(out / "u.csv")
    assert list(u.columns) == ["cell_index", "coord1", "coord2", "measure", "value"]
    assert len(u) == 96
    assert "lambda^2" in capsys.readouterr().out


def test_check_passes_on_the_disk_example(config_file, tmp_path):
    out = tmp_path / "check"
    assert main(["check", "--config", str(config_file), "--out-dir", str(out)]) == EXIT_OK
    report = json.loads((out / "admissibility.json").read_text(encoding="utf-8"))
    assert report["cond_p_ok"] and report["cond_q_ok"]
    assert (out / "psi.csv").exists()
    assert (out / "confinement.csv").exists()


def test_check_fails_for_a_tall_p(tmp_path, small_problem_config):
    small_problem_config["p"]["height"]["value"] = 0.4
    path = _write_config(tmp_path, small_problem_config)
    assert main(["check", "--config", path, "--out-dir", str(tmp_path / "out")]) == EXIT_CONDITIONS


def test_check_on_empty_potentials(tmp_path, small_problem_config):
    del small_problem_config["p"], small_problem_config["q"]
    path = _write_config(tmp_path, small_problem_config)
    assert main(["check", "--config", path, "--out-dir", str(tmp_path / "out")]) == EXIT_CONDITIONS
    report = json.loads((tmp_path / "out" / "admissibility.json").read_text(encoding="utf-8"))
    assert any("degenerate" in note for note in report["notes"])


def test_optimize_writes_report_and_fields(config_file, tmp_path, capsys):
    out = tmp_path / "opt"
    assert main(["optimize", "--config", str(config_file), "--out-dir", str(out)]) == EXIT_OK
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert report["converged"]
    assert report["monotone"]
    assert report["certificate"]["passed"]
    assert report["certificate"]["schwarz_ok"]
    for name in ("p_final.csv", "q_final.csv", "u_final.csv"):
        assert len(pd.read_csv(out / name)) == 96
    history = pd.read_csv(out / "lambda_history.csv")
    assert list(history.columns) == ["iteration", "lambda"]
    assert history["lambda"].iloc[-1] == pytest.approx(report["lambda_final"])
    assert "schwarz certificate: passed" in capsys.readouterr().out


def test_optimize_restarts_from_previous_fields(config_file, tmp_path):
    first = tmp_path / "first"
    assert main(["optimize", "--config", str(config_file), "--out-dir", str(first)]) == EXIT_OK
    second = tmp_path / "second"
    argv = ["optimize", "--config", str(config_file), "--out-dir", str(second), "--start", f"csv:{first}"]
    assert main(argv) == EXIT_OK
    report = json.loads((second / "report.json").read_text(encoding="utf-8"))
    assert report["iterations"] == 1


def test_optimize_snapshots(config_file, tmp_path):
    out = tmp_path / "snap"
    argv = ["optimize", "--config", str(config_file), "--out-dir", str(out), "--start", "schwarz", "--snapshots"]
    assert main(argv) == EXIT_OK
    snapshots = pd.read_csv(out / "snapshots.csv")
    assert sorted(snapshots["iteration"].unique()) == [0, 1]


def test_optimize_refuses_violated_conditions(tmp_path, small_problem_config):
    small_problem_config["p"]["height"]["value"] = 0.4
    path = _write_config(tmp_path, small_problem_config)
    out = tmp_path / "out"
    assert main(["optimize", "--config", path, "--out-dir", str(out)]) == EXIT_ADMISSIBILITY
    assert not (out / "report.json").exists()
    assert main(["optimize", "--config", path, "--out-dir", str(out), "--force", "--start", "schwarz"]) == EXIT_OK


def test_schwarz_command(config_file, tmp_path):
    out = tmp_path / "schwarz"
    assert main(["schwarz", "--config", str(config_file), "--out-dir", str(out)]) == EXIT_OK
    increasing = pd.read_csv(out / "q_schwarz_increasing.csv")["value"]
    decreasing = pd.read_csv(out / "q_schwarz_decreasing.csv")["value"]
    assert increasing.is_monotonic_increasing
    assert decreasing.is_monotonic_decreasing
    assert (out / "p_schwarz_increasing.csv").exists()


def test_schwarz_needs_a_disk(tmp_path):
    config = {
        "mesh": {"kind": "rectangle", "a": {"value": 1, "unit": "nm"}, "b": {"value": 1, "unit": "nm"}, "nx": 8, "ny": 8}
    }
    assert main(["schwarz", "--config", _write_config(tmp_path, config), "--out-dir", str(tmp_path)]) == EXIT_CONFIG


def test_malformed_config_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"mesh": {"kind": "disk_radial",', encoding="utf-8")
    assert main(["solve", "--config", str(path), "--out-dir", str(tmp_path)]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_missing_config_flag(tmp_path):
    assert main(["solve", "--out-dir", str(tmp_path)]) == EXIT_CONFIG


def test_solver_failure_exit_code(tmp_path, small_problem_config):
    small_problem_config["solver"] = {"max_outer": 1}
    path = _write_config(tmp_path, small_problem_config)
    assert main(["solve", "--config", path, "--out-dir", str(tmp_path / "out")]) == EXIT_SOLVER


def test_unknown_command():
    with pytest.raises(SystemExit):
        main(["teleport"])


@pytest.mark.slow
def test_reproduce_disk_example(tmp_path, capsys):
    out = tmp_path / "repro"
    assert main(["reproduce-paper", "--resolution", "512", "--out-dir", str(out)]) == EXIT_OK
    checks = pd.read_csv(out / "reproduction.csv")
    assert checks["ok"].all()
    table = pd.read_csv(out / "potential_table.csv")
    assert len(table) == 3
    assert table["V"].iloc[1] == pytest.approx(2.13)
    profile = pd.read_csv(out / "radial_profile.csv")
    assert list(profile.columns) == ["r", "V", "u", "psi", "psi_bessel", "confined"]
    assert "all reproduction checks passed" in capsys.readouterr().out


def test_failed_certificate_lists_the_offending_cells(radial_disk, dot_classes, opts, capsys):
    report = minimize_ground_state(radial_disk, *dot_classes, opts, start="schwarz")
    failed = FixedPointCertificate(passed=False, p_mismatch_cells=[3], q_mismatch_cells=[0, 425])
    _print_report(replace(report, certificate=failed))
    out = capsys.readouterr().out
    assert "fixed-point certificate: FAILED" in out
    assert "p differs on cells [3]" in out
    assert "q differs on cells [0, 425]" in out
