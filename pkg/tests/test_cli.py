import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from qubitprobe.cli import main
from qubitprobe.scenario import ConfigError, parse_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
COLUMNS = ["t", "sx_S", "sy_S", "sz_S", "sx_P", "sy_P", "sz_P", "purity_S", "purity_P", "pointer"]


def command_for(path):
    return yaml.safe_load(path.read_text())["scenario"]


def run(tmp_path, text, command, *extra, name="case.yaml"):
    cfg = tmp_path / name
    cfg.write_text(text)
    return main([command, "--config", str(cfg), "--out-dir", str(tmp_path / "out"), *extra])


FIG1B = """\
scenario: single
measurement:
  xi: 0.1
  axis: [1, 1, 1]
"""


def test_fig1b_outputs(tmp_path, capsys):
    assert run(tmp_path, FIG1B, "single", name="fig1b.yaml") == 0
    out = tmp_path / "out"
    report = json.loads((out / "fig1b_report.json").read_text())
    r = report["report"]
    assert r["disturbance"] == pytest.approx(0.03, abs=0.01)
    assert r["pointer_deviation"] == pytest.approx(0.015, abs=0.005)
    for key in ("final_system_purity", "final_probe_purity", "final_pointer", "ideal_pointer"):
        assert key in r
    assert report["config"]["measurement"]["xi"] == 0.1
    assert report["trajectory_path"] == "fig1b_trajectory.csv"
    with open(out / "fig1b_trajectory.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == COLUMNS
    assert len(rows) == 1002
    assert "disturbance=" in capsys.readouterr().out


def test_byte_identical_reruns(tmp_path):
    for d in ("a", "b"):
        (tmp_path / d).mkdir()
        assert main(["env", "--config", str(SCENARIOS / "fig6c.yaml"), "--out-dir", str(tmp_path / d),
                     "--samples", "101"]) == 0
    for f in ("fig6c_trajectory.csv", "fig6c_report.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_sweep_rows(tmp_path):
    assert main(["sweep", "--config", str(SCENARIOS / "fig1_sweep.yaml"), "--out-dir", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "fig1_sweep_report.json").read_text())
    rows = report["rows"]
    assert [r["value"] for r in rows] == [0.5, 0.1, 0.01]
    d = [r["report"]["disturbance"] for r in rows]
    dev = [r["report"]["pointer_deviation"] for r in rows]
    assert d[0] == pytest.approx(0.49, abs=0.02) and dev[0] == pytest.approx(0.22, abs=0.02)
    assert d[1] == pytest.approx(0.03, abs=0.01) and dev[1] == pytest.approx(0.015, abs=0.005)
    assert d[2] < 0.005 and dev[2] < 0.005
    for i, r in enumerate(rows):
        assert r["trajectory_path"] == f"fig1_sweep_trajectory_{i:03d}.csv"
        assert (tmp_path / r["trajectory_path"]).exists()


def test_sweep_jobs_keep_order(tmp_path):
    text = FIG1B + "sweep:\n  parameter: xi\n  values: [0.3, 0.02, 0.2, 0.05]\n"
    text = text.replace("single", "sweep")
    assert run(tmp_path, text, "sweep", "--samples", "51", name="s.yaml") == 0
    serial = (tmp_path / "out" / "s_report.json").read_bytes()
    assert run(tmp_path, text, "sweep", "--samples", "51", "--jobs", "3", name="s.yaml") == 0
    assert (tmp_path / "out" / "s_report.json").read_bytes() == serial


def test_zero_axis_names_field(tmp_path, capsys):
    text = FIG1B.replace("[1, 1, 1]", "[0, 0, 0]")
    assert run(tmp_path, text, "single") == 2
    err = capsys.readouterr().err
    assert "measurement.axis" in err and "near-zero" in err and ":4:" in err


def test_zero_environment_axis(tmp_path, capsys):
    text = FIG1B.replace("single", "env") + "environment:\n  kappa_s: 0.02\n  axis_s: [0, 0, 0]\n"
    assert run(tmp_path, text, "env") == 2
    assert "environment.axis_s" in capsys.readouterr().err


def test_yaml_syntax_error_has_line(tmp_path, capsys):
    assert run(tmp_path, FIG1B + "  bad: [1, 2\n", "single") == 2
    err = capsys.readouterr().err
    assert "YAML syntax error" in err and "case.yaml:" in err


@pytest.mark.parametrize("text,field", [
    (FIG1B + "extra: 1\n", "extra"),
    (FIG1B.replace("xi: 0.1", "xi: -1"), "measurement.xi"),
    (FIG1B.replace("xi: 0.1", "xi: fast"), "measurement.xi"),
    (FIG1B.replace("single", "repeat"), "chain_length"),
    (FIG1B.replace("single", "env"), "environment"),
])
def test_config_errors(tmp_path, capsys, text, field):
    cmd = yaml.safe_load(text)["scenario"]
    assert run(tmp_path, text, cmd) == 2
    assert f"'{field}'" in capsys.readouterr().err


def test_scenario_mismatch(tmp_path):
    assert run(tmp_path, FIG1B, "repeat") == 2


def test_sweep_unknown_parameter():
    with pytest.raises(ConfigError, match="unknown parameter"):
        parse_scenario(FIG1B.replace("single", "sweep") + "sweep:\n  parameter: colour\n  values: [1]\n").sweep()


def test_infeasible_iontrap(tmp_path, capsys):
    text = "scenario: iontrap\niontrap:\n  j0: 400\n  delta1: 5000\n"
    assert run(tmp_path, text, "iontrap") == 4
    assert "delta1 <= 6*j0" in capsys.readouterr().err
    report = json.loads((tmp_path / "out" / "case_report.json").read_text())
    assert report["iontrap"]["feasible"] is False


def test_integration_failure(tmp_path, capsys):
    text = FIG1B.replace("single", "env") + "environment:\n  kappa_s: 5000\n  axis_s: [1, 0, 0]\n"
    assert run(tmp_path, text, "env", "--dt", "0.01", "--samples", "11") == 3
    assert "reduce dt" in capsys.readouterr().err


def test_dt_too_large(tmp_path):
    text = FIG1B.replace("single", "env") + "environment:\n  kappa_s: 0.02\n"
    assert run(tmp_path, text, "env", "--dt", "0.5") == 2


@pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.yaml")), ids=lambda p: p.stem)
def test_checked_in_scenarios_run(tmp_path, path):
    assert main([command_for(path), "--config", str(path), "--out-dir", str(tmp_path), "--samples", "201"]) == 0
    data = yaml.safe_load(path.read_text())
    assert (tmp_path / data["output"]["report_path"]).exists()


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "x.yaml"
    cfg.write_text(FIG1B)
    res = subprocess.run([sys.executable, "-m", "qubitprobe", "single", "--config", str(cfg),
                          "--out-dir", str(tmp_path), "--samples", "11"], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "x_trajectory.csv").exists()
