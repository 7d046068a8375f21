"""Test command line - listing, validation, runs and exit codes."""
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from moebius_lab.cli import cli

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"

TINY = {
    "name": "tiny",
    "family": {"kind": "cylinder", "n": 2, "p": 1,
               "core": {"type": "spiral", "case": "flat_c0", "params": {"r": 2.0}}},
    "grid": {"samples_per_axis": 2},
    "checks": ["beta_trace", "beta_norm", "conformal_gauss"],
    "seed": 2,
}


def _write(tmp_path, raw, name="tiny.scenario"):
    path = tmp_path / name
    path.write_text(json.dumps(raw) if isinstance(raw, dict) else raw)
    return path


def test_list_checks_text():
    result = CliRunner().invoke(cli, ["list-checks"])
    assert result.exit_code == 0
    assert result.output.rstrip().endswith("19 checks")
    line = next(l for l in result.output.splitlines() if l.startswith("conformal_gauss"))
    assert line.rstrip().endswith("The conformal Gauss equation")


def test_list_checks_json():
    result = CliRunner().invoke(cli, ["list-checks", "--json"])
    listing = json.loads(result.output)
    assert len(listing) == 19
    assert {"name", "anchor", "default_tol", "module", "description", "tags"} <= set(listing[0])


def test_validate_ok(tmp_path):
    result = CliRunner().invoke(cli, ["validate", str(_write(tmp_path, TINY))])
    assert result.exit_code == 0
    assert "OK: tiny (3 checks)" in result.output


def test_validate_build(tmp_path):
    result = CliRunner().invoke(cli, ["validate", "--build", str(_write(tmp_path, TINY))])
    assert result.exit_code == 0
    assert "4 points" in result.output


def test_validate_reports_field(tmp_path):
    raw = json.loads(json.dumps(TINY))
    del raw["family"]["kind"]
    result = CliRunner().invoke(cli, ["validate", str(_write(tmp_path, raw))])
    assert result.exit_code == 2
    assert "Error:" in result.output
    assert "Field: family.kind" in result.output


def test_validate_reports_line(tmp_path):
    result = CliRunner().invoke(cli, ["validate", str(_write(tmp_path, '{\n  "name": \n}'))])
    assert result.exit_code == 2
    assert "Line: 3" in result.output


def test_run_writes_outputs(tmp_path):
    path = _write(tmp_path, TINY)
    result = CliRunner().invoke(cli, ["run", str(path), "--out", str(tmp_path / "res"), "--jobs", "2"])
    assert result.exit_code == 0, result.output
    assert "Result: PASS" in result.output
    assert (tmp_path / "res.report.json").exists()
    assert (tmp_path / "res.profile.csv").exists()


def test_run_detail(tmp_path):
    path = _write(tmp_path, TINY)
    result = CliRunner().invoke(cli, ["run", str(path), "--out", str(tmp_path / "res"), "--detail"])
    assert result.exit_code == 0
    assert "FAILING POINTS:" in result.output


@pytest.mark.slow
def test_negative_control_exits_one(tmp_path):
    result = CliRunner().invoke(cli, ["run", str(SCENARIOS / "ellipsoid_control.scenario"),
                                      "--out", str(tmp_path / "control")])
    assert result.exit_code == 1
    assert "Result: FAIL" in result.output


def test_bad_tol_option(tmp_path):
    path = _write(tmp_path, TINY)
    for bad in ("beta_norm", "beta_norm=abc", "beta_norm=-1", "nope=1e-3"):
        result = CliRunner().invoke(cli, ["run", str(path), "--out", str(tmp_path / "res"), "--tol", bad])
        assert result.exit_code == 2, bad
        assert "Field: tol" in result.output


def test_schema():
    result = CliRunner().invoke(cli, ["schema"])
    assert result.exit_code == 0
    assert "family" in json.loads(result.output)["properties"]


def test_missing_settings_file(tmp_path):
    path = _write(tmp_path, TINY)
    result = CliRunner().invoke(cli, ["--config", str(tmp_path / "none.yaml"), "run", str(path)])
    assert result.exit_code == 2
    assert "Settings file not found" in result.output
