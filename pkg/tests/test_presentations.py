"""Test presentations - brief and comprehensive renderings of a report."""
import pytest

from moebius_lab.engine.runner import run_scenario_model
from moebius_lab.external.contracts import parse_scenario
from moebius_lab.presentations import BriefPresentation, ComprehensivePresentation


@pytest.fixture
def report(settings):
    scenario = parse_scenario({
        "name": "tiny",
        "family": {"kind": "cylinder", "n": 2, "p": 1,
                   "core": {"type": "spiral", "case": "flat_c0", "params": {"r": 2.0}}},
        "grid": {"samples_per_axis": 2},
        "checks": ["beta_norm", "kulkarni"],
        "seed": 4,
    })
    return run_scenario_model(scenario, settings=settings)[0]


def test_brief_text(report):
    text = BriefPresentation(report).render_text()
    lines = text.splitlines()
    assert lines[0] == f"Scenario: tiny  ({report.label})"
    assert "Points: 4  Seed: 4" in text
    assert lines[-1] == "Result: PASS"


def test_brief_json(report):
    assert BriefPresentation(report).render_json() == {
        "scenario": "tiny",
        "passed": True,
        "verdicts": {"beta_norm": "pass", "kulkarni": "skip"},
    }


def test_comprehensive_text(report):
    text = ComprehensivePresentation(report).render_text()
    assert "SCENARIO: tiny" in text
    assert "Kulkarni's formula" in text
    assert "FAILING POINTS:\n  none" in text
    assert "RESULT: PASS" in text


def test_comprehensive_lists_failures(report):
    row = report.rows[2]
    row.statuses["beta_norm"] = "fail"
    report.passed = False
    text = ComprehensivePresentation(report).render_text()
    assert "  #2 (" in text
    assert "beta_norm=" in text
    assert "RESULT: FAIL" in text


def test_comprehensive_json_is_the_report(report):
    assert ComprehensivePresentation(report).render_json()["label"] == report.label
