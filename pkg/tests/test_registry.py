"""Test check registry - registration, lookup and the bundled check set."""
import pytest

from moebius_lab.core.registry import Check, CheckRegistry, Measurement, get_registry
from moebius_lab.core.results import CheckResult, Status, verdict_for

EXPECTED_CHECKS = [
    "jet_agreement",
    "rho_formula",
    "beta_trace",
    "beta_norm",
    "blaschke_trace",
    "blaschke_paths",
    "moebius_lift",
    "conformal_gauss",
    "star_curvature_paths",
    "constant_curvature",
    "moebius_form_closed",
    "ricci_identity",
    "ricci_equation",
    "normal_flatness",
    "sectional_principal_normals",
    "moebius_normals",
    "kulkarni",
    "multiplicity_census",
    "dupin",
]


def test_bundled_checks():
    registry = get_registry()
    assert registry.names() == EXPECTED_CHECKS
    assert len(registry) == 19


def test_named_anchors():
    registry = get_registry()
    assert registry.get_check("conformal_gauss").anchor == "The conformal Gauss equation"
    assert registry.get_check("kulkarni").anchor == "Kulkarni's formula"
    assert registry.get_check("ricci_equation").anchor == "The conformal Ricci equation"


def test_metadata_tags_and_modules():
    meta = {m.name: m for m in get_registry().list_checks()}
    assert meta["jet_agreement"].tags == ["exact-only"]
    assert meta["jet_agreement"].module == "chart-core"
    assert meta["dupin"].module == "normal-structure"
    assert all(m.default_tol > 0 for m in meta.values())
    assert all(m.description for m in meta.values())


def test_duplicate_names_are_rejected():
    registry = CheckRegistry()
    item = Check(name="x", fn=lambda ctx: 0.0, anchor="a", description="d", default_tol=1.0)
    registry.register(item)
    with pytest.raises(ValueError, match="already registered"):
        registry.register(item)


def test_unknown_check_lookup():
    with pytest.raises(KeyError, match="Unknown check 'nope'"):
        get_registry().get_check("nope")


def test_check_run_wraps_floats():
    item = Check(name="x", fn=lambda ctx: 0.25, anchor="a", description="d", default_tol=1.0)
    assert item.run(None) == Measurement(residual=0.25)


def _results(*statuses):
    return [CheckResult("x", s, 1e-6, residual=None if s is Status.SKIP else 1e-9 * i)
            for i, s in enumerate(statuses)]


@pytest.mark.parametrize(
    "statuses,expected",
    [
        ((Status.PASS, Status.PASS), Status.PASS),
        ((Status.PASS, Status.WARN), Status.WARN),
        ((Status.WARN, Status.FAIL), Status.FAIL),
        ((Status.PASS, Status.ERROR), Status.FAIL),
        ((Status.SKIP, Status.PASS), Status.PASS),
        ((Status.SKIP, Status.SKIP), Status.SKIP),
    ],
)
def test_verdict_precedence(statuses, expected):
    verdict = verdict_for("x", 1e-6, _results(*statuses))
    assert verdict.status is expected
    assert sum(verdict.counts.values()) == len(statuses)


def test_verdict_of_skips_has_no_residual():
    assert verdict_for("x", 1e-6, _results(Status.SKIP)).worst_residual is None
