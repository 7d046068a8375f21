"""Test normal structure - flat normal bundles, principal normals, census and Dupin."""
import jax.numpy as jnp
import numpy as np
import pytest

from moebius_lab.constructions.controls import complex_parabola
from moebius_lab.constructions.families import spiral_family
from moebius_lab.constructions.products import spiral_product_family
from moebius_lab.core.chart import evaluate_jet, exact_chart
from moebius_lab.core.errors import GroupingAmbiguous, NotFlat
from moebius_lab.geometry.fundamental import fundamental_data
from moebius_lab.geometry.moebius import ricci_equation_residual
from moebius_lab.geometry.normal import (
    census_entry,
    dupin_residual,
    moebius_normal_decomposition,
    multiplicity_census,
    normal_bundle_flatness,
    principal_normals,
    sectional_vs_principal_normals,
)


@pytest.fixture(scope="module")
def spiral4():
    return spiral_family("flat_cneg", {"c": -1.0}, n=4)


def _fd(chart, x):
    return fundamental_data(evaluate_jet(chart, x, 2))


def test_hypersurfaces_have_flat_normal_bundle(circle_cylinder):
    assert normal_bundle_flatness(_fd(circle_cylinder, [0.0, 0.0])) == 0.0


def test_complex_parabola_is_twisted():
    chart = complex_parabola()
    fd = _fd(chart, [0.0, 0.0])
    assert normal_bundle_flatness(fd) > 1.0
    with pytest.raises(NotFlat, match="do not commute"):
        principal_normals(fd)


def test_ricci_equation_on_twisted_surface():
    report = ricci_equation_residual(complex_parabola(), [0.0, 0.0])
    assert report.normal_curvature > 1e-3
    assert report.residual < 1e-6


def test_spiral_family_principal_normals(spiral4):
    x = [1.2, 0.1, -0.2, 0.3]
    fd = _fd(spiral4, x)
    pnd = principal_normals(fd)
    assert pnd.pattern == (3, 1)
    assert not pnd.ambiguous
    assert len(pnd.big_groups()) == 1
    assert sectional_vs_principal_normals(fd, pnd) < 1e-10
    # adapted frame stays orthonormal for the induced metric
    frame = pnd.adapted_frame
    assert np.allclose(frame.T @ fd.g @ frame, np.eye(4), atol=1e-10)


def test_moebius_normal_structure(spiral4):
    x = [2.0, 0.0, 0.0, 0.0]
    mnd = moebius_normal_decomposition(spiral4, x)
    assert mnd.eta_bar_norm == pytest.approx(1.0 / 4.0, abs=1e-9)
    assert mnd.sum_f_squared == pytest.approx(1.0, abs=1e-9)
    assert mnd.orthogonality_defect < 1e-10
    assert mnd.table_residual < 1e-9
    assert mnd.simple_beta_norms == [pytest.approx(3.0 / 4.0)]
    assert np.allclose(mnd.eta_bar, -mnd.xi_frame[:, 0] / 4.0)


def test_two_simple_principal_normals():
    chart = spiral_product_family(c=-1.0, r=1.0, n=5)
    x = [0.5, 0.2, 0.0, 0.1, -0.1]
    pnd = principal_normals(_fd(chart, x))
    assert pnd.pattern == (3, 1, 1)
    mnd = moebius_normal_decomposition(chart, x, pnd)
    assert len(mnd.f_values) == 2
    assert mnd.orthogonality_defect < 1e-8
    assert abs(mnd.sum_f_squared - 1.0) < 1e-10
    assert mnd.eta_bar_norm == pytest.approx(0.2, abs=1e-9)
    assert mnd.table_residual < 1e-10
    assert dupin_residual(chart, x) < 1e-6


def test_dupin_condition(spiral4):
    assert dupin_residual(spiral4, [1.5, 0.2, 0.0, -0.1]) < 1e-6


def test_census_on_spiral_family(spiral4):
    grid = [[s, 0.0, 0.0, 0.0] for s in (0.8, 1.5, 2.5)]
    rows = multiplicity_census(spiral4, grid, seed=3)
    assert [row.pattern for row in rows] == [(3, 1)] * 3
    assert all(row.ok for row in rows)
    assert census_entry(principal_normals(_fd(spiral4, grid[0])), 4, 1) == (True, True)
    assert principal_normals(_fd(spiral4, grid[0])).gap_margin < 1e-6


def test_census_records_failures():
    rows = multiplicity_census(complex_parabola(), [[0.0, 0.0]])
    assert not rows[0].ok
    assert "do not commute" in rows[0].message


def _near_double():
    def fn(x, params):
        quad = (x[0] ** 2 + (1.0 + 5e-6) * x[1] ** 2 + 3.0 * x[2] ** 2) / 2.0
        return jnp.stack([x[0], x[1], x[2], quad])

    return exact_chart(fn, [(-0.5, 0.5)] * 3, 4, "near_double")


def test_ambiguous_grouping_is_flagged():
    fd = _fd(_near_double(), [0.0, 0.0, 0.0])
    assert principal_normals(fd).ambiguous
    with pytest.raises(GroupingAmbiguous) as info:
        principal_normals(fd, strict=True)
    assert len(info.value.groupings) == 2


def test_loose_tolerance_merges_near_double():
    fd = _fd(_near_double(), [0.0, 0.0, 0.0])
    pnd = principal_normals(fd, tol=1e-4)
    assert pnd.pattern == (2, 1)
    assert not pnd.ambiguous
