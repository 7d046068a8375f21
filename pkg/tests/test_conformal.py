"""Test conformal maps - construction, validation and action on charts."""
import numpy as np
import pytest

from moebius_lab.constructions.conformal import dilation, inversion, rotation, transform_chart, translation
from moebius_lab.core.chart import fd_chart
from moebius_lab.core.errors import DomainViolation, SpecInvalid
from moebius_lab.geometry.moebius import moebius_metric


def test_maps_act_on_points():
    y = np.array([1.0, 2.0, 2.0])
    assert np.allclose(dilation(2.0, 3).apply(y), 2.0 * y)
    assert np.allclose(translation([1.0, 0.0, -1.0]).apply(y), [2.0, 2.0, 1.0])
    assert np.allclose(inversion(np.zeros(3), radius=3.0).apply(y), y)


def test_random_rotation_is_orthogonal():
    cmap = rotation(dim=4, rng=np.random.default_rng(2))
    columns = np.stack([cmap.apply(e) for e in np.eye(4)], axis=1)
    assert np.allclose(columns.T @ columns, np.eye(4))
    assert np.linalg.det(columns) == pytest.approx(1.0)


def test_map_validation():
    with pytest.raises(SpecInvalid):
        dilation(0.0, 2)
    with pytest.raises(SpecInvalid, match="orthogonal"):
        rotation(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(SpecInvalid, match="dimension"):
        rotation()


def test_transform_checks_dimensions_and_singularities(circle_cylinder):
    with pytest.raises(SpecInvalid, match="acts on R"):
        transform_chart(circle_cylinder, dilation(2.0, 4))
    center = circle_cylinder.point(circle_cylinder.domain.center)
    with pytest.raises(DomainViolation, match="singular"):
        transform_chart(circle_cylinder, inversion(center))


def test_transformed_chart_keeps_domain_and_label(circle_cylinder):
    moved = transform_chart(circle_cylinder, dilation(3.0, 3))
    assert moved.domain is circle_cylinder.domain
    assert moved.label.endswith(circle_cylinder.label)
    assert "expected_rho" not in moved.meta
    assert moved.meta["conformal_map"] == "dilation(3)"


def test_dilation_keeps_moebius_metric(circle_cylinder):
    moved = transform_chart(circle_cylinder, dilation(3.0, 3))
    x = [0.2, -0.3]
    assert np.allclose(moebius_metric(moved, x), moebius_metric(circle_cylinder, x), atol=1e-10)


def test_finite_difference_charts_transform_too(circle_cylinder_fd):
    moved = transform_chart(circle_cylinder_fd, translation([0.0, 0.0, 4.0]))
    x = [0.1, 0.0]
    assert np.allclose(moebius_metric(moved, x), np.eye(2), atol=1e-5)


def test_pole_away_from_the_centre_is_still_caught(circle_cylinder):
    pole = circle_cylinder.point([0.63, -0.41])
    with pytest.raises(DomainViolation, match="pole"):
        transform_chart(circle_cylinder, inversion(pole))


def test_pole_off_the_surface_is_allowed(circle_cylinder):
    # the axis of the cylinder stays at distance 1 from every image point
    moved = transform_chart(circle_cylinder, inversion(np.array([0.0, 0.0, 0.3])))
    x = [0.2, -0.3]
    assert np.allclose(moebius_metric(moved, x), moebius_metric(circle_cylinder, x), atol=1e-8)
