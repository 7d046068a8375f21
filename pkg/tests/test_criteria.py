"""Test classification criteria - warped products and the mean curvature conditions."""
import jax.numpy as jnp
import numpy as np
import pytest

from moebius_lab.constructions.criteria import (
    WarpedData,
    mean_curvature_condition_check,
    warped_constant_curvature_check,
    warped_data_from_mean_curvature,
    warped_product_metric,
)
from moebius_lab.constructions.space_forms import SpaceForm
from moebius_lab.core.errors import SpecInvalid
from moebius_lab.geometry.curvature import autodiff_riemann
from moebius_lab.geometry.fundamental import sectional_curvature

_SPHERE_SAMPLES = [np.array([np.sin(t), -np.cos(t)]) for t in np.linspace(-1.0, 1.0, 5)]
_HYPERBOLOID_SAMPLES = [np.array([np.cosh(t), np.sinh(t)]) for t in np.linspace(-1.0, 1.0, 5)]


def test_euclidean_mean_curvature_condition():
    result = mean_curvature_condition_check(SpaceForm.euclidean(1), lambda x: x[0], c=-1.0, p_minus_ell=1,
                                            samples=[[0.5], [1.0], [2.0]])
    assert result.worst < 1e-12


def test_sphere_mean_curvature_condition():
    result = mean_curvature_condition_check(SpaceForm.sphere(1), lambda x: -x[1], c=-1.0, p_minus_ell=1,
                                            samples=_SPHERE_SAMPLES)
    assert result.hessian < 1e-12
    assert result.gradient < 1e-12


def test_hyperboloid_mean_curvature_condition():
    result = mean_curvature_condition_check(SpaceForm.hyperboloid(1), lambda x: 2.0 * x[0], c=4.0, p_minus_ell=1,
                                            samples=_HYPERBOLOID_SAMPLES)
    assert result.worst < 1e-10


def test_mean_curvature_condition_violations():
    bent = mean_curvature_condition_check(SpaceForm.euclidean(1), lambda x: 1.0 + x[0] ** 2, c=-1.0,
                                          p_minus_ell=1, samples=[[0.0]])
    assert bent.hessian == pytest.approx(2.0)
    flat = mean_curvature_condition_check(SpaceForm.hyperboloid(1), lambda x: 1.0 + 0.0 * x[0], c=-1.0,
                                          p_minus_ell=1, samples=_HYPERBOLOID_SAMPLES[:1])
    assert flat.hessian == pytest.approx(1.0)


def test_h_must_be_positive():
    with pytest.raises(SpecInvalid, match="positive"):
        mean_curvature_condition_check(SpaceForm.euclidean(1), lambda x: x[0], c=-1.0, p_minus_ell=1,
                                       samples=[[-1.0]])


def test_warped_check_detects_bad_warping():
    data = WarpedData(base_metric=lambda w: jnp.eye(1), mu=lambda w: 1.0 + w[0] ** 2, curvature=0.0,
                      fiber_curvature=0.0, base_dim=1)
    result = warped_constant_curvature_check(data, [[0.0]])
    assert result.hessian == pytest.approx(2.0)
    assert result.base == 0.0


def test_warped_check_rejects_wrong_sample_dimension():
    data = WarpedData(base_metric=lambda w: jnp.eye(1), mu=lambda w: 1.0 + 0.0 * w[0], curvature=0.0,
                      fiber_curvature=0.0, base_dim=1)
    with pytest.raises(SpecInvalid, match="base dimension"):
        warped_constant_curvature_check(data, [[0.0, 1.0]])


@pytest.mark.parametrize(
    "space,h,c,samples",
    [
        (SpaceForm.euclidean(1), lambda x: x[0], -1.0, [[0.5], [1.0], [2.0]]),
        (SpaceForm.sphere(1), lambda x: -x[1], -1.0, [[-0.4], [0.0], [0.3]]),
        (SpaceForm.hyperboloid(1), lambda x: 2.0 * x[0], 4.0, [[0.5], [1.0], [2.0]]),
    ],
    ids=["euclidean", "sphere", "hyperboloid"],
)
def test_mean_curvature_warped_data_has_constant_curvature(space, h, c, samples):
    data = warped_data_from_mean_curvature(space, h, c, p_minus_ell=1)
    assert data.fiber_curvature == -space.curvature
    result = warped_constant_curvature_check(data, samples)
    assert result.worst < 1e-9


def test_warped_product_metric_of_mean_curvature_data():
    data = warped_data_from_mean_curvature(SpaceForm.euclidean(1), lambda x: x[0], c=-1.0, p_minus_ell=1)
    metric = warped_product_metric(data, fiber_dim=1)
    g, rm = autodiff_riemann(metric, [1.5, 0.3])
    assert np.allclose(g, np.eye(2) / 1.5 ** 2)
    assert sectional_curvature(rm, g, np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(-1.0, abs=1e-10)
