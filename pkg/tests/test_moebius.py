"""Test Moebius invariants - universal identities, oracles and conformal invariance."""
import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings as hsettings, strategies as st

from moebius_lab.constructions.conformal import dilation, inversion, rotation, transform_chart, translation
from moebius_lab.constructions.families import spiral_family
from moebius_lab.core.errors import DimensionTooSmall, UmbilicPoint
from moebius_lab.geometry.curvature import orthonormal_frame, sample_planes, sectional_profile
from moebius_lab.geometry.lightcone import LightConeModel, minkowski_inner
from moebius_lab.geometry.moebius import (
    beta_trace_and_norm,
    blaschke_from_ricci,
    blaschke_tensor_direct,
    blaschke_tensor_via_ric,
    blaschke_trace_defect,
    conformal_gauss_defect,
    conformal_gauss_residual,
    kulkarni_defect,
    kulkarni_flatness_residual,
    metric_curvature_via_fd,
    moebius_data,
    moebius_form,
    moebius_form_closedness,
    moebius_lift_metric_check,
    moebius_metric,
    moebius_second_fundamental_form,
    product_conformal_flatness,
    star_curvature_via_conformal_change,
    star_curvature_via_fd,
)


def test_circle_cylinder_package(circle_cylinder):
    data = moebius_data(circle_cylinder, [0.2, 0.3])
    assert data.rho == pytest.approx(1.0)
    assert np.allclose(data.gstar, np.eye(2))
    assert np.abs(data.sectional.values).max() < 1e-10
    assert np.abs(data.moebius_form).max() < 1e-12


def test_beta_identities(circle_cylinder, round_cylinder4):
    for chart, x in ((circle_cylinder, [0.1, -0.4]), (round_cylinder4, [0.3, 0.1, -0.2, 0.5])):
        data = moebius_data(chart, x)
        trace, norm = beta_trace_and_norm(data)
        assert trace < 1e-10
        assert norm == pytest.approx((data.n - 1) / data.n, abs=1e-9)


def test_blaschke_trace(circle_cylinder):
    data = moebius_data(circle_cylinder, [0.0, 0.0])
    # flat g*, n = 2: tr psi = (n^2 s* + 1)/(2n) = 1/4
    assert np.trace(data.gstar_inv @ data.blaschke) == pytest.approx(0.25)
    assert blaschke_trace_defect(data) < 1e-12


def test_conformal_gauss_and_lift(circle_cylinder, round_cylinder4):
    for chart, x in ((circle_cylinder, [0.5, 0.5]), (round_cylinder4, [-0.3, 0.2, 0.0, 0.4])):
        data = moebius_data(chart, x)
        assert conformal_gauss_defect(data) < 1e-10
        assert moebius_lift_metric_check(chart, x) < 1e-10


def test_blaschke_paths_agree(round_cylinder4):
    data = moebius_data(round_cylinder4, [0.1, 0.2, 0.3, 0.4])
    assert np.abs(data.blaschke - blaschke_from_ricci(data)).max() < 1e-10


def test_small_dimensions_are_rejected(circle_cylinder):
    data = moebius_data(circle_cylinder, [0.0, 0.0])
    with pytest.raises(DimensionTooSmall):
        blaschke_from_ricci(data)
    with pytest.raises(DimensionTooSmall):
        kulkarni_defect(data)


def test_flat_cylinder_is_conformally_flat(round_cylinder4):
    data = moebius_data(round_cylinder4, [0.2, -0.2, 0.1, 0.0])
    assert data.rho == pytest.approx(0.5)
    assert kulkarni_defect(data) < 1e-10


def test_moebius_form_closed_on_flat_cylinder(round_cylinder4):
    report = moebius_form_closedness(round_cylinder4, [0.0, 0.1, 0.2, 0.3])
    assert report.closed_residual < 1e-8
    assert report.ricci_identity_residual < 1e-8


def test_star_curvature_oracle(round_cylinder4):
    x = np.array([0.1, 0.0, -0.1, 0.2])
    data = moebius_data(round_cylinder4, x)
    fd = star_curvature_via_fd(round_cylinder4, x, planes=data.sectional.planes)
    assert np.abs(fd.values - data.sectional.values).max() < 1e-4


def test_round_metric_curvature_by_finite_differences():
    def round_metric(w):
        return 4.0 * np.eye(2) / (1.0 + w @ w) ** 2

    profile = metric_curvature_via_fd(round_metric, [0.3, -0.2], random_planes=3)
    assert np.abs(profile.values - 1.0).max() < 1e-6


def test_umbilic_point_raises():
    import jax.numpy as jnp

    from moebius_lab.core.chart import exact_chart

    cap = exact_chart(lambda x, p: jnp.stack([x[0], x[1], jnp.sqrt(4.0 - x[0] ** 2 - x[1] ** 2)]),
                      [(-0.5, 0.5), (-0.5, 0.5)], 3, "cap")
    with pytest.raises(UmbilicPoint):
        moebius_data(cap, [0.1, 0.1])


def test_product_conformal_flatness():
    assert product_conformal_flatness(1.0, 2, -1.0, 2)
    assert product_conformal_flatness(0.0, 2, 0.0, 3)
    assert product_conformal_flatness(1.0, 1, 5.0, 3)
    assert not product_conformal_flatness(1.0, 2, 1.0, 2)
    with pytest.raises(DimensionTooSmall):
        product_conformal_flatness(1.0, 1, 1.0, 1)


def _families():
    return [
        ("flat_cneg", spiral_family("flat_cneg", {"c": -1.0}, n=4)),
        ("sphere_cneg", spiral_family("sphere_cneg", {"c": -1.0}, n=3)),
        ("hyp_cpos", spiral_family("hyp_cpos", {"c": 4.0}, n=3)),
    ]


def _conformal_maps(m):
    far = np.zeros(m)
    far[-1] = 5.0
    shift = np.linspace(0.5, -0.5, m)
    return [dilation(2.5, m), translation(shift), inversion(far, radius=1.5)]


def _invariants(chart, x):
    data = moebius_data(chart, x, random_planes=0)
    psi_values = np.sort(np.linalg.eigvals(data.blaschke_endomorphism).real)
    return data.gstar, psi_values, data.sectional.values


@pytest.mark.slow
@pytest.mark.parametrize("name,chart", _families())
def test_moebius_invariants_survive_conformal_maps(name, chart):
    x = chart.domain.center + 0.1 * (chart.domain.upper - chart.domain.lower) / 2
    gstar, psi, kstar = _invariants(chart, x)
    for cmap in _conformal_maps(chart.ambient_dim):
        moved = transform_chart(chart, cmap)
        g2, psi2, k2 = _invariants(moved, x)
        assert np.allclose(g2, gstar, rtol=1e-6, atol=1e-8), cmap.name
        assert np.allclose(psi2, psi, rtol=1e-6, atol=1e-6), cmap.name
        assert np.allclose(k2, kstar, rtol=1e-6, atol=1e-6), cmap.name


@hsettings(max_examples=10, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(seed=st.integers(0, 2 ** 16), s=st.floats(-0.8, 0.8), u=st.floats(-0.8, 0.8))
def test_moebius_metric_is_rigid_motion_invariant(circle_cylinder, seed, s, u):
    moved = transform_chart(circle_cylinder, rotation(dim=3, rng=np.random.default_rng(seed)))
    assert np.allclose(moebius_metric(moved, [s, u]), moebius_metric(circle_cylinder, [s, u]), atol=1e-10)


@hsettings(max_examples=10, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(seed=st.integers(0, 2 ** 16))
def test_sectional_curvature_is_frame_independent(round_cylinder4, seed):
    data = moebius_data(round_cylinder4, [0.1, 0.2, -0.3, 0.0], random_planes=0)
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    frame = orthonormal_frame(data.gstar) @ q
    assert conformal_gauss_defect(data, frame=frame) < 1e-10
    planes = sample_planes(data.gstar, rng, 5)
    profile = sectional_profile(data.riemann_star, data.gstar, planes)
    assert np.abs(profile.values).max() < 1e-10


def test_chart_level_wrappers(round_cylinder4):
    x = [0.1, -0.1, 0.2, 0.0]
    data = moebius_data(round_cylinder4, x, random_planes=0)
    assert np.allclose(blaschke_tensor_direct(round_cylinder4, x), data.blaschke)
    assert np.allclose(blaschke_tensor_via_ric(round_cylinder4, x), data.blaschke, atol=1e-10)
    assert np.allclose(moebius_second_fundamental_form(round_cylinder4, x), data.beta)
    assert np.allclose(moebius_form(round_cylinder4, x), 0.0, atol=1e-12)
    assert conformal_gauss_residual(round_cylinder4, x) < 1e-10
    assert kulkarni_flatness_residual(round_cylinder4, x) < 1e-10
    profile = star_curvature_via_conformal_change(round_cylinder4, x, random_planes=3)
    assert len(profile.values) == 6 + 3


def test_sampled_curvature_keys(round_cylinder4):
    data = moebius_data(round_cylinder4, [0.0, 0.0, 0.0, 0.0], random_planes=2)
    keys = list(data.sec_star)
    assert keys[:6] == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    assert keys[6:] == [0, 1]


def test_light_cone_model():
    model = LightConeModel.canonical(3)
    assert model.p0.norm_sq == 0.0
    assert model.w.norm_sq == 0.0
    assert model.p0.inner(model.w) == pytest.approx(1.0)
    y = np.array([0.3, -1.2, 2.0])
    assert minkowski_inner(model.psi(y), model.psi(y)) == pytest.approx(0.0, abs=1e-12)
