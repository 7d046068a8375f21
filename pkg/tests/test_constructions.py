"""Test constructions - space forms, Frenet curves, spirals, families and products."""
import jax.numpy as jnp
import numpy as np
import pytest

from moebius_lab.constructions.families import FamilySpec, build_family, spiral_family
from moebius_lab.constructions.frenet import (
    Curve,
    CurveSpec,
    constant_curvature_curve,
    frenet_curve,
    integrate_curve,
)
from moebius_lab.constructions.products import (
    mean_curvature_hessian,
    product_curve_surface,
    spiral_product_family,
    spiral_product_kappa,
)
from moebius_lab.constructions.space_forms import (
    SpaceForm,
    ball_to_hyperboloid,
    half_space_to_hyperboloid,
    hyperboloid_to_ball,
    hyperboloid_to_half_space,
    tangent_frame,
)
from moebius_lab.constructions.spirals import (
    PROFILES,
    SpiralCase,
    check_spiral_domain,
    moebius_curvature_of,
    spiral_kappa,
)
from moebius_lab.constructions.theta import theta_cone, theta_rotational
from moebius_lab.core.chart import evaluate_jet
from moebius_lab.core.errors import DomainViolation, ParamOutOfRange, SpecInvalid
from moebius_lab.core.jets import fd_jet_oracle
from moebius_lab.geometry.moebius import moebius_data


# Space forms


def test_space_form_curvature_must_match_model():
    with pytest.raises(SpecInvalid, match="inconsistent"):
        SpaceForm(1, 2, "euclidean")
    with pytest.raises(SpecInvalid, match="Unknown space form model"):
        SpaceForm(0, 2, "torus")


def test_hyperboloid_tangent_frame_is_lorentz_orthonormal():
    space = SpaceForm.hyperboloid(2)
    x = np.array([np.cosh(0.7), np.sinh(0.7) * 0.6, np.sinh(0.7) * 0.8])
    frame = tangent_frame(space, x)
    gram = np.array([[space.inner(a, b) for b in frame.T] for a in frame.T])
    assert np.allclose(gram, np.eye(2))
    assert all(abs(space.inner(v, x)) < 1e-12 for v in frame.T)


def test_half_space_conversion_round_trip():
    z = jnp.asarray([0.3, 1.7])
    x = half_space_to_hyperboloid(z)
    assert SpaceForm.hyperboloid(2).contains(np.asarray(x))
    assert np.allclose(hyperboloid_to_half_space(x), z)


def test_ball_model_round_trip():
    b = jnp.asarray([0.2, -0.5])
    x = ball_to_hyperboloid(b)
    assert SpaceForm.hyperboloid(2).contains(np.asarray(x))
    assert np.allclose(hyperboloid_to_ball(x), b)


# Frenet curves


def test_integrated_circle_matches_closed_form():
    plane = SpaceForm.euclidean(2)
    curve = integrate_curve(CurveSpec(plane, lambda s: 0.5 + 0.0 * s, (-1.0, 1.0), label="int"))
    exact = constant_curvature_curve(plane, 0.5, (-1.0, 1.0))
    for s in np.linspace(-1.0, 1.0, 7):
        assert np.allclose(curve.position(s), exact.position(s), atol=1e-10)
        assert curve.kappa(s) == pytest.approx(0.5)


@pytest.mark.parametrize("space", [SpaceForm.sphere(2), SpaceForm.hyperboloid(2)])
def test_integrated_curves_stay_on_model(space):
    curve = integrate_curve(CurveSpec(space, lambda s: 1.0 + 0.3 * jnp.sin(s), (-1.5, 1.5)))
    for s in (-1.5, -0.2, 0.9, 1.5):
        gamma, tangent, normal = curve.state(s)
        assert space.constraint_defect(gamma) < 1e-10
        assert space.inner(tangent, tangent) == pytest.approx(1.0)
        assert abs(space.inner(tangent, normal)) < 1e-10


def test_frenet_derivatives_follow_the_system():
    plane = SpaceForm.euclidean(2)
    spec = CurveSpec(plane, lambda s: 1.0 + s * s, (-0.5, 0.5))
    point = frenet_curve(spec, 0.2)
    kappa = 1.0 + 0.2 ** 2
    assert np.allclose(point.derivatives[1], point.tangent)
    assert np.allclose(point.derivatives[2], kappa * point.normal)


def test_integrated_spiral_curvature_by_finite_differences():
    spec = CurveSpec(SpaceForm.euclidean(2), spiral_kappa("flat_cneg", {"c": -1.0}), (0.5, 3.0), label="spiral")
    curve = integrate_curve(spec)
    for s in (1.0, 1.6, 2.2, 2.8):
        jet = fd_jet_oracle(lambda t: curve.position(t[0]), [s], 2, step=5e-3)
        d1, d2 = jet.d1[:, 0], jet.d2[:, 0, 0]
        kappa = abs(d1[0] * d2[1] - d1[1] * d2[0]) / np.linalg.norm(d1) ** 3
        assert abs(kappa - 1.0 / s) < 1e-7, s


def test_curve_spec_rejects_bad_frames():
    plane = SpaceForm.euclidean(2)
    e0 = np.array([1.0, 0.0])
    with pytest.raises(SpecInvalid, match="<T, N> = 0"):
        CurveSpec(plane, lambda s: 1.0 + 0.0 * s, (0.0, 1.0), initial_frame=(np.zeros(2), e0, e0))
    with pytest.raises(SpecInvalid, match="hyperboloid model"):
        CurveSpec(SpaceForm.half_space(2), lambda s: 1.0 + 0.0 * s, (0.0, 1.0))
    with pytest.raises(SpecInvalid, match="a < b"):
        CurveSpec(plane, lambda s: 1.0 + 0.0 * s, (1.0, 0.0))


def test_curve_interface_is_abstract():
    with pytest.raises(TypeError, match="abstract"):
        Curve()


def test_curve_domain_is_enforced():
    curve = constant_curvature_curve(SpaceForm.euclidean(2), 1.0, (0.0, 1.0))
    with pytest.raises(DomainViolation):
        curve.position(1.5)


# Spirals


def test_spiral_profiles():
    assert PROFILES[SpiralCase.SPHERE_CNEG].family == "generalized_cone"
    assert PROFILES[SpiralCase.HYP_C0].family == "rotational"
    assert float(spiral_kappa("flat_cneg", {"c": -4.0})(2.0)) == pytest.approx(0.25)
    assert float(spiral_kappa("hyp_cpos", {"c": 4.0})(0.0)) == pytest.approx(0.5)
    assert moebius_curvature_of("hyp_c0", {}) == 0.0
    assert moebius_curvature_of("hyp_cneg", {"c": -2.0}) == -2.0


def test_spiral_parameters_are_checked():
    with pytest.raises(ParamOutOfRange, match="Unknown spiral case"):
        spiral_kappa("helix", {})
    with pytest.raises(ParamOutOfRange, match="needs c < 0"):
        spiral_kappa("flat_cneg", {"c": 1.0})
    with pytest.raises(ParamOutOfRange, match="needs parameter 'r'"):
        spiral_kappa("flat_c0", {})
    with pytest.raises(ParamOutOfRange, match="arclength"):
        check_spiral_domain("sphere_cneg", (0.0, 1.0))


# Theta maps


def test_theta_cone_is_conformal():
    y = np.array([0.0, 0.0, 1.0])
    z = np.array([2.0, 0.5])
    assert np.allclose(theta_cone(y, z), [0.0, 0.0, 2.0, 0.5])
    assert theta_cone.conformal_factor(y, z) == 2.0
    d1 = theta_cone.jet(y, z, order=1).d1
    sphere_tangent = d1 @ np.array([1.0, 0.0, 0.0, 0.0, 0.0])
    height = d1 @ np.array([0.0, 0.0, 0.0, 1.0, 0.0])
    # factor^2 times the unit sphere and half-space metrics
    assert np.linalg.norm(sphere_tangent) == pytest.approx(2.0)
    assert np.linalg.norm(height) == pytest.approx(1.0)


def test_cone_family_metric():
    chart = spiral_family("sphere_cneg", {"c": -1.0}, n=3)
    lower, upper = chart.domain.lower, chart.domain.upper
    for t in (0.2, 0.5, 0.8):
        x = lower + t * (upper - lower)
        d1 = evaluate_jet(chart, x, 1).d1
        # z1^2 times the product metric ds^2 + |dz|^2 / z1^2
        assert np.allclose(d1.T @ d1, np.diag([x[1] ** 2, 1.0, 1.0]), atol=1e-10)


def test_theta_rotational_domain():
    z = np.array([0.3, 1.5])
    y = np.array([0.6, 0.8])
    assert np.allclose(theta_rotational(z, y), [0.3, 0.9, 1.2])
    with pytest.raises(DomainViolation, match="height"):
        theta_rotational(np.array([0.3, -1.0]), y)
    with pytest.raises(DomainViolation, match="unit norm"):
        theta_rotational(z, np.array([1.0, 1.0]))


# Families


def test_build_family_lists_every_problem():
    curve = constant_curvature_curve(SpaceForm.euclidean(2), 1.0, (-1.0, 1.0))
    with pytest.raises(SpecInvalid) as info:
        build_family(FamilySpec("cone", curve, n=1, p=1, ell=1))
    message = str(info.value)
    assert "kind 'cone'" in message
    assert "n must be >= 2" in message
    assert "ell must satisfy" in message
    assert message.count("\n  - ") >= 3


def test_family_model_must_match_kind():
    curve = constant_curvature_curve(SpaceForm.euclidean(2), 1.0, (-1.0, 1.0))
    with pytest.raises(SpecInvalid, match="sphere model"):
        build_family(FamilySpec("generalized_cone", curve, n=3, p=1, ell=0))


def test_spiral_family_meta():
    chart = spiral_family("flat_cneg", {"c": -1.0}, n=3, p=2)
    assert chart.intrinsic_dim == 3 and chart.ambient_dim == 5
    assert chart.meta["target_curvature"] == -1.0
    assert chart.meta["curve_axis"] == 0
    assert chart.meta["ell"] == 1


def test_circle_cylinder_family_rho():
    chart = spiral_family("flat_c0", {"r": 2.0}, n=2)
    x = [0.3, 0.2]
    assert moebius_data(chart, x).rho == pytest.approx(chart.meta["expected_rho"](x))
    assert np.abs(moebius_data(chart, x).sectional.values).max() < 1e-9


_SPIRAL_CASES = [
    ("flat_c0", {"r": 2.0}),
    ("flat_cneg", {"c": -1.0}),
    ("sphere_cneg", {"c": -1.0}),
    ("hyp_cpos", {"c": 4.0}),
    ("hyp_cneg", {"c": -1.0}),
    ("hyp_c0", {}),
]


@pytest.mark.slow
@pytest.mark.parametrize("case,params", _SPIRAL_CASES)
def test_spiral_families_have_constant_moebius_curvature(case, params):
    chart = spiral_family(case, params, n=3)
    target = chart.meta["target_curvature"]
    lower, upper = chart.domain.lower, chart.domain.upper
    pad = 0.05 * (upper - lower)
    rng = np.random.default_rng(0)
    for s in np.linspace(lower[0] + pad[0], upper[0] - pad[0], 10):
        for fiber in (-0.5, 0.5):
            x = np.array([s, lower[1] + (0.5 + 0.4 * fiber) * (upper[1] - lower[1]), 0.5 * (lower[2] + upper[2])])
            data = moebius_data(chart, x, rng=rng, random_planes=10)
            assert np.abs(data.sectional.values - target).max() < 1e-5, (case, x)
            assert data.rho == pytest.approx(chart.meta["expected_rho"](x), rel=1e-8)


# Products


def test_spiral_product_kappa_validation():
    with pytest.raises(ParamOutOfRange):
        spiral_product_kappa(c=1.0)
    with pytest.raises(ParamOutOfRange):
        spiral_product_kappa(r=0.0)
    with pytest.raises(ParamOutOfRange, match="s1"):
        spiral_product_family(c=-1.0, r=1.0, domain1=(0.5, 1.2))


def test_product_of_unit_circles():
    chart = product_curve_surface(1.0, 1.0, (-1.0, 1.0), (-1.0, 1.0), n=3)
    assert (chart.intrinsic_dim, chart.ambient_dim) == (3, 5)
    assert moebius_data(chart, [0.2, -0.1, 0.0]).rho == pytest.approx(np.sqrt(2.0))


@pytest.mark.slow
def test_spiral_product_family():
    chart = spiral_product_family(c=-1.0, r=1.0, n=5)
    rng = np.random.default_rng(5)
    for s1 in np.linspace(0.33, 0.77, 10):
        x = np.array([s1, *rng.uniform(-0.8, 0.8, size=4)])
        data = moebius_data(chart, x, rng=rng, random_planes=5)
        assert np.abs(data.sectional.values + 1.0).max() < 1e-6, x
        assert data.rho == pytest.approx(chart.meta["expected_rho"](x), rel=1e-8)
        assert np.abs(mean_curvature_hessian(chart, x)).max() < 1e-6, x


def test_mean_curvature_hessian_needs_cylinder():
    from moebius_lab.constructions.controls import complex_parabola

    with pytest.raises(SpecInvalid, match="cylinder"):
        mean_curvature_hessian(complex_parabola(), [0.0, 0.0])
