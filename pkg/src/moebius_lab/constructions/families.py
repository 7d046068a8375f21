"""Cylinders, generalized cones and rotational submanifolds over a core g.

For a core g: M^(p-l) -> Q^(2p-l)_c the family is Theta o (g, id):

- cylinder: R^(2p-l) x R^(n-p+l) (identity map), c = 0
- generalized cone: S^(2p-l) x H^(n-p+l) -> R^(n+p), (y, z) -> (z1 y, z2, ...), c = 1
- rotational: H^(2p-l) x S^(n-p+l) -> R^(n+p), (z, y) -> (z', z_last y), c = -1

Curve cores (p - l = 1) live in a totally geodesic Q^2 of Q^(p+1) and are
padded with zeros; the product core is gamma1 x gamma2 in R^4 (p = 2, l = 0).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import jax.numpy as jnp
import numpy as np

from moebius_lab.core.chart import (
    ExactEvaluator,
    FiniteDifferenceEvaluator,
    ImmersionChart,
    evaluate_jet,
)
from moebius_lab.core.errors import SpecInvalid
from moebius_lab.core.jets import DomainBox, as_coords
from moebius_lab.constructions.frenet import (
    Curve,
    CurveSpec,
    constant_curvature_curve,
    integrate_curve,
)
from moebius_lab.constructions.space_forms import (
    Model,
    SpaceForm,
    hyperboloid_to_half_space,
    stereographic_sphere,
)
from moebius_lab.constructions.spirals import (
    PROFILES,
    SpiralCase,
    check_spiral_domain,
    moebius_curvature_of,
    spiral_kappa,
)
from moebius_lab.constructions.theta import cone_map, rotational_map
from moebius_lab.geometry.fundamental import fundamental_data

logger = logging.getLogger(__name__)

KINDS = ("cylinder", "generalized_cone", "rotational")
_CORE_MODEL = {"cylinder": Model.EUCLIDEAN, "generalized_cone": Model.SPHERE, "rotational": Model.HYPERBOLOID}

DEFAULT_FIBER_BOUNDS = {
    "cylinder": (-1.0, 1.0),
    "generalized_cone": (-1.0, 1.0),
    "rotational": (-0.8, 0.8),
}
CONE_HEIGHT_BOUNDS = (0.5, 2.0)


@dataclass(frozen=True)
class ProductCore:
    """gamma1 x gamma2 in R^2 x R^2, parametrized by the two arclengths."""

    first: Curve
    second: Curve


@dataclass(frozen=True, eq=False)
class FamilySpec:
    kind: str
    core: CurveSpec | Curve | ProductCore | ImmersionChart
    n: int
    p: int
    ell: int
    params: Mapping[str, Any] = field(default_factory=dict)
    fiber_bounds: Sequence[tuple[float, float]] | None = None
    label: str | None = None

    @property
    def core_dim(self) -> int:
        return self.p - self.ell


def _as_curve(core: CurveSpec | Curve) -> Curve:
    return integrate_curve(core) if isinstance(core, CurveSpec) else core


def _validate(spec: FamilySpec) -> None:
    problems = []
    if spec.kind not in KINDS:
        problems.append(f"kind '{spec.kind}' is not one of {', '.join(KINDS)}")
    if spec.n < 2:
        problems.append(f"n must be >= 2, got {spec.n}")
    if spec.p < 1:
        problems.append(f"p must be >= 1, got {spec.p}")
    if not 0 <= spec.ell <= spec.p - 1:
        problems.append(f"ell must satisfy 0 <= ell <= p - 1, got ell={spec.ell}, p={spec.p}")
    if spec.n - spec.p + spec.ell < 1:
        problems.append(f"fiber dimension n - p + ell must be >= 1, got {spec.n - spec.p + spec.ell}")
    core = spec.core
    if isinstance(core, (CurveSpec, Curve)):
        space = core.ambient if isinstance(core, CurveSpec) else core.space
        if spec.core_dim != 1:
            problems.append(f"curve cores need p - ell = 1, got {spec.core_dim}")
        if spec.kind in _CORE_MODEL and space.model is not _CORE_MODEL[spec.kind]:
            problems.append(f"{spec.kind} needs a curve in the {_CORE_MODEL[spec.kind].value} model, "
                            f"got {space.model.value}")
        if space.dim != 2:
            problems.append(f"curve cores live in 2-dimensional models, got dimension {space.dim}")
    elif isinstance(core, ProductCore):
        if spec.kind != "cylinder" or spec.p != 2 or spec.ell != 0:
            problems.append("product-of-curves cores only build cylinders with p = 2, ell = 0")
    elif isinstance(core, ImmersionChart):
        if spec.kind != "cylinder":
            problems.append("chart cores only build cylinders")
        if core.intrinsic_dim != spec.core_dim or core.ambient_dim != 2 * spec.p - spec.ell:
            problems.append(
                f"chart core must map M^{spec.core_dim} into R^{2 * spec.p - spec.ell}, "
                f"got {core.intrinsic_dim} -> {core.ambient_dim}"
            )
    else:
        problems.append(f"unsupported core type {type(core).__name__}")
    if problems:
        raise SpecInvalid("Invalid family description:\n" + "\n".join(f"  - {p}" for p in problems))


def _fiber_box(spec: FamilySpec, count: int) -> list[tuple[float, float]]:
    if spec.fiber_bounds is not None:
        bounds = [tuple(b) for b in spec.fiber_bounds]
        if len(bounds) != count:
            raise SpecInvalid(f"fiber_bounds needs {count} intervals, got {len(bounds)}")
        return bounds
    default = DEFAULT_FIBER_BOUNDS[spec.kind]
    if spec.kind == "generalized_cone":
        return [CONE_HEIGHT_BOUNDS] + [default] * (count - 1)
    return [default] * count


def _label(spec: FamilySpec, core_label: str) -> str:
    if spec.label:
        return spec.label
    params = ", ".join(f"{k}={v}" for k, v in sorted(spec.params.items()))
    return f"{spec.kind}[n={spec.n}, p={spec.p}, ell={spec.ell}, core={core_label}{', ' + params if params else ''}]"


def _curve_family(spec: FamilySpec, curve: Curve) -> ImmersionChart:
    n, p = spec.n, spec.p
    pad = jnp.zeros(p - 1)
    local = curve.local_fn

    if spec.kind == "cylinder":
        def fn(x, params):
            return jnp.concatenate([local(x[0], params), pad, x[1:]])

        def expected_rho(x):
            return abs(curve.kappa(x[0]))
    elif spec.kind == "generalized_cone":
        def fn(x, params):
            y = jnp.concatenate([local(x[0], params), pad])
            return cone_map(y, x[1:])

        def expected_rho(x):
            return abs(curve.kappa(x[0])) / x[1]
    else:
        def fn(x, params):
            plane = hyperboloid_to_half_space(local(x[0], params))
            z = jnp.concatenate([plane[:1], pad, plane[1:]])
            return rotational_map(z, stereographic_sphere(x[1:]))

        def expected_rho(x):
            gamma = curve.position(x[0])
            height = 1.0 / (gamma[0] - gamma[1])
            return abs(curve.kappa(x[0])) / height

    bounds = [curve.domain] + _fiber_box(spec, n - 1)
    return ImmersionChart(
        intrinsic_dim=n,
        ambient_dim=n + p,
        domain=DomainBox.from_bounds(bounds),
        evaluator=ExactEvaluator(fn, lambda x: curve.local_params(x[0])),
        label=_label(spec, curve.label),
        meta={"kind": spec.kind, "n": n, "p": p, "ell": spec.ell, "expected_rho": expected_rho,
              "curve_axis": 0, "curve": curve, **dict(spec.params)},
    )


def _product_family(spec: FamilySpec, core: ProductCore) -> ImmersionChart:
    first, second = core.first, core.second

    def fn(x, params):
        return jnp.concatenate([first.local_fn(x[0], params[0]), second.local_fn(x[1], params[1]), x[2:]])

    def params_at(x):
        return (first.local_params(x[0]), second.local_params(x[1]))

    def expected_rho(x):
        return float(np.hypot(first.kappa(x[0]), second.kappa(x[1])))

    bounds = [first.domain, second.domain] + _fiber_box(spec, spec.n - 2)
    return ImmersionChart(
        intrinsic_dim=spec.n,
        ambient_dim=spec.n + 2,
        domain=DomainBox.from_bounds(bounds),
        evaluator=ExactEvaluator(fn, params_at),
        label=_label(spec, f"{first.label}x{second.label}"),
        meta={"kind": "cylinder", "n": spec.n, "p": 2, "ell": 0, "expected_rho": expected_rho,
              "curve_axis": 0, "curve": first, **dict(spec.params)},
    )


def _chart_family(spec: FamilySpec, core: ImmersionChart) -> ImmersionChart:
    k = core.intrinsic_dim
    extra = spec.n - k

    def expected_rho(x):
        fd = fundamental_data(evaluate_jet(core, as_coords(x)[:k], 2))
        return float(k * np.linalg.norm(fd.H))

    bounds = [tuple(b) for b in zip(core.domain.lower, core.domain.upper)] + _fiber_box(spec, extra)
    evaluator = core.evaluator
    if isinstance(evaluator, ExactEvaluator):
        inner = evaluator.fn

        def fn(x, params):
            return jnp.concatenate([inner(x[:k], params), x[k:]])

        source = ExactEvaluator(fn, lambda x: evaluator.params(x[:k]))
    else:
        def point_map(x):
            return np.concatenate([evaluator.point(x[:k]), x[k:]])

        source = FiniteDifferenceEvaluator(point_map, evaluator.step, evaluator.high_step)
    return ImmersionChart(
        intrinsic_dim=spec.n,
        ambient_dim=spec.n + spec.p,
        domain=DomainBox.from_bounds(bounds),
        evaluator=source,
        label=_label(spec, core.label),
        meta={"kind": "cylinder", "n": spec.n, "p": spec.p, "ell": spec.ell, "expected_rho": expected_rho,
              **dict(spec.params)},
    )


def build_family(spec: FamilySpec) -> ImmersionChart:
    """Exact chart of the family described by ``spec``; meta carries ``expected_rho``."""
    _validate(spec)
    core = spec.core
    if isinstance(core, ProductCore):
        chart = _product_family(spec, core)
    elif isinstance(core, ImmersionChart):
        chart = _chart_family(spec, core)
    else:
        chart = _curve_family(spec, _as_curve(core))
    logger.debug("Built family %s", chart.label)
    return chart


def spiral_family(case: SpiralCase | str, params: Mapping[str, float], n: int, p: int = 1,
                  domain: tuple[float, float] | None = None, fiber_bounds=None,
                  rtol: float = 1e-12, atol: float = 1e-14, knot_spacing: float = 0.25) -> ImmersionChart:
    """Family of constant Moebius curvature built over a curvature spiral."""
    case = SpiralCase(case)
    profile = PROFILES[case]
    kappa = spiral_kappa(case, params)
    domain = check_spiral_domain(case, domain or profile.default_domain)
    space = SpaceForm(profile.ambient_curvature, 2, _CORE_MODEL[profile.family])
    label = f"{case.value}"
    if case is SpiralCase.FLAT_C0:
        curve: Curve = constant_curvature_curve(space, 1.0 / float(params["r"]), domain, label=label)
    else:
        curve = integrate_curve(CurveSpec(space, kappa, domain, label=label), rtol, atol, knot_spacing)
    spec = FamilySpec(profile.family, curve, n=n, p=p, ell=p - 1, params=dict(params), fiber_bounds=fiber_bounds,
                      label=None)
    chart = build_family(spec)
    meta = dict(chart.meta)
    meta.update({"spiral_case": case.value, "target_curvature": moebius_curvature_of(case, params)})
    return ImmersionChart(chart.intrinsic_dim, chart.ambient_dim, chart.domain, chart.evaluator, chart.label, meta)
