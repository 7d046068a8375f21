"""Products of plane curves: gamma1 x gamma2 in R^4 and cylinders over it."""

from __future__ import annotations

import logging
from typing import Callable

import jax.numpy as jnp
import numpy as np

from moebius_lab.core.chart import ImmersionChart
from moebius_lab.core.errors import ParamOutOfRange, SpecInvalid
from moebius_lab.constructions.families import FamilySpec, ProductCore, build_family
from moebius_lab.constructions.frenet import Curve, CurveSpec, constant_curvature_curve, integrate_curve
from moebius_lab.constructions.space_forms import SpaceForm
from moebius_lab.geometry.local import local_geometry

logger = logging.getLogger(__name__)


def spiral_product_kappa(c: float = -1.0, r: float = 1.0) -> Callable:
    """kappa1(s) = sqrt(-1/(c s^2) - r^2); paired with a circle of radius 1/r it gives constant c."""
    if not c < 0:
        raise ParamOutOfRange(f"spiral_product_kappa needs c < 0, got c={c}")
    if not r > 0:
        raise ParamOutOfRange(f"spiral_product_kappa needs r > 0, got r={r}")
    return lambda s: jnp.sqrt(-1.0 / (c * s * s) - r * r)


def _plane_curve(kappa: float | Callable, domain: tuple[float, float], label: str,
                 rtol: float, atol: float, knot_spacing: float) -> Curve:
    plane = SpaceForm.euclidean(2)
    if callable(kappa):
        return integrate_curve(CurveSpec(plane, kappa, domain, label=label), rtol, atol, knot_spacing)
    return constant_curvature_curve(plane, float(kappa), domain, label=label)


def product_curve_surface(kappa1: float | Callable, kappa2: float | Callable,
                          domain1: tuple[float, float], domain2: tuple[float, float], n: int = 2,
                          fiber_bounds=None, rtol: float = 1e-12, atol: float = 1e-14,
                          knot_spacing: float = 0.25) -> ImmersionChart:
    """Cylinder over gamma1 x gamma2 with constant kappas as circles, callables integrated."""
    first = _plane_curve(kappa1, domain1, "gamma1", rtol, atol, knot_spacing)
    second = _plane_curve(kappa2, domain2, "gamma2", rtol, atol, knot_spacing)
    return build_family(FamilySpec("cylinder", ProductCore(first, second), n=n, p=2, ell=0,
                                   fiber_bounds=fiber_bounds))


def spiral_product_family(c: float = -1.0, r: float = 1.0, n: int = 5,
                          domain1: tuple[float, float] = (0.3, 0.8), domain2: tuple[float, float] = (-1.0, 1.0),
                          **integration) -> ImmersionChart:
    """Product family whose Moebius metric is (ds1^2 + ds2^2 + du^2)/(-c s1^2), curvature c."""
    limit = 1.0 / (r * np.sqrt(-c)) if c < 0 and r > 0 else np.inf
    a, b = domain1
    if not 0.0 < a < b < limit:
        raise ParamOutOfRange(f"spiral product needs 0 < s1 < {limit:.6g}, got [{a}, {b}]")
    chart = product_curve_surface(spiral_product_kappa(c, r), r, domain1, domain2, n=n, **integration)
    meta = dict(chart.meta)
    meta.update({"target_curvature": float(c), "c": float(c), "r": float(r)})
    return ImmersionChart(chart.intrinsic_dim, chart.ambient_dim, chart.domain, chart.evaluator, chart.label, meta)


def mean_curvature_hessian(chart: ImmersionChart, x, power: float = -1.0) -> np.ndarray:
    """Hessian of |H^g|^power on the core of a cylinder family.

    Uses |H^g| = rho/(p - l) and the core block of the induced metric.
    """
    meta = chart.meta
    if meta.get("kind") != "cylinder":
        raise SpecInvalid(f"mean_curvature_hessian needs a cylinder family, got '{chart.label}'")
    k = int(meta["p"]) - int(meta["ell"])
    lg = local_geometry(chart, x)
    scale = float(k)
    h = lg.rho / scale
    dh = lg.drho[:k] / scale
    ddh = lg.ddrho[:k, :k] / scale
    a = float(power)
    first = a * h ** (a - 1.0) * dh
    second = a * (a - 1.0) * h ** (a - 2.0) * np.outer(dh, dh) + a * h ** (a - 1.0) * ddh
    gamma = lg.christoffel[:k, :k, :k]
    return second - np.einsum("kij,k->ij", gamma, first)
