"""Negative controls: charts that must fail the conformal-flatness or normal-flatness checks."""

from __future__ import annotations

from typing import Sequence

import jax.numpy as jnp

from moebius_lab.core.chart import ImmersionChart, exact_chart

ELLIPSOID_AXES = (1.0, 1.5, 2.5)


def ellipsoid_cross_line(axes: Sequence[float] = ELLIPSOID_AXES, half_width: float = 0.3) -> ImmersionChart:
    """Upper sheet of the ellipsoid sum x_i^2/a_i^2 + z^2 = 1 in R^4, times a line; n = 4, p = 1.

    The three-dimensional ellipsoid has non-constant curvature, so the product
    is not conformally flat.
    """
    a = jnp.asarray([float(v) for v in axes])
    if a.shape[0] != 3:
        raise ValueError(f"ellipsoid_cross_line needs three semi-axes, got {len(axes)}")

    def fn(x, params):
        base = x[:3]
        height = jnp.sqrt(1.0 - jnp.sum((base / a) ** 2))
        return jnp.concatenate([base, jnp.atleast_1d(height), x[3:]])

    bounds = [(-half_width, half_width)] * 3 + [(-1.0, 1.0)]
    return exact_chart(fn, bounds, 5, "ellipsoid_cross_line", meta={"kind": "control", "n": 4, "p": 1})


def complex_parabola(half_width: float = 0.5) -> ImmersionChart:
    """The complex curve z -> (z, z^2) in C^2 = R^4; minimal with non-flat normal bundle."""

    def fn(x, params):
        u, v = x[0], x[1]
        return jnp.stack([u, v, u * u - v * v, 2.0 * u * v])

    bounds = [(-half_width, half_width)] * 2
    return exact_chart(fn, bounds, 4, "complex_parabola", meta={"kind": "control", "n": 2, "p": 2})


def complex_parabola_cross(n: int = 3, half_width: float = 0.5) -> ImmersionChart:
    """complex_parabola x R^(n-2) in R^(n+2), a twisted control in any dimension n >= 2."""

    def fn(x, params):
        u, v = x[0], x[1]
        return jnp.concatenate([jnp.stack([u, v, u * u - v * v, 2.0 * u * v]), x[2:]])

    bounds = [(-half_width, half_width)] * 2 + [(-1.0, 1.0)] * (n - 2)
    return exact_chart(fn, bounds, n + 2, f"complex_parabola_x_R{n - 2}", meta={"kind": "control", "n": n, "p": 2})
