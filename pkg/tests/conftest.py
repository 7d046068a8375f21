"""Shared fixtures: small exact charts and lab settings."""
import jax.numpy as jnp
import numpy as np
import pytest

import moebius_lab  # noqa: F401  (enables x64 before any chart is traced)
from moebius_lab.core.chart import exact_chart, fd_chart
from moebius_lab.core.settings import LabSettings


def _circle_cylinder(x, params):
    return jnp.stack([jnp.cos(x[0]), jnp.sin(x[0]), x[1]])


def _round_cylinder(x, params):
    # circle of radius 2 in the first plane, three straight directions
    return jnp.concatenate([jnp.stack([2.0 * jnp.cos(x[0] / 2.0), 2.0 * jnp.sin(x[0] / 2.0)]), x[1:]])


@pytest.fixture
def settings():
    return LabSettings()


@pytest.fixture
def circle_cylinder():
    """f(s, u) = (cos s, sin s, u)"""
    return exact_chart(_circle_cylinder, [(-1.0, 1.0), (-1.0, 1.0)], 3, "circle_cylinder")


@pytest.fixture
def circle_cylinder_fd():
    def point_map(x):
        return np.array([np.cos(x[0]), np.sin(x[0]), x[1]])

    return fd_chart(point_map, [(-1.0, 1.0), (-1.0, 1.0)], 3, "circle_cylinder_fd")


@pytest.fixture
def round_cylinder4():
    """Circle of radius 2 times R^3 in R^5; n = 4, p = 1, flat Moebius metric."""
    return exact_chart(_round_cylinder, [(-1.0, 1.0)] * 4, 5, "round_cylinder4")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
