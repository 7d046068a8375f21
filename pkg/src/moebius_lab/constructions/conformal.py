"""Conformal maps of R^m and their action on charts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import jax.numpy as jnp
import numpy as np
from scipy.optimize import least_squares
from scipy.stats import special_ortho_group

from moebius_lab.core.chart import ExactEvaluator, FiniteDifferenceEvaluator, ImmersionChart
from moebius_lab.core.errors import DomainViolation, SpecInvalid


@dataclass(frozen=True)
class ConformalMap:
    """A conformal diffeomorphism T of (an open subset of) R^m, written in ``jax.numpy``."""

    name: str
    fn: Callable
    dim: int
    singular_point: np.ndarray | None = None

    def __call__(self, y):
        return self.fn(y)

    def apply(self, y) -> np.ndarray:
        return np.asarray(self.fn(jnp.asarray(np.asarray(y, dtype=float))), dtype=float)


def dilation(factor: float, dim: int) -> ConformalMap:
    if factor == 0:
        raise SpecInvalid("Dilation factor must be nonzero")
    factor = float(factor)
    return ConformalMap(f"dilation({factor:g})", lambda y: factor * y, dim)


def translation(offset) -> ConformalMap:
    b = jnp.asarray(np.asarray(offset, dtype=float))
    return ConformalMap(f"translation({np.asarray(offset).tolist()})", lambda y: y + b, int(b.shape[0]))


def rotation(matrix=None, *, dim: int | None = None, rng: np.random.Generator | None = None) -> ConformalMap:
    """Rigid rotation; a random element of SO(dim) when ``matrix`` is omitted."""
    if matrix is None:
        if dim is None:
            raise SpecInvalid("rotation needs a matrix or a dimension")
        matrix = special_ortho_group.rvs(dim, random_state=rng) if dim > 1 else np.eye(1)
    q = np.asarray(matrix, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1] or not np.allclose(q.T @ q, np.eye(q.shape[0]), atol=1e-10):
        raise SpecInvalid("rotation matrix must be square and orthogonal")
    qj = jnp.asarray(q)
    return ConformalMap("rotation", lambda y: qj @ y, q.shape[0])


def inversion(center, radius: float = 1.0) -> ConformalMap:
    """y -> c + r^2 (y - c)/|y - c|^2."""
    c = np.asarray(center, dtype=float)
    cj = jnp.asarray(c)
    r2 = float(radius) ** 2

    def fn(y):
        d = y - cj
        return cj + r2 * d / jnp.sum(d * d)

    return ConformalMap(f"inversion(center={c.tolist()}, radius={radius:g})", fn, c.size, singular_point=c)


POLE_TOLERANCE = 1e-6
# sample budget for the pole scan, before local refinement
POLE_SCAN_POINTS = 729


def _nearest_to_pole(chart: ImmersionChart, pole: np.ndarray) -> tuple[float, np.ndarray]:
    """Smallest |f(x) - pole| over the chart's box: grid scan, then bounded refinement from the best sample."""
    lower, upper = chart.domain.lower, chart.domain.upper
    inset = 1e-3 * (upper - lower)
    lo, hi = lower + inset, upper - inset
    per_axis = int(np.clip(np.floor(POLE_SCAN_POINTS ** (1.0 / chart.intrinsic_dim)), 2, 5))
    axes = [np.linspace(a, b, per_axis) for a, b in zip(lo, hi)]
    samples = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, chart.intrinsic_dim)
    samples = np.vstack([chart.domain.center, samples])

    def distance(x):
        d = float(np.linalg.norm(chart.evaluator.point(x) - pole))
        return d if np.isfinite(d) else np.inf

    dists = np.array([distance(x) for x in samples])
    start = samples[int(np.argmin(dists))]
    refined = least_squares(lambda x: chart.evaluator.point(x) - pole, start, bounds=(lo, hi),
                            xtol=1e-15, ftol=1e-15, gtol=1e-15)
    best = distance(refined.x)
    if best < dists.min():
        return float(best), np.asarray(refined.x)
    return float(dists.min()), start


def transform_chart(chart: ImmersionChart, cmap: ConformalMap) -> ImmersionChart:
    """Chart of T o f with the same domain; exact when ``chart`` is exact."""
    if cmap.dim != chart.ambient_dim:
        raise SpecInvalid(f"{cmap.name} acts on R^{cmap.dim}, chart '{chart.label}' lives in R^{chart.ambient_dim}")
    if cmap.singular_point is not None:
        gap, nearest = _nearest_to_pole(chart, cmap.singular_point)
        if gap < POLE_TOLERANCE:
            raise DomainViolation(
                f"{cmap.name} is singular on the image of '{chart.label}': "
                f"pole {cmap.singular_point.tolist()} is reached near x = {np.round(nearest, 6).tolist()}"
            )
    evaluator = chart.evaluator
    if isinstance(evaluator, ExactEvaluator):
        inner = evaluator.fn
        source = ExactEvaluator(lambda x, params: cmap.fn(inner(x, params)), evaluator.params_at)
    else:
        source = FiniteDifferenceEvaluator(lambda x: cmap.apply(evaluator.point(x)), evaluator.step,
                                           evaluator.high_step)
    meta = {k: v for k, v in chart.meta.items() if k != "expected_rho"}
    meta["conformal_map"] = cmap.name
    return ImmersionChart(chart.intrinsic_dim, chart.ambient_dim, chart.domain, source,
                          f"{cmap.name}o{chart.label}", meta)
