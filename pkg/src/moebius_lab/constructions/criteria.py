"""Pointwise criteria behind the constant-curvature classification.

- ``warped_constant_curvature_check``: when does g1 + mu^2 g2 have constant curvature c
- ``mean_curvature_condition_check``: the two conditions on h = 1/|H^g| over Q^k_c~
- ``warped_data_from_mean_curvature``: the warped data a family over g produces from h

All metrics and functions are ``jax.numpy`` callables on chart coordinates.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable

import jax
import jax.numpy as jnp
import numpy as np

from moebius_lab.core.errors import SpecInvalid
from moebius_lab.constructions.space_forms import (
    Model,
    SpaceForm,
    half_space_to_hyperboloid,
    stereographic_sphere,
    tangent_frame,
)
from moebius_lab.geometry.curvature import (
    autodiff_riemann,
    orthonormal_frame,
    riemannian_hessian,
    to_frame,
)
from moebius_lab.geometry.fundamental import sectional_curvature

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WarpedData:
    """g1 on a base chart of dimension ``base_dim``, warping function mu, fiber of curvature K2."""

    base_metric: Callable
    mu: Callable
    curvature: float
    fiber_curvature: float
    base_dim: int


@dataclass(frozen=True)
class WarpedResiduals:
    base: float
    hessian: float
    fiber: float

    @property
    def worst(self) -> float:
        return max(self.base, self.hessian, self.fiber)


def _base_residual(metric: Callable, x: np.ndarray, c: float) -> float:
    n = x.size
    if n < 2:
        return 0.0
    g, rm = autodiff_riemann(metric, x)
    eye = np.eye(n)
    values = [sectional_curvature(rm, g, eye[i], eye[j]) for i in range(n) for j in range(i + 1, n)]
    return float(max(abs(v - c) for v in values))


def warped_constant_curvature_check(data: WarpedData, samples: Iterable) -> WarpedResiduals:
    """Largest residual of each of the three conditions over ``samples``.

    (i) K(g1) = c when dim >= 2, (ii) Hess mu + c mu g1 = 0, (iii) K(g2) = |grad mu|^2 + c mu^2.
    The Hessian residual is measured in a g1-orthonormal frame.
    """
    base = hessian = fiber = 0.0
    c = float(data.curvature)
    for sample in samples:
        x = np.asarray(sample, dtype=float).reshape(-1)
        if x.size != data.base_dim:
            raise SpecInvalid(f"Warped sample {x.tolist()} does not have base dimension {data.base_dim}")
        g = np.asarray(data.base_metric(jnp.asarray(x)), dtype=float)
        mu = float(data.mu(jnp.asarray(x)))
        dmu = np.asarray(jax.grad(data.mu)(jnp.asarray(x)), dtype=float)
        hess = riemannian_hessian(data.mu, data.base_metric, x)
        frame = orthonormal_frame(g)
        base = max(base, _base_residual(data.base_metric, x, c))
        hessian = max(hessian, float(np.max(np.abs(to_frame(hess + c * mu * g, frame)))))
        grad_sq = float(dmu @ np.linalg.solve(g, dmu))
        fiber = max(fiber, abs(data.fiber_curvature - (grad_sq + c * mu * mu)))
    return WarpedResiduals(base=base, hessian=hessian, fiber=fiber)


def _fiber_metric(curvature: float) -> Callable:
    if curvature == 0:
        return lambda w: jnp.eye(w.shape[0])
    if curvature > 0:
        k = float(curvature)
        return lambda w: 4.0 * jnp.eye(w.shape[0]) / (k * (1.0 + jnp.sum(w * w)) ** 2)
    k = -float(curvature)
    return lambda w: jnp.eye(w.shape[0]) / (k * w[-1] ** 2)


def warped_product_metric(data: WarpedData, fiber_dim: int) -> Callable:
    """g1 + mu^2 g2 on (base, fiber) coordinates; the fiber uses a model of curvature K2.

    Fiber charts: Euclidean, stereographic, or half-space with the height last.
    """
    k = data.base_dim
    fiber = _fiber_metric(float(data.fiber_curvature))

    def metric(x):
        base, w = x[:k], x[k:]
        g1 = data.base_metric(base)
        g2 = data.mu(base) ** 2 * fiber(w)
        top = jnp.concatenate([g1, jnp.zeros((k, fiber_dim))], axis=1)
        bottom = jnp.concatenate([jnp.zeros((fiber_dim, k)), g2], axis=1)
        return jnp.concatenate([top, bottom], axis=0)

    return metric


@dataclass(frozen=True)
class MeanCurvatureResiduals:
    hessian: float
    gradient: float

    @property
    def worst(self) -> float:
        return max(self.hessian, self.gradient)


def _model_derivatives(space: SpaceForm, h: Callable, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(Hess h, frame derivatives of h, frame) at x in an orthonormal tangent frame."""
    xj = jnp.asarray(x)
    dh = np.asarray(jax.grad(h)(xj), dtype=float)
    frame = tangent_frame(space, x)
    if space.model is Model.HALF_SPACE:
        hess = riemannian_hessian(h, lambda z: jnp.eye(z.shape[0]) / z[-1] ** 2, x)
    else:
        hess = np.asarray(jax.hessian(h)(xj), dtype=float)
        if space.model in (Model.SPHERE, Model.HYPERBOLOID):
            # umbilical inclusion: Hess h = D^2 h - c (dh . x) <,>
            hess = hess - space.curvature * float(dh @ x) * _model_form(space)
    return frame.T @ hess @ frame, frame.T @ dh, frame


def _model_form(space: SpaceForm) -> np.ndarray:
    form = np.eye(space.coordinate_dim)
    if space.lorentzian:
        form[0, 0] = -1.0
    return form


def mean_curvature_condition_check(space: SpaceForm, h: Callable, c: float, p_minus_ell: int,
                                   samples: Iterable) -> MeanCurvatureResiduals:
    """Residuals of Hess h + c~ h <,> = 0 and |grad h|^2 + c~ h^2 = -(p - l)^2 c over ``samples``.

    ``h`` is 1/|H^g| written on the model coordinates of ``space``; samples are model points.
    """
    ct = float(space.curvature)
    target = -float(p_minus_ell) ** 2 * float(c)
    worst_hess = worst_grad = 0.0
    for sample in samples:
        x = space.require(np.asarray(sample, dtype=float).reshape(-1))
        value = float(h(jnp.asarray(x)))
        if not value > 0:
            raise SpecInvalid(f"h must be positive on the samples, got h={value:.6g} at {x.tolist()}")
        hess, derivs, _ = _model_derivatives(space, h, x)
        worst_hess = max(worst_hess, float(np.max(np.abs(hess + ct * value * np.eye(space.dim)))))
        worst_grad = max(worst_grad, abs(float(derivs @ derivs) + ct * value * value - target))
    logger.debug("Mean curvature condition on %s^%d: hessian %.3e, gradient %.3e",
                 space.model.value, space.dim, worst_hess, worst_grad)
    return MeanCurvatureResiduals(hessian=worst_hess, gradient=worst_grad)


def _base_chart(space: SpaceForm) -> tuple[Callable, Callable]:
    """(chart -> model point, coordinate metric of Q) for an intrinsic chart of ``space``."""
    if space.model is Model.EUCLIDEAN:
        return (lambda w: w), (lambda w: jnp.eye(w.shape[0]))
    if space.model is Model.SPHERE:
        return stereographic_sphere, (lambda w: 4.0 * jnp.eye(w.shape[0]) / (1.0 + jnp.sum(w * w)) ** 2)
    half = lambda z: jnp.eye(z.shape[0]) / z[-1] ** 2  # noqa: E731
    if space.model is Model.HYPERBOLOID:
        return half_space_to_hyperboloid, half
    return (lambda z: z), half


def warped_data_from_mean_curvature(space: SpaceForm, h: Callable, c: float, p_minus_ell: int) -> WarpedData:
    """Warped data of the family over g when 1/|H^g| = h on ``space``.

    The base is an intrinsic chart of ``space`` (Euclidean, stereographic or
    half-space coordinates) with g1 = mu^2 g_Q, mu = (p - l)/h, and a fiber of
    curvature -c~.
    """
    to_model, metric = _base_chart(space)
    scale = float(p_minus_ell)

    def mu(w):
        return scale / h(to_model(w))

    def base_metric(w):
        return mu(w) ** 2 * metric(w)

    return WarpedData(base_metric=base_metric, mu=mu, curvature=float(c),
                      fiber_curvature=-float(space.curvature), base_dim=space.dim)
