"""Curves with prescribed first curvature in the two-dimensional space forms.

The Frenet system for (gamma, T, N) reads

    gamma' = T,   T' = kappa N - c gamma,   N' = -kappa T

with c the curvature of the ambient model (0 for the plane, 1 for the unit
sphere, -1 for the hyperboloid in Lorentz space). It is integrated with an
8th-order embedded Runge-Kutta scheme between knots, and the state is
projected back onto the model constraints at each knot.

Curves reach exact charts through ``local_params``/``local_fn``: the Taylor
polynomial of degree ``TAYLOR_DEGREE`` at a parameter, whose coefficients are
the derivatives of gamma from the Frenet recursion at the integrated state.
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import jax
import jax.numpy as jnp
import numpy as np
from scipy.integrate import solve_ivp

from moebius_lab.core.errors import DomainViolation, IntegrationFailure, SpecInvalid
from moebius_lab.constructions.space_forms import Model, SpaceForm

logger = logging.getLogger(__name__)

TAYLOR_DEGREE = 5


def canonical_frame(space: SpaceForm) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Position, tangent and normal used when a curve spec gives no initial frame."""
    k = space.coordinate_dim
    eye = np.eye(k)
    if space.model is Model.EUCLIDEAN:
        return np.zeros(k), eye[0], eye[1]
    if space.model is Model.SPHERE:
        return eye[k - 1], eye[0], eye[1]
    if space.model is Model.HYPERBOLOID:
        return eye[0], eye[1], eye[2]
    raise SpecInvalid(f"Curves are integrated in euclidean, sphere or hyperboloid models, not {space.model.value}")


@dataclass(frozen=True, eq=False)
class CurveSpec:
    """Prescribed-curvature curve: kappa(s) is a ``jax.numpy`` scalar function of arclength."""

    ambient: SpaceForm
    kappa: Callable
    domain: tuple[float, float]
    initial_frame: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None
    s_ref: float | None = None
    label: str = "curve"

    def __post_init__(self):
        a, b = (float(v) for v in self.domain)
        if not a < b:
            raise SpecInvalid(f"Curve domain must satisfy a < b, got {self.domain}")
        object.__setattr__(self, "domain", (a, b))
        if self.ambient.model is Model.HALF_SPACE:
            raise SpecInvalid("Integrate curves in the hyperboloid model and convert to the half-space afterwards")
        s_ref = 0.5 * (a + b) if self.s_ref is None else float(self.s_ref)
        if not a <= s_ref <= b:
            raise SpecInvalid(f"Reference parameter {s_ref} lies outside the curve domain {self.domain}")
        object.__setattr__(self, "s_ref", s_ref)
        frame = self.initial_frame or canonical_frame(self.ambient)
        frame = tuple(np.asarray(v, dtype=float) for v in frame)
        self._validate_frame(frame)
        object.__setattr__(self, "initial_frame", frame)

    @property
    def ambient_curvature(self) -> int:
        return self.ambient.curvature

    def _validate_frame(self, frame) -> None:
        position, tangent, normal = frame
        space = self.ambient
        checks = {
            "position on the model": space.constraint_defect(position),
            "|T| = 1": abs(space.inner(tangent, tangent) - 1.0),
            "|N| = 1": abs(space.inner(normal, normal) - 1.0),
            "<T, N> = 0": abs(space.inner(tangent, normal)),
        }
        if space.model is not Model.EUCLIDEAN:
            checks["<gamma, T> = 0"] = abs(space.inner(position, tangent))
            checks["<gamma, N> = 0"] = abs(space.inner(position, normal))
        bad = {name: value for name, value in checks.items() if not value <= 1e-9}
        if bad:
            details = "\n".join(f"  {name}: defect {value:.3e}" for name, value in bad.items())
            raise SpecInvalid(f"Initial frame of curve '{self.label}' is not admissible:\n{details}")


class Curve(ABC):
    """Common interface of analytic and integrated curves."""

    space: SpaceForm
    domain: tuple[float, float]
    label: str

    def require(self, s: float) -> float:
        a, b = self.domain
        s = float(s)
        if not a <= s <= b:
            raise DomainViolation(f"Curve '{self.label}' is defined on [{a}, {b}], queried at s={s}")
        return s

    @abstractmethod
    def local_params(self, s: float):
        """Parameters ``local_fn`` needs near s."""

    @staticmethod
    @abstractmethod
    def local_fn(s, params):
        """``jax.numpy`` curve near the point the params were taken at."""

    @abstractmethod
    def derivatives(self, s: float, order: int = TAYLOR_DEGREE) -> np.ndarray:
        """Rows gamma, gamma', ..., gamma^(order) at s."""

    def position(self, s: float) -> np.ndarray:
        return self.derivatives(s, 0)[0]

    @abstractmethod
    def kappa(self, s: float) -> float:
        ...


def taylor_curve(s, params):
    """Degree-5 Taylor polynomial packed as (s0, coefficient rows)."""
    s0, coeffs = params
    ds = s - s0
    out = coeffs[0]
    power = 1.0
    for j in range(1, coeffs.shape[0]):
        power = power * ds / j
        out = out + coeffs[j] * power
    return out


class AnalyticCurve(Curve):
    """Closed-form ``jax.numpy`` curve ``fn(s)``."""

    def __init__(self, space: SpaceForm, fn: Callable, kappa: Callable, domain: tuple[float, float], label: str):
        self.space = space
        self.fn = fn
        self._kappa = kappa
        self.domain = (float(domain[0]), float(domain[1]))
        self.label = label
        stack = [fn]
        for _ in range(TAYLOR_DEGREE):
            stack.append(jax.jacfwd(stack[-1]))
        self._stack = jax.jit(lambda s: tuple(f(s) for f in stack))

    def local_params(self, s):
        return ()

    def local_fn(self, s, params):
        return self.fn(s)

    def derivatives(self, s, order=TAYLOR_DEGREE):
        s = self.require(s)
        parts = self._stack(jnp.asarray(s, dtype=jnp.float64))
        return np.stack([np.asarray(p, dtype=float) for p in parts[: order + 1]])

    def kappa(self, s):
        return float(self._kappa(self.require(s)))


def constant_curvature_curve(space: SpaceForm, kappa: float, domain: tuple[float, float],
                             s_ref: float | None = None, label: str = "circle") -> AnalyticCurve:
    """Closed-form constant-curvature curve through the canonical frame at ``s_ref``.

    Plane: circle of radius 1/kappa (or a line). Sphere: the small circle of
    geodesic curvature kappa through the north pole.
    """
    kappa = float(kappa)
    s_ref = 0.5 * (domain[0] + domain[1]) if s_ref is None else float(s_ref)
    k = space.coordinate_dim
    if space.model is Model.EUCLIDEAN and k == 2:
        if kappa == 0.0:
            def fn(s):
                return jnp.stack([s - s_ref, 0.0 * s])
        else:
            r = 1.0 / kappa

            def fn(s):
                t = (s - s_ref) / r
                return jnp.stack([r * jnp.sin(t), r * (1.0 - jnp.cos(t))])
    elif space.model is Model.SPHERE and k == 3:
        theta = 0.5 * np.pi - np.arctan(kappa)
        sin0, cos0 = np.sin(theta), np.cos(theta)
        center = np.array([0.0, sin0, cos0])
        u = (np.array([0.0, 0.0, 1.0]) - cos0 * center) / sin0
        v = np.array([1.0, 0.0, 0.0])

        def fn(s):
            t = (s - s_ref) / sin0
            return cos0 * center + sin0 * (jnp.cos(t) * u + jnp.sin(t) * v)
    else:
        raise SpecInvalid(f"No closed form for constant curvature curves in {space.model.value}^{space.dim}")
    return AnalyticCurve(space, fn, lambda s: kappa, domain, label)


def _kappa_derivatives(kappa: Callable, order: int) -> Callable:
    stack = [kappa]
    for _ in range(order):
        stack.append(jax.grad(stack[-1]))
    return jax.jit(lambda s: jnp.stack([f(s) for f in stack]))


class FrenetCurve(Curve):
    """Numerically integrated prescribed-curvature curve with cached dense output."""

    def __init__(self, spec: CurveSpec, rtol: float = 1e-12, atol: float = 1e-14, knot_spacing: float = 0.25):
        self.spec = spec
        self.space = spec.ambient
        self.domain = spec.domain
        self.label = spec.label
        self.rtol = rtol
        self.atol = atol
        self._c = float(spec.ambient_curvature)
        self._k = spec.ambient.coordinate_dim
        self._kappa_value = jax.jit(spec.kappa)
        self._kappa_jets = _kappa_derivatives(spec.kappa, TAYLOR_DEGREE - 1)
        self._segments: list[tuple[float, float, object]] = []
        start = np.concatenate(spec.initial_frame)
        a, b = spec.domain
        self._integrate(start, spec.s_ref, b, knot_spacing)
        self._integrate(start, spec.s_ref, a, knot_spacing)
        logger.debug("Integrated curve '%s' on %s in %d segments", self.label, self.domain, len(self._segments))

    def _inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return self.space.inner(u, v)

    def project(self, state: np.ndarray) -> np.ndarray:
        gamma, tangent, normal = state.reshape(3, self._k)
        if self.space.model is Model.SPHERE:
            gamma = gamma / np.sqrt(gamma @ gamma)
        elif self.space.model is Model.HYPERBOLOID:
            gamma = gamma / np.sqrt(-self._inner(gamma, gamma))
        frame = []
        for v in (tangent, normal):
            if self.space.model is not Model.EUCLIDEAN:
                v = v - self._inner(v, gamma) / self._inner(gamma, gamma) * gamma
            for w in frame:
                v = v - self._inner(v, w) * w
            frame.append(v / np.sqrt(self._inner(v, v)))
        return np.concatenate([gamma] + frame)

    def _rhs(self, s: float, y: np.ndarray) -> np.ndarray:
        gamma, tangent, normal = y.reshape(3, self._k)
        kappa = float(self._kappa_value(s))
        return np.concatenate([tangent, kappa * normal - self._c * gamma, -kappa * tangent])

    def _integrate(self, start: np.ndarray, s0: float, s1: float, spacing: float) -> None:
        if s1 == s0:
            return
        count = max(1, int(math.ceil(abs(s1 - s0) / spacing)))
        knots = np.linspace(s0, s1, count + 1)
        state = self.project(start)
        for lo, hi in zip(knots[:-1], knots[1:]):
            result = solve_ivp(self._rhs, (lo, hi), state, method="DOP853", rtol=self.rtol, atol=self.atol,
                               dense_output=True)
            if not result.success:
                raise IntegrationFailure(
                    f"Frenet integration of '{self.label}' failed on [{lo:.6g}, {hi:.6g}]: {result.message}"
                )
            self._segments.append((min(lo, hi), max(lo, hi), result.sol))
            state = self.project(result.y[:, -1])

    def state(self, s: float) -> np.ndarray:
        """Projected (gamma, T, N) rows at s."""
        s = self.require(s)
        for lo, hi, sol in self._segments:
            if lo <= s <= hi:
                return self.project(sol(s)).reshape(3, self._k)
        raise DomainViolation(f"No integrated segment of '{self.label}' covers s={s}")

    def kappa(self, s):
        return float(self._kappa_value(self.require(s)))

    def derivatives(self, s, order=TAYLOR_DEGREE):
        s = self.require(s)
        Y = [self.state(s)]
        if order == 0:
            return Y[0][:1]
        kd = np.asarray(self._kappa_jets(jnp.asarray(s, dtype=jnp.float64)), dtype=float)

        def mixing(i: int) -> np.ndarray:
            A = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, kd[i]], [0.0, -kd[i], 0.0]])
            if i == 0:
                A[0, 1] = 1.0
                A[1, 0] = -self._c
            return A

        for j in range(order):
            Y.append(sum(math.comb(j, i) * mixing(i) @ Y[j - i] for i in range(j + 1)))
        return np.stack([y[0] for y in Y])

    def local_params(self, s):
        return (jnp.asarray(float(s)), jnp.asarray(self.derivatives(s, TAYLOR_DEGREE)))

    @staticmethod
    def local_fn(s, params):
        return taylor_curve(s, params)


@lru_cache(maxsize=64)
def integrate_curve(spec: CurveSpec, rtol: float = 1e-12, atol: float = 1e-14, knot_spacing: float = 0.25) -> FrenetCurve:
    return FrenetCurve(spec, rtol, atol, knot_spacing)


@dataclass(frozen=True)
class CurvePoint:
    position: np.ndarray
    derivatives: np.ndarray = field(repr=False)
    tangent: np.ndarray = field(repr=False)
    normal: np.ndarray = field(repr=False)


def frenet_curve(spec: CurveSpec, s: float) -> CurvePoint:
    """Position, derivatives (rows up to order 5) and Frenet frame of the curve at s."""
    curve = integrate_curve(spec)
    derivs = curve.derivatives(s)
    _, tangent, normal = curve.state(s)
    return CurvePoint(position=derivs[0], derivatives=derivs, tangent=tangent, normal=normal)
