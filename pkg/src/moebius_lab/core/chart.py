"""Immersion charts and their jet sources.

A chart owns a parameter box and a jet source. Exact sources wrap a map
``fn(x, params)`` written with ``jax.numpy``; ``params`` is a pytree that lets
one compiled function serve every point (curve-based charts refresh their
local Taylor coefficients through it). Finite-difference sources wrap a plain
point map and expose the Taylor polynomial of their order-4 jet as local map.
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from threading import Lock
from typing import Any, Callable, Mapping

import jax
import jax.numpy as jnp
import numpy as np

from moebius_lab.core.errors import DomainViolation, RankDeficient
from moebius_lab.core.jets import (
    DEFAULT_HIGH_STEP,
    DEFAULT_STEP,
    MAX_ORDER,
    DomainBox,
    Jet,
    as_coords,
    fd_jet_oracle,
)

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-8


@dataclass(frozen=True)
class LocalMap:
    """A jax-traceable map valid near one point: ``fn(y, params) -> R^m``."""

    fn: Callable[[Any, Any], Any]
    params: Any = ()

    def __call__(self, y):
        return self.fn(y, self.params)


def _derivative_stack(fn: Callable, order: int) -> Callable:
    stack = [fn]
    for _ in range(order):
        stack.append(jax.jacfwd(stack[-1]))

    def evaluate(x, params):
        return tuple(f(x, params) for f in stack)

    return jax.jit(evaluate)


class JetSource(ABC):
    """Where a chart gets its derivatives from."""

    stencil_radius: float = 0.0
    exact: bool = False

    @abstractmethod
    def point(self, x: np.ndarray) -> np.ndarray:
        """Value of the immersion at x."""

    @abstractmethod
    def jet(self, x: np.ndarray, order: int) -> Jet:
        """Jet of the immersion at x up to ``order``."""

    @abstractmethod
    def local_map(self, x: np.ndarray) -> LocalMap:
        """Traceable map whose derivatives at x through order 4 are the chart's."""


class ExactEvaluator(JetSource):
    """Jets by forward-mode autodiff of a ``jax.numpy`` map."""

    exact = True

    def __init__(self, fn: Callable[[Any, Any], Any], params_at: Callable[[np.ndarray], Any] | None = None):
        self.fn = fn
        self.params_at = params_at
        self._compiled: dict[int, Callable] = {}
        self._lock = Lock()

    def params(self, x: np.ndarray) -> Any:
        return () if self.params_at is None else self.params_at(x)

    def _stack(self, order: int) -> Callable:
        with self._lock:
            if order not in self._compiled:
                self._compiled[order] = _derivative_stack(self.fn, order)
            return self._compiled[order]

    @cached_property
    def _value(self) -> Callable:
        return jax.jit(self.fn)

    def point(self, x):
        x = as_coords(x)
        return np.asarray(self._value(jnp.asarray(x), self.params(x)), dtype=float)

    def jet(self, x, order):
        x = as_coords(x)
        parts = self._stack(order)(jnp.asarray(x), self.params(x))
        parts = [np.asarray(p, dtype=float) for p in parts]
        return Jet(order=order, value=parts[0], derivatives=tuple(parts[1:]))

    def local_map(self, x):
        x = as_coords(x)
        return LocalMap(self.fn, self.params(x))


def taylor_map(y, params):
    """Evaluate the degree-4 Taylor polynomial packed in ``params``."""
    center, value, *derivs = params
    dy = y - center
    out = value
    for k, tensor in enumerate(derivs, start=1):
        term = tensor
        for _ in range(k):
            term = term @ dy
        out = out + term / math.factorial(k)
    return out


class FiniteDifferenceEvaluator(JetSource):
    """Jets of an opaque point map by the Richardson finite-difference oracle."""

    def __init__(self, point_map: Callable[[np.ndarray], np.ndarray], step: float = DEFAULT_STEP,
                 high_step: float = DEFAULT_HIGH_STEP):
        self.point_map = point_map
        self.step = step
        self.high_step = high_step
        self.stencil_radius = 4.0 * max(step, high_step)

    def point(self, x):
        return np.asarray(self.point_map(as_coords(x)), dtype=float).reshape(-1)

    def jet(self, x, order):
        return fd_jet_oracle(self.point_map, x, order, step=self.step, high_step=self.high_step)

    def local_map(self, x):
        x = as_coords(x)
        jet = self.jet(x, MAX_ORDER)
        params = (jnp.asarray(x), jnp.asarray(jet.value)) + tuple(jnp.asarray(d) for d in jet.derivatives)
        return LocalMap(taylor_map, params)


@dataclass(frozen=True)
class ImmersionChart:
    """Parametrized immersion f: U subset R^n -> R^m."""

    intrinsic_dim: int
    ambient_dim: int
    domain: DomainBox
    evaluator: JetSource
    label: str = "chart"
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.domain.dim != self.intrinsic_dim:
            raise ValueError(
                f"Chart '{self.label}' has intrinsic dimension {self.intrinsic_dim} "
                f"but a {self.domain.dim}-dimensional domain"
            )
        if self.ambient_dim <= self.intrinsic_dim:
            raise ValueError(
                f"Chart '{self.label}' needs ambient dimension > {self.intrinsic_dim}, got {self.ambient_dim}"
            )

    @property
    def codim(self) -> int:
        return self.ambient_dim - self.intrinsic_dim

    def require(self, x) -> np.ndarray:
        return self.domain.require(as_coords(x), margin=self.evaluator.stencil_radius)

    def point(self, x) -> np.ndarray:
        return self.evaluator.point(self.require(x))

    def local_map(self, x) -> LocalMap:
        return self.evaluator.local_map(self.require(x))


def check_rank(d1: np.ndarray, label: str = "chart") -> None:
    singular = np.linalg.svd(d1, compute_uv=False)
    if singular.size == 0 or singular[-1] <= RANK_TOLERANCE * max(singular[0], 1.0):
        raise RankDeficient(
            f"Differential of '{label}' is not injective.\n"
            f"Singular values: {np.array2string(singular, precision=3)}"
        )


def evaluate_jet(chart: ImmersionChart, x, order: int) -> Jet:
    """Jet of ``chart`` at ``x`` through ``order`` (1..4)."""
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"evaluate_jet order must lie in 1..{MAX_ORDER}, got {order}")
    coords = chart.require(x)
    jet = chart.evaluator.jet(coords, order)
    if not np.all(np.isfinite(jet.value)) or not all(np.all(np.isfinite(d)) for d in jet.derivatives):
        raise DomainViolation(f"Chart '{chart.label}' produced non-finite jets at {coords.tolist()}")
    check_rank(jet.d1, chart.label)
    return jet


def exact_chart(fn: Callable, domain: DomainBox | list, ambient_dim: int, label: str,
                params_at: Callable | None = None, meta: Mapping[str, Any] | None = None) -> ImmersionChart:
    """Convenience constructor for a jax-traceable chart."""
    box = domain if isinstance(domain, DomainBox) else DomainBox.from_bounds(domain)
    return ImmersionChart(box.dim, ambient_dim, box, ExactEvaluator(fn, params_at), label, dict(meta or {}))


def fd_chart(point_map: Callable, domain: DomainBox | list, ambient_dim: int, label: str,
             meta: Mapping[str, Any] | None = None, **steps) -> ImmersionChart:
    box = domain if isinstance(domain, DomainBox) else DomainBox.from_bounds(domain)
    return ImmersionChart(box.dim, ambient_dim, box, FiniteDifferenceEvaluator(point_map, **steps), label,
                          dict(meta or {}))
