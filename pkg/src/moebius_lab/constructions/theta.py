"""Conformal diffeomorphisms onto open subsets of Euclidean space.

``theta_cone``: S^k x H^l -> R^(k+l), (y, z) -> (z1 y, z2, ..., zl), conformal factor z1.
``theta_rotational``: H^k x S^l -> R^(k+l), (z, y) -> (z1, ..., z(k-1), zk y), factor zk.

Half-space points carry the height on the first axis for the cone map and on
the last axis for the rotational map, matching the formulas above.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import jax
import jax.numpy as jnp
import numpy as np

from moebius_lab.core.errors import DomainViolation
from moebius_lab.core.jets import Jet

SPHERE_TOL = 1e-9


def cone_map(y, z):
    return jnp.concatenate([z[0] * y, z[1:]])


def rotational_map(z, y):
    return jnp.concatenate([z[:-1], z[-1] * y])


def _check(y: np.ndarray, height: float, name: str) -> None:
    if not height > 0:
        raise DomainViolation(f"{name}: half-space height must be > 0, got {height}")
    if abs(float(y @ y) - 1.0) > SPHERE_TOL:
        raise DomainViolation(f"{name}: sphere point must have unit norm, got |y| = {np.linalg.norm(y):.12g}")


@dataclass(frozen=True)
class ThetaMap:
    """One of the two conformal maps with its domain checks and exact jets.

    Jets are taken with respect to the concatenated ambient coordinates
    ``(first, second)`` of the two factors.
    """

    name: str
    fn: Callable
    sphere_first: bool

    def _split(self, first, second):
        first = np.asarray(first, dtype=float)
        second = np.asarray(second, dtype=float)
        y, z = (first, second) if self.sphere_first else (second, first)
        height = z[0] if self.sphere_first else z[-1]
        _check(y, height, self.name)
        return first, second, float(height)

    def __call__(self, first, second) -> np.ndarray:
        first, second, _ = self._split(first, second)
        return np.asarray(self.fn(jnp.asarray(first), jnp.asarray(second)), dtype=float)

    def conformal_factor(self, first, second) -> float:
        return self._split(first, second)[2]

    def jet(self, first, second, order: int = 2) -> Jet:
        first, second, _ = self._split(first, second)
        k = first.size

        def joined(w):
            return self.fn(w[:k], w[k:])

        w = jnp.asarray(np.concatenate([first, second]))
        stack = [joined]
        for _ in range(order):
            stack.append(jax.jacfwd(stack[-1]))
        parts = [np.asarray(f(w), dtype=float) for f in stack]
        return Jet(order=order, value=parts[0], derivatives=tuple(parts[1:]))


theta_cone = ThetaMap("theta_cone", cone_map, sphere_first=True)
theta_rotational = ThetaMap("theta_rotational", rotational_map, sphere_first=False)
