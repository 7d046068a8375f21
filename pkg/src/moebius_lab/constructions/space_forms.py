"""Models of the space forms Q^k_c and conversions between them.

Functions that build chart maps are written with ``jax.numpy`` so that they can
sit inside exact charts; they accept numpy arrays as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import jax.numpy as jnp
import numpy as np

from moebius_lab.core.errors import DomainViolation, SpecInvalid

CONSTRAINT_TOL = 1e-9


class Model(Enum):
    """Coordinate models of the space forms."""

    EUCLIDEAN = "euclidean"
    SPHERE = "sphere"
    HALF_SPACE = "half_space"
    HYPERBOLOID = "hyperboloid"

    @classmethod
    def parse(cls, value: "str | Model") -> "Model":
        if isinstance(value, Model):
            return value
        try:
            return cls(value.lower())
        except ValueError:
            allowed = ", ".join(m.value for m in cls)
            raise SpecInvalid(f"Unknown space form model '{value}'. Allowed: {allowed}")


_CURVATURE = {
    Model.EUCLIDEAN: 0,
    Model.SPHERE: 1,
    Model.HALF_SPACE: -1,
    Model.HYPERBOLOID: -1,
}


@dataclass(frozen=True)
class SpaceForm:
    """Q^dim_curvature in a fixed model.

    Sphere and hyperboloid points live in R^(dim+1) and L^(dim+1); Euclidean and
    half-space points in R^dim, with the half-space height on the last axis.
    """

    curvature: int
    dim: int
    model: Model

    def __post_init__(self):
        model = Model.parse(self.model)
        object.__setattr__(self, "model", model)
        if self.dim < 1:
            raise SpecInvalid(f"Space form dimension must be >= 1, got {self.dim}")
        if _CURVATURE[model] != self.curvature:
            raise SpecInvalid(
                f"Model {model.value} has curvature {_CURVATURE[model]}, "
                f"inconsistent with requested curvature {self.curvature}"
            )

    @classmethod
    def euclidean(cls, dim: int) -> "SpaceForm":
        return cls(0, dim, Model.EUCLIDEAN)

    @classmethod
    def sphere(cls, dim: int) -> "SpaceForm":
        return cls(1, dim, Model.SPHERE)

    @classmethod
    def hyperboloid(cls, dim: int) -> "SpaceForm":
        return cls(-1, dim, Model.HYPERBOLOID)

    @classmethod
    def half_space(cls, dim: int) -> "SpaceForm":
        return cls(-1, dim, Model.HALF_SPACE)

    @property
    def coordinate_dim(self) -> int:
        return self.dim + 1 if self.model in (Model.SPHERE, Model.HYPERBOLOID) else self.dim

    @property
    def lorentzian(self) -> bool:
        return self.model is Model.HYPERBOLOID

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        """Inner product of the ambient coordinate space (Lorentz for the hyperboloid)."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.lorentzian:
            return float(-u[0] * v[0] + u[1:] @ v[1:])
        return float(u @ v)

    def constraint_defect(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        if self.model is Model.SPHERE:
            return abs(float(x @ x) - 1.0)
        if self.model is Model.HYPERBOLOID:
            return abs(self.inner(x, x) + 1.0) + (0.0 if x[0] > 0 else np.inf)
        if self.model is Model.HALF_SPACE:
            return 0.0 if x[-1] > 0 else np.inf
        return 0.0

    def contains(self, x: np.ndarray, tol: float = CONSTRAINT_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return x.size == self.coordinate_dim and self.constraint_defect(x) <= tol

    def require(self, x: np.ndarray, tol: float = CONSTRAINT_TOL) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.contains(x, tol):
            raise DomainViolation(
                f"Point {x.tolist()} is not on {self.model.value} model of dimension {self.dim} "
                f"(constraint defect {self.constraint_defect(x) if x.size == self.coordinate_dim else 'n/a'})"
            )
        return x

    def metric(self, x: np.ndarray) -> np.ndarray:
        """Coordinate metric for the Euclidean and half-space models."""
        if self.model is Model.EUCLIDEAN:
            return np.eye(self.dim)
        if self.model is Model.HALF_SPACE:
            return np.eye(self.dim) / float(np.asarray(x)[-1]) ** 2
        raise SpecInvalid(f"Model {self.model.value} is extrinsic; use tangent_frame instead")


def tangent_frame(space: SpaceForm, x: np.ndarray) -> np.ndarray:
    """Columns: an orthonormal basis of T_x Q in ambient coordinates (model metric)."""
    x = space.require(x)
    if space.model is Model.EUCLIDEAN:
        return np.eye(space.dim)
    if space.model is Model.HALF_SPACE:
        return np.eye(space.dim) * float(x[-1])
    k = space.coordinate_dim
    if space.model is Model.SPHERE:
        q, _ = np.linalg.qr(np.column_stack([x, np.eye(k)]))
        basis = q[:, 1:k]
        return basis
    # Hyperboloid: Lorentz-orthogonal complement of x, Gram-Schmidt in the Lorentz product.
    basis = []
    for e in np.eye(k):
        v = e + space.inner(e, x) * x
        for b in basis:
            v = v - space.inner(v, b) * b
        size = space.inner(v, v)
        if size > 1e-10:
            basis.append(v / np.sqrt(size))
        if len(basis) == space.dim:
            break
    return np.column_stack(basis)


def stereographic_sphere(w):
    """Inverse stereographic projection R^k -> S^k subset R^(k+1): (2w, |w|^2 - 1)/(|w|^2 + 1)."""
    sq = jnp.sum(w * w)
    return jnp.concatenate([2.0 * w, jnp.atleast_1d(sq - 1.0)]) / (sq + 1.0)


def hyperboloid_to_half_space(x, height_axis: int = -1):
    """(x0, x1, x2..xk) -> (x2/d, ..., xk/d, 1/d) with d = x0 - x1; height placed at ``height_axis``."""
    d = x[0] - x[1]
    rest = x[2:] / d
    height = jnp.atleast_1d(1.0 / d)
    if height_axis in (-1, x.shape[0] - 2):
        return jnp.concatenate([rest, height])
    return jnp.concatenate([rest[:height_axis], height, rest[height_axis:]])


def half_space_to_hyperboloid(z, height_axis: int = -1):
    """Inverse of ``hyperboloid_to_half_space``."""
    t = z[height_axis]
    others = jnp.delete(z, height_axis if height_axis >= 0 else z.shape[0] + height_axis)
    d = 1.0 / t
    xr = others * d
    total = (1.0 + jnp.sum(xr * xr)) / d
    x0 = 0.5 * (d + total)
    x1 = 0.5 * (total - d)
    return jnp.concatenate([jnp.stack([x0, x1]), xr])


def hyperboloid_to_ball(x):
    return x[1:] / (1.0 + x[0])


def ball_to_hyperboloid(b):
    sq = jnp.sum(b * b)
    return jnp.concatenate([jnp.atleast_1d(1.0 + sq), 2.0 * b]) / (1.0 - sq)
