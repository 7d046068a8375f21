"""Light-cone model of Moebius geometry in Minkowski space L^(m+2)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MinkowskiVector:
    """Vector of L^(m+2) with inner product -v0 w0 + sum_i vi wi."""

    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=float).reshape(-1))

    def inner(self, other: "MinkowskiVector") -> float:
        return minkowski_inner(self.coords, other.coords)

    @property
    def norm_sq(self) -> float:
        return self.inner(self)


def minkowski_inner(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Lorentz inner product along the last axis."""
    return -v[..., 0] * w[..., 0] + np.sum(v[..., 1:] * w[..., 1:], axis=-1)


@dataclass(frozen=True)
class LightConeModel:
    """Data (p0, w, C) of the isometric embedding Psi(x) = p0 + C x - |x|^2 w / 2.

    p0 and w are null with <p0, w> = 1 and C sends R^m isometrically onto the
    orthogonal complement of span{p0, w}.
    """

    p0: MinkowskiVector
    w: MinkowskiVector
    C: np.ndarray

    @classmethod
    def canonical(cls, m: int) -> "LightConeModel":
        p0 = np.zeros(m + 2)
        p0[:2] = (-0.5, 0.5)
        w = np.zeros(m + 2)
        w[:2] = (1.0, 1.0)
        C = np.zeros((m + 2, m))
        C[2:, :] = np.eye(m)
        return cls(MinkowskiVector(p0), MinkowskiVector(w), C)

    def psi(self, y: np.ndarray) -> np.ndarray:
        return self.p0.coords + self.C @ y - 0.5 * float(y @ y) * self.w.coords

    def dpsi(self, y: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Differential of Psi at y applied to the columns of v."""
        return self.C @ v - np.outer(self.w.coords, y @ v)


def moebius_lift_differential(model: LightConeModel, value: np.ndarray, J: np.ndarray, rho: float,
                              drho: np.ndarray) -> np.ndarray:
    """Columns dF(d_i) of the lift F = rho Psi(f)."""
    return np.outer(model.psi(value), drho) + rho * model.dpsi(value, J)


def lift_gram(dF: np.ndarray) -> np.ndarray:
    """Lorentz Gram matrix <dF(d_i), dF(d_j)>."""
    eta = np.ones(dF.shape[0])
    eta[0] = -1.0
    return dF.T @ (eta[:, None] * dF)
