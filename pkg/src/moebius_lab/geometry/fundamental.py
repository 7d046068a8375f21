"""Classical pointwise package of a submanifold of Euclidean space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from moebius_lab.core.chart import check_rank
from moebius_lab.core.errors import DimensionTooSmall, UmbilicPoint
from moebius_lab.core.jets import Jet

UMBILIC_THRESHOLD = 1e-12


@dataclass(frozen=True)
class FundamentalData:
    """First and second fundamental forms at a point.

    ``tangent_frame`` (m x n) and ``normal_frame`` (m x p) hold orthonormal
    ambient vectors as columns. ``alpha`` and ``shape_ops`` are expressed in
    those frames; ``alpha_coords`` keeps the coordinate-basis components.
    ``frame_coeffs`` (n x n) expresses the tangent frame in the coordinate
    basis: ``tangent_frame = d1 @ frame_coeffs``.
    """

    g: np.ndarray
    tangent_frame: np.ndarray
    normal_frame: np.ndarray
    alpha: np.ndarray
    H: np.ndarray
    shape_ops: np.ndarray
    alpha_coords: np.ndarray
    frame_coeffs: np.ndarray

    @property
    def n(self) -> int:
        return int(self.g.shape[0])

    @property
    def p(self) -> int:
        return int(self.normal_frame.shape[1])

    @property
    def mean_curvature_vector(self) -> np.ndarray:
        return self.normal_frame @ self.H

    @property
    def alpha_norm_sq(self) -> float:
        return float(np.sum(self.alpha ** 2))


def frames(d1: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal tangent frame (Gram-Schmidt in index order), normal complement, coefficients."""
    m, n = d1.shape
    q, r = np.linalg.qr(d1, mode="complete")
    signs = np.sign(np.diag(r[:n, :n]))
    signs[signs == 0] = 1.0
    tangent = q[:, :n] * signs
    normal = q[:, n:]
    coeffs = np.linalg.inv(r[:n, :n] * signs[:, None])
    return tangent, normal, coeffs


def fundamental_data(jet: Jet, n: int | None = None) -> FundamentalData:
    if jet.order < 2:
        raise ValueError(f"fundamental_data needs a jet of order >= 2, got {jet.order}")
    d1, d2 = jet.d1, jet.d2
    if n is not None and d1.shape[1] != n:
        raise ValueError(f"Jet has intrinsic dimension {d1.shape[1]}, expected {n}")
    check_rank(d1)
    tangent, normal, coeffs = frames(d1)
    g = d1.T @ d1
    alpha_coords = np.einsum("ax,aij->xij", normal, d2)
    alpha = np.einsum("xij,ia,jb->xab", alpha_coords, coeffs, coeffs)
    alpha = 0.5 * (alpha + np.swapaxes(alpha, 1, 2))
    H = np.trace(alpha, axis1=1, axis2=2) / d1.shape[1]
    return FundamentalData(
        g=g,
        tangent_frame=tangent,
        normal_frame=normal,
        alpha=alpha,
        H=H,
        shape_ops=alpha.copy(),
        alpha_coords=alpha_coords,
        frame_coeffs=coeffs,
    )


def rho_squared(fd: FundamentalData) -> float:
    """rho^2 = n/(n-1) (|alpha|^2 - n |H|^2)."""
    n = fd.n
    if n < 2:
        raise DimensionTooSmall(f"rho is defined for n >= 2, got n={n}")
    return float(n / (n - 1) * (fd.alpha_norm_sq - n * float(fd.H @ fd.H)))


def is_umbilic(fd: FundamentalData, threshold: float = UMBILIC_THRESHOLD) -> bool:
    return rho_squared(fd) <= threshold


def require_rho(fd: FundamentalData, threshold: float = UMBILIC_THRESHOLD) -> float:
    rho2 = rho_squared(fd)
    if rho2 <= threshold:
        raise UmbilicPoint(f"rho^2 = {rho2:.3e} is at or below the umbilic threshold {threshold:.1e}")
    return float(np.sqrt(rho2))


def gauss_curvature_tensor(fd: FundamentalData, coordinates: bool = False) -> np.ndarray:
    """<R(X_i,X_j)X_k,X_l> from the Gauss equation (flat ambient).

    Frame components by default; coordinate components with ``coordinates=True``.
    """
    a = fd.alpha_coords if coordinates else fd.alpha
    return np.einsum("xil,xjk->ijkl", a, a) - np.einsum("xik,xjl->ijkl", a, a)


def sectional_curvature(riemann: np.ndarray, metric: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
    """K(u, v) = R(u,v,v,u) / (|u|^2 |v|^2 - <u,v>^2) for the metric ``metric``."""
    num = np.einsum("ijkl,i,j,k,l->", riemann, u, v, v, u)
    area = (u @ metric @ u) * (v @ metric @ v) - (u @ metric @ v) ** 2
    return float(num / area)
