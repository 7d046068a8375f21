"""Riemannian curvature from metrics: finite differences, autodiff, conformal change.

Index conventions used across the package:

- ``dg[k, i, j] = d_k g_ij`` and ``ddg[k, l, i, j] = d_k d_l g_ij``
- ``Gamma[k, i, j] = Gamma^k_ij``
- ``Rm[i, j, k, l] = <R(d_i, d_j) d_k, d_l>`` so that ``K(X, Y) = Rm(X, Y, Y, X) / |X ^ Y|^2``
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import jax
import jax.numpy as jnp
import numpy as np

from moebius_lab.geometry.fundamental import sectional_curvature


def christoffel(g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    ginv = np.linalg.inv(g)
    lowered = 0.5 * (np.einsum("jil->lij", dg) + np.einsum("ijl->lij", dg) - dg)
    return np.einsum("kl,lij->kij", ginv, lowered)


def riemann_from_metric(g: np.ndarray, dg: np.ndarray, ddg: np.ndarray) -> np.ndarray:
    """Lowered Riemann tensor from the metric and its first two partials."""
    ginv = np.linalg.inv(g)
    lowered = 0.5 * (np.einsum("jil->lij", dg) + np.einsum("ijl->lij", dg) - dg)
    gamma = np.einsum("kl,lij->kij", ginv, lowered)
    # d_k Gamma_{m i j} (lowered first index)
    dlowered = 0.5 * (np.einsum("kijm->kmij", ddg) + np.einsum("kjim->kmij", ddg) - ddg)
    dginv = -np.einsum("la,kab,bm->klm", ginv, dg, ginv)
    dgamma = np.einsum("klm,mij->klij", dginv, lowered) + np.einsum("lm,kmij->klij", ginv, dlowered)
    # R^l_{ijk} = d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik
    r_up = (
        np.einsum("iljk->lijk", dgamma)
        - np.einsum("jlik->lijk", dgamma)
        + np.einsum("lim,mjk->lijk", gamma, gamma)
        - np.einsum("ljm,mik->lijk", gamma, gamma)
    )
    return np.einsum("lm,mijk->ijkl", g, r_up)


def _richardson(fine: np.ndarray, coarse: np.ndarray) -> np.ndarray:
    return (4.0 * fine - coarse) / 3.0


def fd_metric_derivatives(metric: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                          step: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Metric and its first and second partials by Richardson central differences."""
    x = np.asarray(x, dtype=float)
    n = x.size
    cache: dict[tuple, np.ndarray] = {}

    def at(offset: tuple[int, ...], h: float) -> np.ndarray:
        key = (h, offset)
        if key not in cache:
            cache[key] = np.asarray(metric(x + h * np.asarray(offset, dtype=float)), dtype=float)
        return cache[key]

    def unit(*pairs) -> tuple[int, ...]:
        offset = [0] * n
        for axis, amount in pairs:
            offset[axis] += amount
        return tuple(offset)

    def first(k: int, h: float) -> np.ndarray:
        return (at(unit((k, 1)), h) - at(unit((k, -1)), h)) / (2 * h)

    def second(k: int, l: int, h: float) -> np.ndarray:
        if k == l:
            return (at(unit((k, 1)), h) - 2 * at(unit(), h) + at(unit((k, -1)), h)) / h ** 2
        return (
            at(unit((k, 1), (l, 1)), h)
            - at(unit((k, 1), (l, -1)), h)
            - at(unit((k, -1), (l, 1)), h)
            + at(unit((k, -1), (l, -1)), h)
        ) / (4 * h ** 2)

    g = at(unit(), step)
    dg = np.stack([_richardson(first(k, step), first(k, 2 * step)) for k in range(n)])
    ddg = np.zeros((n, n) + g.shape)
    for k in range(n):
        for l in range(k, n):
            ddg[k, l] = ddg[l, k] = _richardson(second(k, l, step), second(k, l, 2 * step))
    return g, dg, ddg


def fd_riemann(metric: Callable[[np.ndarray], np.ndarray], x: np.ndarray, step: float = 5e-3):
    """(g, Rm) at x from a sampled metric; accuracy O(step^4) plus roundoff."""
    g, dg, ddg = fd_metric_derivatives(metric, x, step)
    return g, riemann_from_metric(g, dg, ddg)


def autodiff_riemann(metric: Callable, x) -> tuple[np.ndarray, np.ndarray]:
    """(g, Rm) at x for a ``jax.numpy`` metric function, with exact derivatives."""
    x = jnp.asarray(x, dtype=jnp.float64)
    g = metric(x)
    dg = jax.jacfwd(metric)(x)
    ddg = jax.jacfwd(jax.jacfwd(metric))(x)
    g = np.asarray(g, dtype=float)
    dg = np.moveaxis(np.asarray(dg, dtype=float), -1, 0)
    ddg = np.moveaxis(np.moveaxis(np.asarray(ddg, dtype=float), -1, 0), -1, 0)
    return g, riemann_from_metric(g, dg, ddg)


def riemannian_hessian(fn: Callable, metric: Callable, x) -> np.ndarray:
    """Hess fn at x for scalar ``fn`` and metric ``metric`` (both jax-traceable)."""
    x = jnp.asarray(x, dtype=jnp.float64)
    g = np.asarray(metric(x), dtype=float)
    dg = np.moveaxis(np.asarray(jax.jacfwd(metric)(x), dtype=float), -1, 0)
    grad = np.asarray(jax.grad(fn)(x), dtype=float)
    hess = np.asarray(jax.hessian(fn)(x), dtype=float)
    return hess - np.einsum("kij,k->ij", christoffel(g, dg), grad)


def ricci(riemann: np.ndarray, metric: np.ndarray) -> np.ndarray:
    """Ric_jk = g^il Rm_ijkl."""
    return np.einsum("il,ijkl->jk", np.linalg.inv(metric), riemann)


def normalized_scalar(riemann: np.ndarray, metric: np.ndarray) -> float:
    n = metric.shape[0]
    return float(np.einsum("jk,jk->", np.linalg.inv(metric), ricci(riemann, metric)) / (n * (n - 1)))


def kulkarni_nomizu(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a o b)_ijkl = a_il b_jk + a_jk b_il - a_ik b_jl - a_jl b_ik."""
    return (
        np.einsum("il,jk->ijkl", a, b)
        + np.einsum("jk,il->ijkl", a, b)
        - np.einsum("ik,jl->ijkl", a, b)
        - np.einsum("jl,ik->ijkl", a, b)
    )


def conformal_riemann(riemann: np.ndarray, g: np.ndarray, gamma: np.ndarray, phi_d: np.ndarray,
                      phi_dd: np.ndarray, factor: float) -> np.ndarray:
    """Rm of ``factor * g`` (factor = exp(2 phi)) from Rm and Christoffels of g and partials of phi."""
    ginv = np.linalg.inv(g)
    hess_phi = phi_dd - np.einsum("kij,k->ij", gamma, phi_d)
    h = hess_phi - np.outer(phi_d, phi_d) + 0.5 * float(phi_d @ ginv @ phi_d) * g
    return factor * (riemann - kulkarni_nomizu(g, h))


def orthonormal_frame(metric: np.ndarray) -> np.ndarray:
    """Columns form a metric-orthonormal basis (from the Cholesky factor)."""
    lower = np.linalg.cholesky(metric)
    return np.linalg.inv(lower).T


def to_frame(tensor: np.ndarray, frame: np.ndarray) -> np.ndarray:
    """Components of a covariant tensor in the basis given by the columns of ``frame``."""
    out = tensor
    for axis in range(tensor.ndim):
        out = np.tensordot(out, frame, axes=([0], [0]))
    return out


def sample_planes(metric: np.ndarray, rng: np.random.Generator, count: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """All coordinate planes followed by ``count`` random metric-orthonormal pairs."""
    n = metric.shape[0]
    planes = []
    for i in range(n):
        for j in range(i + 1, n):
            planes.append((np.eye(n)[i], np.eye(n)[j]))
    for _ in range(count):
        u = rng.normal(size=n)
        v = rng.normal(size=n)
        u = u / np.sqrt(u @ metric @ u)
        v = v - (u @ metric @ v) * u
        v = v / np.sqrt(v @ metric @ v)
        planes.append((u, v))
    return planes


@dataclass(frozen=True)
class SectionalProfile:
    """Riemann tensor of a metric together with sampled sectional curvatures."""

    riemann: np.ndarray
    metric: np.ndarray
    planes: Sequence[tuple[np.ndarray, np.ndarray]]
    values: np.ndarray

    @property
    def minimum(self) -> float:
        return float(np.min(self.values))

    @property
    def maximum(self) -> float:
        return float(np.max(self.values))


def sectional_profile(riemann: np.ndarray, metric: np.ndarray,
                      planes: Sequence[tuple[np.ndarray, np.ndarray]]) -> SectionalProfile:
    values = np.array([sectional_curvature(riemann, metric, u, v) for u, v in planes])
    return SectionalProfile(riemann=riemann, metric=metric, planes=tuple(planes), values=values)
