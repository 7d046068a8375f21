"""Frame-free pointwise quantities by automatic differentiation.

Everything here is computed from a chart's local map with nested forward-mode
derivatives: second fundamental form and mean curvature as ambient vectors,
rho and its exact first and second partials, and the partials of the mean
curvature vector. No frame is ever differentiated.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable

import jax
import jax.numpy as jnp
import numpy as np

from moebius_lab.core.chart import ImmersionChart, LocalMap, check_rank
from moebius_lab.core.errors import UmbilicPoint
from moebius_lab.core.jets import as_coords

# jitted pipelines kept alive at once; each chart uses up to three
COMPILED_CACHE_SIZE = 128


def _classical(fn, x, params):
    J = jax.jacfwd(fn)(x, params)
    D2 = jax.jacfwd(jax.jacfwd(fn))(x, params)
    m, n = J.shape
    g = J.T @ J
    ginv = jnp.linalg.inv(g)
    P = jnp.eye(m) - J @ ginv @ J.T
    alpha = jnp.einsum("ab,bij->aij", P, D2)
    H = jnp.einsum("ij,aij->a", ginv, alpha) / n
    alpha_sq = jnp.einsum("ik,jl,aij,akl->", ginv, ginv, alpha, alpha)
    rho2 = n / (n - 1) * (alpha_sq - n * H @ H)
    return J, D2, g, P, alpha, H, rho2


def _moebius_inputs(fn, x, params):
    J, D2, g, P, alpha, H, rho2 = _classical(fn, x, params)

    def rho_of(y):
        return jnp.sqrt(_classical(fn, y, params)[6])

    def mean_of(y):
        return _classical(fn, y, params)[5]

    return {
        "value": fn(x, params),
        "J": J,
        "D2": D2,
        "g": g,
        "P": P,
        "alpha": alpha,
        "H": H,
        "rho2": rho2,
        "drho": jax.grad(rho_of)(x),
        "ddrho": jax.hessian(rho_of)(x),
        "dH": jax.jacfwd(mean_of)(x),
    }


def _moebius_metric(fn, x, params):
    _, _, g, _, _, _, rho2 = _classical(fn, x, params)
    return rho2 * g


def _projector(fn, x, params):
    return _classical(fn, x, params)[3]


_KINDS = {
    "moebius": _moebius_inputs,
    "gstar": _moebius_metric,
    "projector": _projector,
}


@lru_cache(maxsize=COMPILED_CACHE_SIZE)
def compiled(fn: Callable, kind: str) -> Callable:
    """Jitted pipeline ``kind`` for the local map ``fn``, least recently used evicted first."""
    body = _KINDS[kind]
    return jax.jit(lambda x, params: body(fn, x, params))


def run(local: LocalMap, x: np.ndarray, kind: str):
    out = compiled(local.fn, kind)(jnp.asarray(x), local.params)
    if isinstance(out, dict):
        return {k: np.asarray(v, dtype=float) for k, v in out.items()}
    return np.asarray(out, dtype=float)


@dataclass(frozen=True)
class LocalGeometry:
    """Ambient-vector form of the classical data plus exact partials of rho and H.

    ``alpha`` is (m, n, n) and ``dH`` is (m, n): ``dH[:, k]`` is the partial of
    the mean curvature vector along ``x_k``.
    """

    x: np.ndarray
    value: np.ndarray
    J: np.ndarray
    D2: np.ndarray
    g: np.ndarray
    P: np.ndarray
    alpha: np.ndarray
    H: np.ndarray
    rho2: float
    drho: np.ndarray
    ddrho: np.ndarray
    dH: np.ndarray

    @property
    def n(self) -> int:
        return int(self.J.shape[1])

    @property
    def m(self) -> int:
        return int(self.J.shape[0])

    @cached_property
    def ginv(self) -> np.ndarray:
        return np.linalg.inv(self.g)

    @property
    def rho(self) -> float:
        return float(np.sqrt(self.rho2))

    @cached_property
    def dg(self) -> np.ndarray:
        """dg[k, i, j] = partial_k g_ij."""
        t = np.einsum("aik,aj->kij", self.D2, self.J)
        return t + np.swapaxes(t, 1, 2)

    @cached_property
    def christoffel(self) -> np.ndarray:
        """Gamma[k, i, j] = Gamma^k_ij of the induced metric."""
        dg = self.dg
        lowered = 0.5 * (np.einsum("jil->lij", dg) + np.einsum("ijl->lij", dg) - dg)
        return np.einsum("kl,lij->kij", self.ginv, lowered)


def local_geometry(chart: ImmersionChart, x, umbilic_threshold: float = 1e-12) -> LocalGeometry:
    """Moebius-ready local data of ``chart`` at ``x``; raises UmbilicPoint near umbilics."""
    coords = chart.require(x)
    out = run(chart.local_map(coords), coords, "moebius")
    check_rank(out["J"], chart.label)
    rho2 = float(out["rho2"])
    if not rho2 > umbilic_threshold:
        raise UmbilicPoint(
            f"Chart '{chart.label}' is umbilic at {coords.tolist()}: "
            f"rho^2 = {rho2:.3e} <= {umbilic_threshold:.1e}"
        )
    return LocalGeometry(
        x=coords,
        value=out["value"],
        J=out["J"],
        D2=out["D2"],
        g=out["g"],
        P=out["P"],
        alpha=out["alpha"],
        H=out["H"],
        rho2=rho2,
        drho=out["drho"],
        ddrho=out["ddrho"],
        dH=out["dH"],
    )


def moebius_metric_at(chart: ImmersionChart, x) -> np.ndarray:
    """g* = rho^2 g at ``x`` using the local map centred at ``x`` itself."""
    coords = as_coords(x)
    return run(chart.local_map(coords), coords, "gstar")


def projector_at(chart: ImmersionChart, x) -> np.ndarray:
    coords = as_coords(x)
    return run(chart.local_map(coords), coords, "projector")
