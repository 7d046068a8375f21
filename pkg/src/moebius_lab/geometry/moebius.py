"""Moebius invariants of umbilic-free submanifolds and the conformal structure equations.

``moebius_data`` assembles the whole pointwise package from the exact local
data of ``moebius_lab.geometry.local``; the public operations below are thin
views on it, plus the residual checks of the conformal Gauss and Ricci
equations and the finite-difference oracles.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from moebius_lab.core.chart import ImmersionChart
from moebius_lab.core.errors import DimensionTooSmall
from moebius_lab.core.jets import DEFAULT_HIGH_STEP, DEFAULT_STEP, as_coords
from moebius_lab.geometry.curvature import (
    SectionalProfile,
    conformal_riemann,
    fd_riemann,
    normalized_scalar,
    orthonormal_frame,
    ricci,
    sample_planes,
    sectional_profile,
    to_frame,
)
from moebius_lab.geometry.fundamental import UMBILIC_THRESHOLD, frames
from moebius_lab.geometry.lightcone import LightConeModel, lift_gram, moebius_lift_differential
from moebius_lab.geometry.local import LocalGeometry, local_geometry, moebius_metric_at, projector_at

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MoebiusData:
    """Pointwise Moebius package in chart coordinates.

    Tangent indices are coordinate indices; normal indices refer to
    ``normal_frame``. ``beta_ambient`` and ``omega_ambient`` keep the same
    quantities as ambient vectors.
    """

    local: LocalGeometry
    rho: float
    grad_rho_star: np.ndarray
    gstar: np.ndarray
    normal_frame: np.ndarray
    beta_ambient: np.ndarray
    beta: np.ndarray
    third_form: np.ndarray
    blaschke: np.ndarray
    omega_ambient: np.ndarray
    moebius_form: np.ndarray
    riemann_star: np.ndarray
    ric_star: np.ndarray
    s_star: float
    sectional: SectionalProfile

    @property
    def n(self) -> int:
        return int(self.gstar.shape[0])

    @property
    def sec_star(self) -> dict[tuple[int, int] | int, float]:
        """Sampled K* keyed by coordinate pair (i, j) or by random-plane index."""
        n = self.n
        keys: list = [(i, j) for i in range(n) for j in range(i + 1, n)]
        keys += list(range(len(self.sectional.values) - len(keys)))
        return dict(zip(keys, self.sectional.values.tolist()))

    @cached_property
    def gstar_inv(self) -> np.ndarray:
        return np.linalg.inv(self.gstar)

    @cached_property
    def frame(self) -> np.ndarray:
        """A g*-orthonormal frame (columns, coordinate components)."""
        return orthonormal_frame(self.gstar)

    @property
    def blaschke_endomorphism(self) -> np.ndarray:
        """psi-hat with g*(psi-hat X, Y) = psi(X, Y)."""
        return self.gstar_inv @ self.blaschke


def _assemble(lg: LocalGeometry, planes_rng: np.random.Generator | None, random_planes: int) -> MoebiusData:
    n = lg.n
    rho = lg.rho
    g, ginv = lg.g, lg.ginv
    gamma = lg.christoffel
    gstar = lg.rho2 * g
    gstar_inv = ginv / lg.rho2

    phi_d = lg.drho / rho
    phi_dd = lg.ddrho / rho - np.outer(lg.drho, lg.drho) / lg.rho2
    grad_rho_star = gstar_inv @ lg.drho
    grad_rho_star_sq = float(lg.drho @ gstar_inv @ lg.drho)

    beta_amb = rho * (lg.alpha - lg.H[:, None, None] * g[None, :, :])
    _, normal, _ = frames(lg.J)
    beta = np.einsum("ax,aij->xij", normal, beta_amb)
    third = np.einsum("kl,aik,ajl->ij", gstar_inv, beta_amb, beta_amb)

    eye = np.eye(n)
    gamma_star = (
        gamma
        + np.einsum("ki,j->kij", eye, phi_d)
        + np.einsum("kj,i->kij", eye, phi_d)
        - np.einsum("ij,k->kij", g, ginv @ phi_d)
    )
    hess_star_rho = lg.ddrho - np.einsum("kij,k->ij", gamma_star, lg.drho)
    mean_sq = float(lg.H @ lg.H)
    blaschke = (
        np.einsum("aij,a->ij", beta_amb, lg.H) / rho
        + (grad_rho_star_sq + mean_sq) / (2.0 * lg.rho2) * gstar
        - hess_star_rho / rho
    )
    blaschke = 0.5 * (blaschke + blaschke.T)

    omega_amb = -(lg.P @ lg.dH + np.einsum("aik,k->ai", beta_amb, grad_rho_star)) / rho
    omega = normal.T @ omega_amb

    riemann = np.einsum("ail,ajk->ijkl", lg.alpha, lg.alpha) - np.einsum("aik,ajl->ijkl", lg.alpha, lg.alpha)
    riemann_star = conformal_riemann(riemann, g, gamma, phi_d, phi_dd, lg.rho2)
    ric_star = ricci(riemann_star, gstar)
    s_star = normalized_scalar(riemann_star, gstar)

    rng = planes_rng if planes_rng is not None else np.random.default_rng(0)
    planes = sample_planes(gstar, rng, random_planes)
    return MoebiusData(
        local=lg,
        rho=rho,
        grad_rho_star=grad_rho_star,
        gstar=gstar,
        normal_frame=normal,
        beta_ambient=beta_amb,
        beta=beta,
        third_form=third,
        blaschke=blaschke,
        omega_ambient=omega_amb,
        moebius_form=omega,
        riemann_star=riemann_star,
        ric_star=ric_star,
        s_star=s_star,
        sectional=sectional_profile(riemann_star, gstar, planes),
    )


def moebius_data(chart: ImmersionChart, x, *, rng: np.random.Generator | None = None, random_planes: int = 10,
                 umbilic_threshold: float = UMBILIC_THRESHOLD) -> MoebiusData:
    """Full Moebius package of ``chart`` at ``x``; raises UmbilicPoint at umbilics."""
    return _assemble(local_geometry(chart, x, umbilic_threshold), rng, random_planes)


def moebius_metric(chart: ImmersionChart, x) -> np.ndarray:
    return moebius_data(chart, x, random_planes=0).gstar


def moebius_lift_metric_check(chart: ImmersionChart, x, model: LightConeModel | None = None) -> float:
    """max |<dF(d_i), dF(d_j)> - g*_ij| for the lift F = rho Psi(f)."""
    lg = local_geometry(chart, x)
    model = model or LightConeModel.canonical(lg.m)
    dF = moebius_lift_differential(model, lg.value, lg.J, lg.rho, lg.drho)
    return float(np.max(np.abs(lift_gram(dF) - lg.rho2 * lg.g)))


def moebius_second_fundamental_form(chart: ImmersionChart, x) -> np.ndarray:
    return moebius_data(chart, x, random_planes=0).beta


def beta_trace_and_norm(data: MoebiusData) -> tuple[float, float]:
    """(max_xi |tr_g* beta_xi|, sum_xi |beta_xi|_*^2)."""
    inv = data.gstar_inv
    traces = np.einsum("ij,xij->x", inv, data.beta)
    norm = float(np.einsum("ik,jl,xij,xkl->", inv, inv, data.beta, data.beta))
    return float(np.max(np.abs(traces))), norm


def blaschke_tensor_direct(chart: ImmersionChart, x) -> np.ndarray:
    return moebius_data(chart, x, random_planes=0).blaschke


def blaschke_from_ricci(data: MoebiusData) -> np.ndarray:
    """psi from (n-2) psi = Ric* + III - (n^2 s* + 1)/(2n) g*."""
    n = data.n
    if n < 3:
        raise DimensionTooSmall(f"The Ricci route to the Blaschke tensor needs n >= 3, got n={n}")
    psi = (data.ric_star + data.third_form - (n * n * data.s_star + 1.0) / (2.0 * n) * data.gstar) / (n - 2)
    return 0.5 * (psi + psi.T)


def blaschke_tensor_via_ric(chart: ImmersionChart, x) -> np.ndarray:
    return blaschke_from_ricci(moebius_data(chart, x, random_planes=0))


def blaschke_trace_defect(data: MoebiusData) -> float:
    """|tr_g* psi - (n^2 s* + 1)/(2n)|."""
    n = data.n
    trace = float(np.einsum("ij,ij->", data.gstar_inv, data.blaschke))
    return abs(trace - (n * n * data.s_star + 1.0) / (2.0 * n))


def moebius_form(chart: ImmersionChart, x) -> np.ndarray:
    return moebius_data(chart, x, random_planes=0).moebius_form


def _omega_at(chart: ImmersionChart, y: np.ndarray) -> np.ndarray:
    return _assemble(local_geometry(chart, y), None, 0).omega_ambient


def moebius_form_differential(chart: ImmersionChart, x, step: float = DEFAULT_STEP) -> np.ndarray:
    """d omega as ambient normal vectors, (m, n, n), by Richardson differences of omega.

    ``d omega(d_i, d_j) = P (d_i omega_j - d_j omega_i)``; coordinate fields commute
    so no connection term survives.
    """
    coords = chart.domain.require(as_coords(x), margin=2.0 * step + chart.evaluator.stencil_radius)
    n = coords.size
    derivs = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        fine = (_omega_at(chart, coords + step * e) - _omega_at(chart, coords - step * e)) / (2 * step)
        coarse = (_omega_at(chart, coords + 2 * step * e) - _omega_at(chart, coords - 2 * step * e)) / (4 * step)
        derivs.append((4.0 * fine - coarse) / 3.0)
    d_omega = np.stack(derivs)  # [k, a, j] = d_k omega_j
    P = local_geometry(chart, coords).P
    raw = np.einsum("iaj->aij", d_omega) - np.einsum("jai->aij", d_omega)
    return np.einsum("ab,bij->aij", P, raw)


def ricci_identity_rhs(data: MoebiusData) -> np.ndarray:
    """beta(d_j, psi-hat d_i) - beta(d_i, psi-hat d_j) as ambient vectors, (m, n, n)."""
    psi_hat = data.blaschke_endomorphism
    first = np.einsum("ajk,ki->aij", data.beta_ambient, psi_hat)
    return first - np.swapaxes(first, 1, 2)


def _frame_norm_two_form(values: np.ndarray, frame: np.ndarray) -> float:
    """Largest |v(E_a, E_b)| for an ambient-vector-valued 2-form in a frame."""
    framed = np.einsum("xij,ia,jb->xab", values, frame, frame)
    return float(np.max(np.linalg.norm(framed, axis=0)))


@dataclass(frozen=True)
class ClosednessReport:
    closed_residual: float
    ricci_identity_residual: float


def moebius_form_closedness(chart: ImmersionChart, x, step: float = DEFAULT_STEP) -> ClosednessReport:
    """|d omega| and |d omega - (beta(Y, psi-hat X) - beta(X, psi-hat Y))| in a g*-orthonormal frame."""
    data = moebius_data(chart, x, random_planes=0)
    d_omega = moebius_form_differential(chart, x, step)
    frame = data.frame
    return ClosednessReport(
        closed_residual=_frame_norm_two_form(d_omega, frame),
        ricci_identity_residual=_frame_norm_two_form(d_omega - ricci_identity_rhs(data), frame),
    )


def star_curvature_via_conformal_change(chart: ImmersionChart, x, planes=None, rng=None,
                                        random_planes: int = 10) -> SectionalProfile:
    data = moebius_data(chart, x, rng=rng, random_planes=random_planes)
    if planes is None:
        return data.sectional
    return sectional_profile(data.riemann_star, data.gstar, planes)


def metric_curvature_via_fd(metric, x, planes=None, rng=None, random_planes: int = 10,
                            step: float = DEFAULT_HIGH_STEP) -> SectionalProfile:
    """Sectional curvatures of a sampled metric ``metric(y) -> (n, n)`` from FD Christoffels."""
    g, riemann = fd_riemann(metric, as_coords(x), step)
    if planes is None:
        planes = sample_planes(g, rng if rng is not None else np.random.default_rng(0), random_planes)
    return sectional_profile(riemann, g, planes)


def star_curvature_via_fd(chart: ImmersionChart, x, planes=None, rng=None, random_planes: int = 10,
                          step: float = DEFAULT_HIGH_STEP) -> SectionalProfile:
    """K* from finite-difference Christoffels of the sampled Moebius metric."""
    coords = chart.domain.require(as_coords(x), margin=4.0 * step + chart.evaluator.stencil_radius)
    return metric_curvature_via_fd(lambda y: moebius_metric_at(chart, y), coords, planes, rng, random_planes, step)


def conformal_gauss_defect(data: MoebiusData, frame: np.ndarray | None = None,
                           blaschke: np.ndarray | None = None) -> float:
    """max |<R*(X,Y)Z,W>* - RHS| over frame 4-tuples.

    RHS = <beta(X,W),beta(Y,Z)> - <beta(X,Z),beta(Y,W)>
          + psi(X,W) g*(Y,Z) + psi(Y,Z) g*(X,W) - psi(X,Z) g*(Y,W) - psi(Y,W) g*(X,Z)
    """
    psi = data.blaschke if blaschke is None else blaschke
    b = data.beta_ambient
    gs = data.gstar
    rhs = (
        np.einsum("ail,ajk->ijkl", b, b)
        - np.einsum("aik,ajl->ijkl", b, b)
        + np.einsum("il,jk->ijkl", psi, gs)
        + np.einsum("jk,il->ijkl", psi, gs)
        - np.einsum("ik,jl->ijkl", psi, gs)
        - np.einsum("jl,ik->ijkl", psi, gs)
    )
    frame = data.frame if frame is None else frame
    return float(np.max(np.abs(to_frame(data.riemann_star - rhs, frame))))


def conformal_gauss_residual(chart: ImmersionChart, x, frame: np.ndarray | None = None) -> float:
    return conformal_gauss_defect(moebius_data(chart, x, random_planes=0), frame)


def normal_curvature_fd(chart: ImmersionChart, x, step: float = DEFAULT_STEP) -> np.ndarray:
    """R^perp(d_i, d_j) = P [d_i P, d_j P] P as (n, n, m, m) by Richardson differences of P."""
    coords = chart.domain.require(as_coords(x), margin=2.0 * step + chart.evaluator.stencil_radius)
    n = coords.size
    dP = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        fine = (projector_at(chart, coords + step * e) - projector_at(chart, coords - step * e)) / (2 * step)
        coarse = (projector_at(chart, coords + 2 * step * e) - projector_at(chart, coords - 2 * step * e)) / (4 * step)
        dP.append((4.0 * fine - coarse) / 3.0)
    P = projector_at(chart, coords)
    out = np.zeros((n, n) + P.shape)
    for i, j in itertools.combinations(range(n), 2):
        curv = P @ (dP[i] @ dP[j] - dP[j] @ dP[i]) @ P
        out[i, j] = curv
        out[j, i] = -curv
    return out


@dataclass(frozen=True)
class RicciEquationReport:
    residual: float
    normal_curvature: float
    commutator: float


def ricci_equation_residual(chart: ImmersionChart, x, step: float = DEFAULT_STEP) -> RicciEquationReport:
    """Compare <R^perp(X,Y)xi,eta> with <[B_xi,B_eta]X,Y>* in a g*-orthonormal frame."""
    data = moebius_data(chart, x, random_planes=0)
    p = data.beta.shape[0]
    if p == 1:
        return RicciEquationReport(0.0, 0.0, 0.0)
    normal = data.normal_frame
    lhs = np.einsum("ijab,ax,by->ijxy", normal_curvature_fd(chart, x, step), normal, normal)
    lhs = np.swapaxes(lhs, 2, 3)  # [i, j, xi, eta] = <R(d_i,d_j) xi, eta>
    inv = data.gstar_inv
    b = data.beta
    rhs = np.einsum("yik,kl,xlj->ijxy", b, inv, b) - np.einsum("xik,kl,ylj->ijxy", b, inv, b)
    frame = data.frame
    lhs_f = np.einsum("ijxy,ia,jb->abxy", lhs, frame, frame)
    rhs_f = np.einsum("ijxy,ia,jb->abxy", rhs, frame, frame)
    return RicciEquationReport(
        residual=float(np.max(np.abs(lhs_f - rhs_f))),
        normal_curvature=float(np.max(np.abs(lhs_f))),
        commutator=float(np.max(np.abs(rhs_f))),
    )


def kulkarni_defect(data: MoebiusData, frame: np.ndarray | None = None) -> float:
    """max |K*_ij + K*_kl - K*_ik - K*_jl| over distinct indices of a g*-orthonormal frame."""
    n = data.n
    if n < 4:
        raise DimensionTooSmall(f"The four-index sectional identity needs n >= 4, got n={n}")
    frame = data.frame if frame is None else frame
    framed = to_frame(data.riemann_star, frame)
    K = np.einsum("abba->ab", framed)
    worst = 0.0
    for i, j, k, l in itertools.permutations(range(n), 4):
        worst = max(worst, abs(K[i, j] + K[k, l] - K[i, k] - K[j, l]))
    return float(worst)


def kulkarni_flatness_residual(chart: ImmersionChart, x, frame: np.ndarray | None = None) -> float:
    return kulkarni_defect(moebius_data(chart, x, random_planes=0), frame)


def product_conformal_flatness(c1: float, d1: int, c2: float, d2: int, atol: float = 1e-12) -> bool:
    """Whether the Riemannian product of space forms Q^d1_c1 x Q^d2_c2 is conformally flat."""
    if d1 < 1 or d2 < 1 or d1 + d2 < 3:
        raise DimensionTooSmall(f"Product criterion needs factor dimensions >= 1 summing to >= 3, got {d1}+{d2}")
    if d1 == 1 or d2 == 1:
        return True
    if abs(c1) <= atol and abs(c2) <= atol:
        return True
    return abs(c1 + c2) <= atol and abs(c1) > atol
