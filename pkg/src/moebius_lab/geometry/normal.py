"""Flat normal bundles, principal normals and the Moebius adapted-frame structure."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from moebius_lab.core.chart import ImmersionChart, evaluate_jet
from moebius_lab.core.errors import (
    DegenerateFi,
    GroupingAmbiguous,
    MoebiusLabError,
    NotFlat,
    StructureMismatch,
)
from moebius_lab.core.jets import DEFAULT_STEP, as_coords
from moebius_lab.geometry.fundamental import (
    FundamentalData,
    fundamental_data,
    gauss_curvature_tensor,
    rho_squared,
    sectional_curvature,
)
from moebius_lab.geometry.moebius import MoebiusData, moebius_data

logger = logging.getLogger(__name__)

DEFAULT_GROUPING_TOL = 1e-6


def normal_bundle_flatness(fd: FundamentalData) -> float:
    """Largest Frobenius norm of [A_xi, A_eta] over normal frame pairs."""
    worst = 0.0
    for a, b in itertools.combinations(range(fd.p), 2):
        A, B = fd.shape_ops[a], fd.shape_ops[b]
        worst = max(worst, float(np.linalg.norm(A @ B - B @ A)))
    return worst


def curvature_scale(fd: FundamentalData) -> float:
    """rho when positive, else the rms of alpha, else 1."""
    rho2 = rho_squared(fd) if fd.n >= 2 else 0.0
    if rho2 > 1e-12:
        return float(np.sqrt(rho2))
    size = np.sqrt(fd.alpha_norm_sq / fd.n)
    return float(size) if size > 1e-12 else 1.0


@dataclass(frozen=True)
class PrincipalNormal:
    """One principal normal with its eigenspace; ``tangent_basis`` rows are coordinate vectors."""

    eta: np.ndarray
    multiplicity: int
    tangent_basis: np.ndarray


@dataclass(frozen=True)
class PrincipalNormalDecomposition:
    groups: tuple[PrincipalNormal, ...]
    grouping_tol: float
    adapted_frame: np.ndarray
    normal_frame: np.ndarray
    scale: float
    offdiagonal: float
    ambiguous: bool = False
    column_normals: np.ndarray | None = None

    @property
    def pattern(self) -> tuple[int, ...]:
        return tuple(sorted((grp.multiplicity for grp in self.groups), reverse=True))

    @property
    def column_groups(self) -> list[int]:
        """Group index of each adapted frame column."""
        return [i for i, grp in enumerate(self.groups) for _ in range(grp.multiplicity)]

    @property
    def gap_margin(self) -> float:
        """Largest spread of a group about its normal over the smallest gap between groups.

        Near 0 for a clean grouping, near 1 when a merged pair is as far apart as
        two distinct principal normals.
        """
        if self.column_normals is None or len(self.groups) == 0:
            return 0.0
        owners = self.column_groups
        spread = max(float(np.linalg.norm(self.column_normals[c] - self.groups[g].eta)) for c, g in enumerate(owners))
        gaps = [float(np.linalg.norm(a.eta - b.eta)) for a, b in itertools.combinations(self.groups, 2)]
        gap = min(gaps) if gaps else self.scale
        return spread / max(gap, np.finfo(float).tiny)

    def big_groups(self) -> list[PrincipalNormal]:
        return [grp for grp in self.groups if grp.multiplicity > 1]

    def eta_ambient(self, group: PrincipalNormal) -> np.ndarray:
        return self.normal_frame @ group.eta


def _generic_weights(rng: np.random.Generator, p: int) -> np.ndarray:
    w = rng.normal(size=p)
    return w / np.linalg.norm(w)


def _clusters(values: np.ndarray, tol: float) -> list[list[int]]:
    order = np.argsort(values, kind="stable")
    clusters: list[list[int]] = [[int(order[0])]]
    for idx in order[1:]:
        if abs(values[idx] - values[clusters[-1][-1]]) <= tol:
            clusters[-1].append(int(idx))
        else:
            clusters.append([int(idx)])
    return clusters


def principal_normals(fd: FundamentalData, tol: float = DEFAULT_GROUPING_TOL,
                      rng: np.random.Generator | None = None, strict: bool = False) -> PrincipalNormalDecomposition:
    """Simultaneous eigenbasis of the shape operators grouped into principal normals.

    ``tol`` is relative to ``curvature_scale(fd)``. Candidate normals closer
    than ``10 * tol`` but farther than ``tol`` make the grouping ambiguous:
    logged as a warning, raised with ``strict=True``.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    scale = curvature_scale(fd)
    flatness = normal_bundle_flatness(fd)
    if flatness > tol * scale ** 2:
        raise NotFlat(
            f"Shape operators do not commute: |[A_xi, A_eta]| = {flatness:.3e} "
            f"exceeds {tol:.1e} * scale^2 (scale {scale:.3g})"
        )
    n, p = fd.n, fd.p
    shape = fd.shape_ops
    basis = np.eye(n)
    if p > 0:
        generic = np.einsum("x,xij->ij", _generic_weights(rng, p), shape)
        values, basis = np.linalg.eigh(generic)
        refined = basis.copy()
        for cluster in _clusters(values, tol * scale):
            if len(cluster) < 2:
                continue
            sub = basis[:, cluster]
            weights = _generic_weights(rng, p)
            block = np.einsum("x,ia,xij,jb->ab", weights, sub, shape, sub)
            _, rot = np.linalg.eigh(block)
            refined[:, cluster] = sub @ rot
        basis = refined
    diagonal = np.einsum("ia,xij,ja->ax", basis, shape, basis) if p > 0 else np.zeros((n, 0))
    full = np.einsum("ia,xij,jb->xab", basis, shape, basis) if p > 0 else np.zeros((0, n, n))
    off = full.copy()
    for a in range(n):
        off[:, a, a] = 0.0
    offdiagonal = float(np.max(np.abs(off))) if off.size else 0.0

    members: list[list[int]] = []
    ambiguous = False
    threshold = tol * scale
    for col in range(n):
        distances = [np.linalg.norm(diagonal[col] - diagonal[grp[0]]) for grp in members]
        closest = int(np.argmin(distances)) if distances else -1
        if distances and distances[closest] <= threshold:
            members[closest].append(col)
            continue
        if distances and distances[closest] < 10 * threshold:
            ambiguous = True
            message = (
                f"Principal normals {diagonal[col]} and {diagonal[members[closest][0]]} are "
                f"{distances[closest]:.3e} apart, inside the ambiguity band [{threshold:.1e}, {10 * threshold:.1e})"
            )
            if strict:
                merged = [list(grp) for grp in members]
                merged[closest].append(col)
                split = [list(grp) for grp in members] + [[col]]
                raise GroupingAmbiguous(message, groupings=[merged, split])
            logger.warning(message)
        members.append([col])

    members.sort(key=lambda grp: (-len(grp), float(np.linalg.norm(diagonal[grp].mean(axis=0))), grp[0]))
    groups = []
    columns = []
    for grp in members:
        vectors = fd.frame_coeffs @ basis[:, grp]
        groups.append(PrincipalNormal(eta=diagonal[grp].mean(axis=0), multiplicity=len(grp), tangent_basis=vectors.T))
        columns.append(vectors)
    return PrincipalNormalDecomposition(
        groups=tuple(groups),
        grouping_tol=tol,
        adapted_frame=np.hstack(columns),
        normal_frame=fd.normal_frame,
        scale=scale,
        offdiagonal=offdiagonal,
        ambiguous=ambiguous,
        column_normals=np.vstack([diagonal[grp] for grp in members]),
    )


def sectional_vs_principal_normals(fd: FundamentalData, pnd: PrincipalNormalDecomposition) -> float:
    """max |K(X_a, X_b) - <eta_a, eta_b>| over pairs of adapted frame columns."""
    riemann = gauss_curvature_tensor(fd, coordinates=True)
    frame = pnd.adapted_frame
    owner = pnd.column_groups
    worst = 0.0
    for a, b in itertools.combinations(range(fd.n), 2):
        K = sectional_curvature(riemann, fd.g, frame[:, a], frame[:, b])
        expected = float(pnd.groups[owner[a]].eta @ pnd.groups[owner[b]].eta)
        worst = max(worst, abs(K - expected))
    return worst


@dataclass(frozen=True)
class MoebiusNormalDecomposition:
    """Moebius principal normals relative to the big group.

    ``eta_bar`` belongs to the group of multiplicity >= 2, ``eta_bars`` to the
    simple groups in adapted-frame order. All normal vectors are components in
    the normal frame.
    """

    eta_bar: np.ndarray
    eta_bars: list[np.ndarray]
    f_values: list[float]
    xi_frame: np.ndarray
    table_residual: float
    simple_beta_norms: list[float] = field(default_factory=list)
    delta_star: np.ndarray | None = None

    @property
    def sum_f_squared(self) -> float:
        return float(np.sum(np.square(self.f_values)))

    @property
    def eta_bar_norm(self) -> float:
        return float(np.linalg.norm(self.eta_bar))

    @property
    def orthogonality_defect(self) -> float:
        gram = self.xi_frame.T @ self.xi_frame
        return float(np.max(np.abs(gram - np.eye(gram.shape[0])))) if gram.size else 0.0


def moebius_normal_decomposition(chart: ImmersionChart, x, pnd: PrincipalNormalDecomposition | None = None,
                                 data: MoebiusData | None = None, tol: float = DEFAULT_GROUPING_TOL,
                                 rng: np.random.Generator | None = None) -> MoebiusNormalDecomposition:
    if pnd is None:
        pnd = principal_normals(fundamental_data(evaluate_jet(chart, x, 2)), tol, rng)
    data = data if data is not None else moebius_data(chart, x, random_planes=0)
    big = pnd.big_groups()
    simple = [grp for grp in pnd.groups if grp.multiplicity == 1]
    if len(big) != 1 or not simple or len(simple) > data.beta.shape[0]:
        raise StructureMismatch(
            f"Expected one principal normal of multiplicity >= 2 and at most p={data.beta.shape[0]} "
            f"simple ones, found pattern {pnd.pattern}"
        )
    fd_mean = pnd.normal_frame.T @ data.local.H
    rho = data.rho
    eta_bar = (big[0].eta - fd_mean) / rho
    eta_bars, f_values, xis, beta_norms = [], [], [], []
    for grp in simple:
        eta_i = (grp.eta - fd_mean) / rho
        diff = eta_i - eta_bar
        f_i = float(np.linalg.norm(diff))
        if f_i < 1e-10:
            raise DegenerateFi(f"f_i = {f_i:.3e} vanishes for principal normal {grp.eta}")
        eta_bars.append(eta_i)
        f_values.append(f_i)
        xis.append(diff / f_i)
        beta_norms.append(float(np.linalg.norm(eta_i)))

    # beta in the g*-orthonormal adapted frame must be diagonal with entries eta_bar or eta_bar_i.
    frame = pnd.adapted_frame / rho
    beta = np.einsum("ax,aij->xij", pnd.normal_frame, data.beta_ambient)
    framed = np.einsum("xij,ia,jb->xab", beta, frame, frame)
    expected = np.zeros_like(framed)
    owner = pnd.column_groups
    simple_index = {id(grp): k for k, grp in enumerate(simple)}
    for col, group_index in enumerate(owner):
        grp = pnd.groups[group_index]
        expected[:, col, col] = eta_bar if grp.multiplicity > 1 else eta_bars[simple_index[id(grp)]]
    return MoebiusNormalDecomposition(
        eta_bar=eta_bar,
        eta_bars=eta_bars,
        f_values=f_values,
        xi_frame=np.stack(xis, axis=1),
        table_residual=float(np.max(np.abs(framed - expected))),
        simple_beta_norms=beta_norms,
    )


@dataclass(frozen=True)
class CensusRow:
    index: int
    point: np.ndarray
    pattern: tuple[int, ...]
    moore_bound: bool
    single_big_group: bool
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.moore_bound and self.single_big_group and not self.message


def census_entry(pnd: PrincipalNormalDecomposition, n: int, p: int) -> tuple[bool, bool]:
    """(Moore bound max multiplicity >= n - p, at most one multiplicity > 1)."""
    return max(pnd.pattern) >= n - p, len(pnd.big_groups()) <= 1


def multiplicity_census(chart: ImmersionChart, grid: Sequence, tol: float = DEFAULT_GROUPING_TOL,
                        seed: int = 0) -> list[CensusRow]:
    """Multiplicity pattern and the two structural bounds at every grid point."""
    rows = []
    n, p = chart.intrinsic_dim, chart.codim
    patterns = set()
    for index, x in enumerate(grid):
        coords = as_coords(x)
        try:
            pnd = principal_normals(fundamental_data(evaluate_jet(chart, coords, 2)), tol,
                                    np.random.default_rng([seed, index]))
        except MoebiusLabError as e:
            logger.warning("Census failed at point %d: %s", index, e)
            rows.append(CensusRow(index, coords, (), False, False, str(e)))
            continue
        moore, single = census_entry(pnd, n, p)
        patterns.add(pnd.pattern)
        rows.append(CensusRow(index, coords, pnd.pattern, moore, single))
    if len(patterns) > 1:
        logger.warning("Multiplicity pattern changes across the grid of '%s': %s", chart.label, sorted(patterns))
    return rows


def _big_normal_at(chart: ImmersionChart, y: np.ndarray, tol: float, seed: int) -> np.ndarray:
    pnd = principal_normals(fundamental_data(evaluate_jet(chart, y, 2)), tol, np.random.default_rng(seed))
    big = pnd.big_groups()
    if len(big) != 1:
        raise StructureMismatch(f"No unique principal normal of multiplicity >= 2 at {y.tolist()}")
    return pnd.eta_ambient(big[0])


def dupin_residual(chart: ImmersionChart, x, tol: float = DEFAULT_GROUPING_TOL, seed: int = 0,
                   step: float = DEFAULT_STEP) -> float:
    """max over the big group's tangent basis T of |nabla^perp_T eta|."""
    coords = chart.domain.require(as_coords(x), margin=2.0 * step + chart.evaluator.stencil_radius)
    fd = fundamental_data(evaluate_jet(chart, coords, 2))
    pnd = principal_normals(fd, tol, np.random.default_rng(seed))
    big = pnd.big_groups()
    if len(big) != 1:
        raise StructureMismatch(f"Dupin check needs one principal normal of multiplicity >= 2, got {pnd.pattern}")
    projector = fd.normal_frame @ fd.normal_frame.T
    worst = 0.0
    for direction in big[0].tangent_basis:
        # Scale so the stencil stays inside the margin for any unit direction.
        length = float(np.linalg.norm(direction))
        h = step / max(length, 1.0)

        def eta(t: float) -> np.ndarray:
            return _big_normal_at(chart, coords + t * direction, tol, seed)

        fine = (eta(h) - eta(-h)) / (2 * h)
        coarse = (eta(2 * h) - eta(-2 * h)) / (4 * h)
        worst = max(worst, float(np.linalg.norm(projector @ ((4 * fine - coarse) / 3))))
    return worst
