"""Residual checks run by the scenario runner.

Each check takes an ``EvaluationContext`` and returns a residual (or a
``Measurement``); the runner compares it with the tolerance. Raise
``CheckSkipped`` when the check does not apply at the point.
"""

from __future__ import annotations

import numpy as np

from moebius_lab.core.chart import evaluate_jet
from moebius_lab.core.errors import DimensionTooSmall, NotFlat, StructureMismatch
from moebius_lab.core.jets import fd_jet_oracle
from moebius_lab.core.registry import CheckSkipped, Measurement, check
from moebius_lab.engine.context import EvaluationContext
from moebius_lab.geometry.curvature import to_frame
from moebius_lab.geometry.moebius import (
    beta_trace_and_norm,
    blaschke_from_ricci,
    blaschke_trace_defect,
    conformal_gauss_defect,
    kulkarni_defect,
    moebius_form_closedness,
    moebius_lift_metric_check,
    ricci_equation_residual,
    star_curvature_via_fd,
)
from moebius_lab.geometry.normal import (
    census_entry,
    dupin_residual,
    moebius_normal_decomposition,
    normal_bundle_flatness,
    sectional_vs_principal_normals,
)


def _principal(ctx: EvaluationContext):
    try:
        return ctx.principal
    except NotFlat as e:
        raise CheckSkipped(f"normal bundle is not flat: {e}")


# Relative exact-vs-FD gap allowed at each jet order, mapped onto the check tolerance.
JET_ORDER_TOLERANCES = {1: 1e-7, 2: 1e-5, 3: 1e-4}


@check("jet_agreement", "exact jets against the finite-difference oracle", 1e-5, module="chart-core",
       exact_only=True)
def jet_agreement(ctx: EvaluationContext) -> float:
    """Worst exact-vs-FD jet gap through order 3, each order scaled to its own tolerance."""
    chart = ctx.chart
    if not chart.evaluator.exact:
        raise CheckSkipped("chart has no exact jets")
    numerics = ctx.settings.numerics
    exact = evaluate_jet(chart, ctx.x, 3)
    approx = fd_jet_oracle(chart.evaluator.point, ctx.x, 3, numerics.fd_step, numerics.fd_high_step, chart.domain)
    worst = 0.0
    for k, order_tol in JET_ORDER_TOLERANCES.items():
        a, b = exact.derivative(k), approx.derivative(k)
        gap = float(np.max(np.abs(a - b))) / max(1.0, float(np.max(np.abs(a))))
        worst = max(worst, gap * 1e-5 / order_tol)
    return worst


@check("rho_formula", "rho of the family from the mean curvature of its core", 1e-8, module="constructions")
def rho_formula(ctx: EvaluationContext) -> float:
    """Relative gap between rho and the closed form carried by the family."""
    expected = ctx.chart.meta.get("expected_rho")
    if expected is None:
        raise CheckSkipped("chart carries no closed-form rho")
    target = float(expected(ctx.x))
    return abs(ctx.moebius.rho - target) / max(1.0, abs(target))


@check("beta_trace", "the Moebius second fundamental form is traceless", 1e-10)
def beta_trace(ctx: EvaluationContext) -> float:
    """max over normals of |tr_g* beta|."""
    return beta_trace_and_norm(ctx.moebius)[0]


@check("beta_norm", "|beta|^2 = (n-1)/n in the Moebius metric", 1e-9)
def beta_norm(ctx: EvaluationContext) -> float:
    """|sum |beta_xi|^2_* - (n-1)/n|."""
    n = ctx.moebius.n
    return abs(beta_trace_and_norm(ctx.moebius)[1] - (n - 1.0) / n)


@check("blaschke_trace", "tr psi = (n^2 s* + 1)/(2n)", 1e-6)
def blaschke_trace(ctx: EvaluationContext) -> float:
    """Trace identity of the Blaschke tensor."""
    return blaschke_trace_defect(ctx.moebius)


@check("blaschke_paths", "the Blaschke tensor through Ric* and III", 1e-5)
def blaschke_paths(ctx: EvaluationContext) -> float:
    """Direct Blaschke tensor against the Ricci route, in a g*-orthonormal frame."""
    data = ctx.moebius
    try:
        via_ric = blaschke_from_ricci(data)
    except DimensionTooSmall as e:
        raise CheckSkipped(str(e))
    return float(np.max(np.abs(to_frame(data.blaschke - via_ric, data.frame))))


@check("moebius_lift", "the light-cone lift induces the Moebius metric", 1e-7)
def moebius_lift(ctx: EvaluationContext) -> float:
    """Gram matrix of dF against g*, relative to |g*|."""
    data = ctx.moebius
    scale = max(1.0, float(np.max(np.abs(data.gstar))))
    return moebius_lift_metric_check(ctx.chart, ctx.x) / scale


@check("conformal_gauss", "The conformal Gauss equation", 1e-5)
def conformal_gauss(ctx: EvaluationContext) -> float:
    """R* against beta and psi in a g*-orthonormal frame."""
    return conformal_gauss_defect(ctx.moebius)


@check("star_curvature_paths", "K* by conformal change against K* from a sampled g*", 1e-4)
def star_curvature_paths(ctx: EvaluationContext) -> float:
    """Sectional curvatures of g* on the same planes by both routes."""
    data = ctx.moebius
    try:
        fd = star_curvature_via_fd(ctx.chart, ctx.x, planes=data.sectional.planes,
                                   step=ctx.settings.numerics.fd_high_step)
    except DimensionTooSmall as e:
        raise CheckSkipped(str(e))
    return float(np.max(np.abs(fd.values - data.sectional.values)))


@check("constant_curvature", "constant Moebius sectional curvature c", 1e-5, module="constructions")
def constant_curvature(ctx: EvaluationContext) -> float:
    """max |K* - c| over the sampled planes."""
    target = ctx.target_curvature
    if target is None:
        target = ctx.chart.meta.get("target_curvature")
    if target is None:
        raise CheckSkipped("no target curvature for this chart")
    return float(np.max(np.abs(ctx.moebius.sectional.values - float(target))))


def _closedness(ctx: EvaluationContext):
    step = ctx.settings.numerics.fd_step
    return ctx.memo("closedness", lambda: moebius_form_closedness(ctx.chart, ctx.x, step))


@check("moebius_form_closed", "the Moebius form is closed when K* is constant", 1e-5)
def moebius_form_closed(ctx: EvaluationContext) -> float:
    """|d omega| in a g*-orthonormal frame."""
    return _closedness(ctx).closed_residual


@check("ricci_identity", "d omega = beta(Y, psi X) - beta(X, psi Y)", 1e-4)
def ricci_identity(ctx: EvaluationContext) -> float:
    """d omega against the curvature side of the conformal Codazzi system."""
    return _closedness(ctx).ricci_identity_residual


@check("ricci_equation", "The conformal Ricci equation", 1e-6)
def ricci_equation(ctx: EvaluationContext) -> float:
    """<R^perp(X,Y) xi, eta> against <[B_xi, B_eta] X, Y>*."""
    step = ctx.settings.numerics.fd_step
    return ricci_equation_residual(ctx.chart, ctx.x, step).residual


@check("normal_flatness", "shape operators commute on a flat normal bundle", 1e-9, module="normal-structure")
def normal_flatness(ctx: EvaluationContext) -> float:
    """Largest commutator norm of the shape operators."""
    return normal_bundle_flatness(ctx.fundamental)


@check("sectional_principal_normals", "K(X_i, X_j) = <eta_i, eta_j> in the adapted frame", 1e-8,
       module="normal-structure")
def sectional_principal_normals(ctx: EvaluationContext) -> Measurement:
    """Sectional curvature of adapted-frame planes against principal normal products."""
    pnd = _principal(ctx)
    residual = sectional_vs_principal_normals(ctx.fundamental, pnd)
    return Measurement(residual, warn=pnd.ambiguous, message="grouping ambiguous" if pnd.ambiguous else "")


@check("moebius_normals", "Moebius principal normals: |eta-bar| = 1/n, sum f_i^2 = 1, xi orthonormal", 1e-8,
       module="normal-structure")
def moebius_normals(ctx: EvaluationContext) -> Measurement:
    """Worst of the three identities and the diagonal beta table."""
    pnd = _principal(ctx)
    data = ctx.moebius
    try:
        dec = moebius_normal_decomposition(ctx.chart, ctx.x, pnd, data, ctx.settings.numerics.grouping_tol)
    except StructureMismatch as e:
        raise CheckSkipped(str(e))
    n = data.n
    residual = max(
        abs(dec.eta_bar_norm - 1.0 / n),
        abs(dec.sum_f_squared - 1.0),
        dec.orthogonality_defect,
        dec.table_residual,
    )
    return Measurement(residual, warn=pnd.ambiguous)


@check("kulkarni", "Kulkarni's formula", 1e-5)
def kulkarni(ctx: EvaluationContext) -> float:
    """K*_ij + K*_kl - K*_ik - K*_jl over distinct frame indices."""
    try:
        return kulkarni_defect(ctx.moebius)
    except DimensionTooSmall as e:
        raise CheckSkipped(str(e))


@check("multiplicity_census", "Moore bound and a single principal normal of multiplicity > 1", 0.5,
       module="normal-structure")
def multiplicity_census(ctx: EvaluationContext) -> Measurement:
    """Grouping gap margin, shifted by 1 when a structural bound fails."""
    pnd = _principal(ctx)
    chart = ctx.chart
    moore, single = census_entry(pnd, chart.intrinsic_dim, chart.codim)
    ctx.emit_event("multiplicity_pattern", list(pnd.pattern))
    failed = [name for name, ok in (("moore_bound", moore), ("single_big_group", single)) if not ok]
    margin = pnd.gap_margin
    return Measurement(margin + (1.0 if failed else 0.0), warn=pnd.ambiguous, message=", ".join(failed))


@check("dupin", "the big principal normal is parallel along its eigenspace", 1e-6, module="normal-structure")
def dupin(ctx: EvaluationContext) -> float:
    """|nabla^perp_T eta| over the big group's tangent basis."""
    _principal(ctx)
    numerics = ctx.settings.numerics
    try:
        return dupin_residual(ctx.chart, ctx.x, numerics.grouping_tol, seed=ctx.seed, step=numerics.fd_step)
    except StructureMismatch as e:
        raise CheckSkipped(str(e))
