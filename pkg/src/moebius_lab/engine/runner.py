"""
Scenario runner: builds the chart a scenario describes, samples its grid,
runs the requested checks at every point on a worker pool and assembles the
report. Numeric failures at a point become failed rows, never crashes.
"""
from __future__ import annotations

import csv
import importlib
import io
import itertools
import logging
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

import jax
import numpy as np
import scipy

from moebius_lab.constructions.families import FamilySpec, build_family, spiral_family
from moebius_lab.constructions.frenet import CurveSpec, constant_curvature_curve, integrate_curve
from moebius_lab.constructions.products import product_curve_surface, spiral_product_family
from moebius_lab.constructions.space_forms import Model, SpaceForm
from moebius_lab.constructions.spirals import PROFILES
from moebius_lab.core.chart import ImmersionChart, exact_chart, fd_chart
from moebius_lab.core.errors import ConfigError, MoebiusLabError
from moebius_lab.core.registry import Check, CheckSkipped, get_registry
from moebius_lab.core.results import CheckResult, PointResult, Status, Verdict, verdict_for
from moebius_lab.core.settings import LabSettings, default_settings
from moebius_lab.engine.context import EvaluationContext
from moebius_lab.external.contracts import (
    ChartRef,
    CheckVerdictModel,
    CurveCore,
    Environment,
    FamilyModel,
    PointRow,
    ProductCore,
    Report,
    Scenario,
    SpiralCore,
    load_scenario,
)

logger = logging.getLogger(__name__)

MIN_AXIS_PAD = 0.03
_CURVE_MODELS = {"euclidean": (0, Model.EUCLIDEAN), "sphere": (1, Model.SPHERE), "hyperboloid": (-1, Model.HYPERBOLOID)}


def resolve_chart(ref: ChartRef) -> ImmersionChart:
    """Import ``module:callable`` and wrap it as a chart."""
    module_name, _, attr = ref.target.partition(":")
    try:
        target = getattr(importlib.import_module(module_name), attr)
    except (ImportError, AttributeError) as e:
        raise ConfigError(f"Cannot import chart '{ref.target}': {e}", field="chart.target")
    if ref.factory:
        chart = target(**ref.args)
        if not isinstance(chart, ImmersionChart):
            raise ConfigError(f"Factory '{ref.target}' returned {type(chart).__name__}, not an ImmersionChart",
                              field="chart.target")
        return chart
    if ref.traceable:
        return exact_chart(lambda x, params: target(x), ref.bounds, ref.ambient_dim, ref.target)
    return fd_chart(lambda x: np.asarray(target(x), dtype=float), ref.bounds, ref.ambient_dim, ref.target)


def _family_chart(family: FamilyModel, settings: LabSettings) -> ImmersionChart:
    core = family.core
    frenet = settings.frenet
    integration = {"rtol": frenet.rtol, "atol": frenet.atol, "knot_spacing": frenet.knot_spacing}
    if isinstance(core, SpiralCore):
        profile = PROFILES[core.case]
        if family.kind != profile.family:
            raise ConfigError(f"Spiral case '{core.case.value}' builds a {profile.family}, not a {family.kind}",
                              field="family.kind")
        return spiral_family(core.case, core.params, family.n, family.p, core.domain, family.fiber_bounds,
                             **integration)
    if isinstance(core, CurveCore):
        curvature, model = _CURVE_MODELS[core.ambient]
        space = SpaceForm(curvature, 2, model)
        if model is Model.HYPERBOLOID:
            kappa = float(core.kappa)
            curve = integrate_curve(CurveSpec(space, lambda s: kappa + 0.0 * s, tuple(core.domain), label="curve"),
                                    **integration)
        else:
            curve = constant_curvature_curve(space, core.kappa, tuple(core.domain), label="curve")
        return build_family(FamilySpec(family.kind, curve, family.n, family.p, family.p - 1,
                                       fiber_bounds=family.fiber_bounds))
    if isinstance(core, ProductCore):
        if family.kind != "cylinder":
            raise ConfigError("product_curves cores only build cylinders", field="family.kind")
        if core.c is not None:
            return spiral_product_family(core.c, core.r, family.n, tuple(core.domain1), tuple(core.domain2),
                                         **integration)
        return product_curve_surface(core.kappa1, core.kappa2, tuple(core.domain1), tuple(core.domain2),
                                     n=family.n, fiber_bounds=family.fiber_bounds, **integration)
    inner = resolve_chart(core)
    ell = family.ell if family.ell is not None else family.p - inner.intrinsic_dim
    return build_family(FamilySpec(family.kind, inner, family.n, family.p, ell, fiber_bounds=family.fiber_bounds))


def chart_from_scenario(scenario: Scenario, settings: LabSettings | None = None) -> tuple[ImmersionChart, float | None]:
    """(chart, target K*) for a scenario; construction problems become ConfigError."""
    settings = settings or default_settings()
    try:
        if scenario.chart is not None:
            chart = resolve_chart(scenario.chart)
            target = scenario.chart.target_curvature
        else:
            chart = _family_chart(scenario.family, settings)
            target = None
    except ConfigError:
        raise
    except MoebiusLabError as e:
        raise ConfigError(f"Scenario '{scenario.name}' does not describe a valid chart:\n{e}",
                          field="chart" if scenario.chart is not None else "family")
    if scenario.target_curvature is not None:
        target = scenario.target_curvature
    elif target is None:
        target = chart.meta.get("target_curvature")
    return chart, target


def grid_points(chart: ImmersionChart, counts: int | Sequence[int], margin: float, max_points: int) -> list[np.ndarray]:
    """Tensor grid inside the chart domain, each axis padded by max(margin * width, MIN_AXIS_PAD)."""
    dim = chart.intrinsic_dim
    counts = [counts] * dim if isinstance(counts, int) else list(counts)
    if len(counts) != dim:
        raise ConfigError(f"grid.samples_per_axis has {len(counts)} entries, chart has {dim} axes",
                          field="grid.samples_per_axis")
    total = int(np.prod(counts))
    if total > max_points:
        raise ConfigError(f"Grid has {total} points, above the cap of {max_points}", field="grid.max_points")
    axes = []
    for lo, hi, count in zip(chart.domain.lower, chart.domain.upper, counts):
        pad = max(margin * (hi - lo), MIN_AXIS_PAD)
        if hi - lo <= 2 * pad:
            raise ConfigError(f"Axis [{lo}, {hi}] is too narrow for a margin of {pad:.3g}", field="grid.margin")
        axes.append(np.array([0.5 * (lo + hi)]) if count == 1 else np.linspace(lo + pad, hi - pad, count))
    return [np.array(point) for point in itertools.product(*axes)]


def scenario_grid(chart: ImmersionChart, scenario: Scenario, settings: LabSettings) -> list[np.ndarray]:
    """Grid of a scenario, falling back to the lab settings per field."""
    grid, defaults = scenario.grid, settings.grid
    return grid_points(
        chart,
        grid.samples_per_axis if grid.samples_per_axis is not None else defaults.samples_per_axis,
        grid.margin if grid.margin is not None else defaults.margin,
        grid.max_points if grid.max_points is not None else defaults.max_points,
    )


@dataclass(frozen=True)
class PlannedCheck:
    check: Check
    tolerance: float


def plan_checks(scenario: Scenario, settings: LabSettings, overrides: Mapping[str, float] | None = None) -> list[PlannedCheck]:
    """Tolerance precedence: registry default, lab settings, scenario, command line."""
    registry = get_registry()
    overrides = dict(overrides or {})
    unknown = [name for name in overrides if not registry.has_check(name)]
    if unknown:
        raise ConfigError(f"--tol names unknown checks: {', '.join(unknown)}", field="tol")
    planned = []
    for request in scenario.check_requests():
        check = registry.get_check(request.name)
        tol = settings.tolerances.get(check.name, check.default_tol)
        if request.tol is not None:
            tol = request.tol
        tol = overrides.get(check.name, tol)
        planned.append(PlannedCheck(check, float(tol)))
    return planned


def evaluate_point(chart: ImmersionChart, x: np.ndarray, index: int, plan: Sequence[PlannedCheck],
                   settings: LabSettings, seed: int, target: float | None) -> PointResult:
    ctx = EvaluationContext(chart, x, index, seed, settings, target_curvature=target)
    axis = chart.meta.get("curve_axis")
    result = PointResult(index=index, point=[float(v) for v in x],
                         s=float(x[axis]) if axis is not None else None)
    try:
        data = ctx.moebius
        result.rho = float(data.rho)
        result.kstar_min = data.sectional.minimum
        result.kstar_max = data.sectional.maximum
    except MoebiusLabError as e:
        # checks reading ctx.moebius re-raise the cached error; the rest still run
        logger.warning("Point %d of '%s' has no Moebius data: %s", index, chart.label, e)
        result.error = f"{type(e).__name__}: {e}"
    for planned in plan:
        name = planned.check.name
        try:
            measured = planned.check.run(ctx)
        except CheckSkipped as e:
            result.checks[name] = CheckResult(name, Status.SKIP, planned.tolerance, message=str(e))
            continue
        except MoebiusLabError as e:
            logger.warning("Check %s failed at point %d: %s", name, index, e)
            result.checks[name] = CheckResult(name, Status.ERROR, planned.tolerance,
                                              message=f"{type(e).__name__}: {e}")
            continue
        residual = float(measured.residual)
        if not np.isfinite(residual) or residual > planned.tolerance:
            status = Status.FAIL
        elif measured.warn:
            status = Status.WARN
        else:
            status = Status.PASS
        result.checks[name] = CheckResult(name, status, planned.tolerance, residual, measured.message)
    result.events = [{"type": e["type"], "payload": e["payload"]} for e in ctx.flush_events()]
    return result


def _row(result: PointResult) -> PointRow:
    return PointRow(
        point_index=result.index,
        point=result.point,
        s=result.s,
        rho=result.rho,
        kstar_min=result.kstar_min,
        kstar_max=result.kstar_max,
        residuals={name: r.residual for name, r in result.checks.items()},
        statuses={name: r.status.value for name, r in result.checks.items()},
        messages={name: r.message for name, r in result.checks.items() if r.message},
        error=result.error,
        events=result.events,
    )


def _verdict_model(verdict: Verdict) -> CheckVerdictModel:
    return CheckVerdictModel(check=verdict.check, status=verdict.status.value, tolerance=verdict.tolerance,
                             worst_residual=verdict.worst_residual, counts=verdict.counts)


def _environment(seed: int) -> Environment:
    from moebius_lab import __version__

    return Environment(
        version=__version__,
        seed=seed,
        numpy=np.__version__,
        jax=jax.__version__,
        scipy=scipy.__version__,
        generated_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


def run_scenario_model(scenario: Scenario, jobs: int | None = None, tol_overrides: Mapping[str, float] | None = None,
                       settings: LabSettings | None = None) -> tuple[Report, ImmersionChart]:
    settings = settings or default_settings()
    chart, target = chart_from_scenario(scenario, settings)
    plan = plan_checks(scenario, settings, tol_overrides)
    points = scenario_grid(chart, scenario, settings)
    jobs = max(1, jobs or settings.runner.jobs)
    logger.info("Running '%s' on %s: %d points, %d checks, %d jobs",
                scenario.name, chart.label, len(points), len(plan), jobs)

    def task(item):
        index, x = item
        return evaluate_point(chart, x, index, plan, settings, scenario.seed, target)

    if jobs == 1:
        results = [task(item) for item in enumerate(points)]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(task, enumerate(points)))
    results.sort(key=lambda r: r.index)

    verdicts = [
        verdict_for(p.check.name, p.tolerance, [r.checks[p.check.name] for r in results])
        for p in plan
    ]
    for v in verdicts:
        log = logger.warning if v.status is Status.FAIL else logger.info
        log("Check %-28s %-5s worst %s (tol %.1e)", v.check, v.status.value,
            "n/a" if v.worst_residual is None else f"{v.worst_residual:.3e}", v.tolerance)
    report = Report(
        scenario=scenario.model_dump(mode="json"),
        label=chart.label,
        rows=[_row(r) for r in results],
        verdicts=[_verdict_model(v) for v in verdicts],
        environment=_environment(scenario.seed),
        passed=all(v.status is not Status.FAIL for v in verdicts),
    )
    return report, chart


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def profile_csv(report: Report) -> str:
    """point_index,s,rho,kstar_min,kstar_max followed by one residual column per check."""
    checks = [v.check for v in report.verdicts]
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["point_index", "s", "rho", "kstar_min", "kstar_max", *checks])

    def cell(value):
        return "" if value is None else format(value, ".17g")

    for row in report.rows:
        writer.writerow([row.point_index, cell(row.s), cell(row.rho), cell(row.kstar_min), cell(row.kstar_max),
                         *(cell(row.residuals.get(name)) for name in checks)])
    return buffer.getvalue()


def write_outputs(report: Report, chart: ImmersionChart, prefix: str | Path) -> list[Path]:
    """Write ``<prefix>.report.json`` and, for curve-based families, ``<prefix>.profile.csv``."""
    prefix = Path(prefix)
    written = []
    report_path = prefix.parent / f"{prefix.name}.report.json"
    _atomic_write(report_path, report.to_json())
    written.append(report_path)
    if chart.meta.get("curve_axis") is not None:
        profile_path = prefix.parent / f"{prefix.name}.profile.csv"
        _atomic_write(profile_path, profile_csv(report))
        written.append(profile_path)
    return written


def run_scenario(path: str | Path, out: str | Path | None = None, jobs: int | None = None,
                 tol_overrides: Mapping[str, float] | None = None,
                 settings: LabSettings | None = None) -> Report:
    """Load, run and write a scenario file; returns the report."""
    scenario = load_scenario(path)
    report, chart = run_scenario_model(scenario, jobs, tol_overrides, settings)
    prefix = out or scenario.output or Path.cwd() / scenario.name
    for written in write_outputs(report, chart, prefix):
        logger.info("Wrote %s", written)
    return report


def exit_status(report: Report) -> int:
    return 0 if report.passed else 1
