"""Comprehensive Presentation - verdicts, curvature ranges and every failing point."""
from moebius_lab.core.registry import get_registry
from moebius_lab.presentations.base import Presentation

MAX_LISTED_POINTS = 20


class ComprehensivePresentation(Presentation):

    def render_text(self) -> str:
        report = self.report
        registry = get_registry()
        rhos = [r.rho for r in report.rows if r.rho is not None]
        kmins = [r.kstar_min for r in report.rows if r.kstar_min is not None]
        kmaxs = [r.kstar_max for r in report.rows if r.kstar_max is not None]
        lines = [
            "=" * 80,
            f"SCENARIO: {report.scenario.get('name')}",
            f"Chart: {report.label}",
            f"Points: {len(report.rows)}  Seed: {report.environment.seed}  Version: {report.environment.version}",
            "",
            "CURVATURE:",
            f"  rho   in [{self._fmt(min(rhos, default=None))}, {self._fmt(max(rhos, default=None))}]",
            f"  K*    in [{self._fmt(min(kmins, default=None))}, {self._fmt(max(kmaxs, default=None))}]",
            "",
            "CHECKS:",
        ]
        for v in report.verdicts:
            anchor = registry.get_check(v.check).anchor if registry.has_check(v.check) else ""
            counts = ", ".join(f"{k}={n}" for k, n in sorted(v.counts.items()) if n)
            lines.append(f"  {v.check}: {v.status}  worst {self._fmt(v.worst_residual)}  tol {v.tolerance:.1e}")
            lines.append(f"    {anchor}  [{counts}]")
        lines += ["", "FAILING POINTS:"]
        lines += self._failures() or ["  none"]
        lines += ["", f"RESULT: {'PASS' if report.passed else 'FAIL'}", "=" * 80]
        return "\n".join(lines)

    def render_json(self) -> dict:
        return self.report.model_dump(mode="json")

    def _failures(self) -> list[str]:
        lines = []
        for row in self.report.rows:
            bad = [name for name, status in row.statuses.items() if status in ("fail", "error")]
            if not bad and row.error is None:
                continue
            if len(lines) >= MAX_LISTED_POINTS:
                lines.append("  ...")
                break
            where = ", ".join(f"{v:.4g}" for v in row.point)
            detail = row.error or ", ".join(
                f"{name}={self._fmt(row.residuals.get(name))}" + (f" ({row.messages[name]})" if name in row.messages else "")
                for name in bad
            )
            lines.append(f"  #{row.point_index} ({where}): {detail}")
        return lines
