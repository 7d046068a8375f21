"""Brief Presentation - verdict per check and the overall outcome."""
from moebius_lab.presentations.base import Presentation


class BriefPresentation(Presentation):

    def render_text(self) -> str:
        report = self.report
        lines = [
            f"Scenario: {report.scenario.get('name')}  ({report.label})",
            f"Points: {len(report.rows)}  Seed: {report.environment.seed}",
            *self._verdict_lines(),
            f"Result: {'PASS' if report.passed else 'FAIL'}",
        ]
        return "\n".join(lines)

    def render_json(self) -> dict:
        return {
            "scenario": self.report.scenario.get("name"),
            "passed": self.report.passed,
            "verdicts": {v.check: v.status for v in self.report.verdicts},
        }
