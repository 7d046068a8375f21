"""Base Presentation class - defines interface for rendering reports."""
from abc import ABC, abstractmethod

from moebius_lab.external.contracts import Report


class Presentation(ABC):
    """
    Base class for presentations - formats a finished report for people
    (text) or for other tools (JSON-ready dict).
    """

    def __init__(self, report: Report):
        self.report = report

    @abstractmethod
    def render_text(self) -> str:
        """Render the report as terminal text"""
        pass

    @abstractmethod
    def render_json(self) -> dict:
        """Render the report as a JSON-ready dict"""
        pass

    @staticmethod
    def _fmt(value: float | None) -> str:
        return "n/a" if value is None else f"{value:.3e}"

    def _verdict_lines(self) -> list[str]:
        lines = []
        width = max((len(v.check) for v in self.report.verdicts), default=10)
        for v in self.report.verdicts:
            lines.append(f"  {v.check:<{width}}  {v.status:<4}  worst {self._fmt(v.worst_residual)}  "
                         f"tol {v.tolerance:.1e}")
        return lines
