"""Result types for scenario execution."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List


class Status(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    WARN = "warn"
    SKIP = "skip"
    ERROR = "error"


@dataclass
class CheckResult:
    """Outcome of one check at one point"""
    check: str
    status: Status
    tolerance: float
    residual: float | None = None
    message: str = ""


@dataclass
class PointResult:
    """Everything computed at one grid point"""
    index: int
    point: List[float]
    s: float | None = None
    rho: float | None = None
    kstar_min: float | None = None
    kstar_max: float | None = None
    checks: Dict[str, CheckResult] = field(default_factory=dict)
    error: str | None = None
    events: List[dict] = field(default_factory=list)


@dataclass
class Verdict:
    """Aggregate of one check over the grid"""
    check: str
    status: Status
    tolerance: float
    worst_residual: float | None
    counts: Dict[str, int] = field(default_factory=dict)


def verdict_for(check: str, tolerance: float, results: List[CheckResult]) -> Verdict:
    """fail beats warn beats pass; a check that never applied is skip."""
    counts = {s.value: 0 for s in Status}
    for r in results:
        counts[r.status.value] += 1
    residuals = [r.residual for r in results if r.residual is not None]
    worst = max(residuals) if residuals else None
    if counts["fail"] or counts["error"]:
        status = Status.FAIL
    elif counts["warn"]:
        status = Status.WARN
    elif counts["pass"]:
        status = Status.PASS
    else:
        status = Status.SKIP
    return Verdict(check=check, status=status, tolerance=tolerance, worst_residual=worst, counts=counts)
