"""
Per-point evaluation context.
Memoizes the expensive pointwise packages so that every check at a point
shares one local geometry, one Moebius package and one principal normal
decomposition.
"""
from __future__ import annotations

import time
from threading import RLock
from typing import Any, Callable, Dict, List

import numpy as np

from moebius_lab.core.chart import ImmersionChart, evaluate_jet
from moebius_lab.core.settings import LabSettings
from moebius_lab.geometry.fundamental import FundamentalData, fundamental_data
from moebius_lab.geometry.moebius import MoebiusData, moebius_data
from moebius_lab.geometry.normal import PrincipalNormalDecomposition, principal_normals


class EvaluationContext:
    """
    Mutable memo for one grid point.

    Example:
        ctx = EvaluationContext(chart, x, index=3, seed=7, settings=settings)
        ctx.moebius.gstar          # computed once
        ctx.memo("closedness", lambda: moebius_form_closedness(chart, x))
    """

    def __init__(self, chart: ImmersionChart, x, index: int, seed: int, settings: LabSettings,
                 target_curvature: float | None = None):
        self.chart = chart
        self.x = np.asarray(x, dtype=float)
        self.index = index
        self.seed = seed
        self.settings = settings
        self.target_curvature = target_curvature
        self._data: Dict[str, Any] = {}
        self._lock = RLock()

    def rng(self, stream: int = 0) -> np.random.Generator:
        """Independent stream derived from (seed, point index, stream)."""
        return np.random.default_rng([self.seed, self.index, stream])

    def memo(self, key: str, factory: Callable[[], Any]) -> Any:
        """Value at key, computing it with ``factory`` the first time. Errors are cached too."""
        with self._lock:
            if key not in self._data:
                try:
                    self._data[key] = (True, factory())
                except Exception as e:
                    self._data[key] = (False, e)
            ok, value = self._data[key]
        if not ok:
            raise value
        return value

    def has(self, key: str) -> bool:
        return key in self._data

    @property
    def fundamental(self) -> FundamentalData:
        return self.memo("fundamental", lambda: fundamental_data(evaluate_jet(self.chart, self.x, 2)))

    @property
    def moebius(self) -> MoebiusData:
        numerics = self.settings.numerics
        return self.memo("moebius", lambda: moebius_data(
            self.chart, self.x, rng=self.rng(1), random_planes=numerics.random_planes,
            umbilic_threshold=numerics.umbilic_threshold,
        ))

    @property
    def principal(self) -> PrincipalNormalDecomposition:
        tol = self.settings.numerics.grouping_tol
        return self.memo("principal", lambda: principal_normals(self.fundamental, tol, self.rng(2)))

    def emit_event(self, type: str, payload: Any) -> None:
        """Record a structured event for the point's report row."""
        event = {"type": type, "ts": time.time(), "payload": payload}
        with self._lock:
            self._data.setdefault("events", (True, []))[1].append(event)

    def flush_events(self) -> List[Dict[str, Any]]:
        """Return and clear pending events."""
        with self._lock:
            events = self._data.pop("events", (True, []))[1]
        return events

    def __repr__(self) -> str:
        keys = [k for k in self._data if k != "events"]
        return f"EvaluationContext(chart={self.chart.label!r}, index={self.index}, keys={keys})"
