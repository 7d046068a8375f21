"""External contracts - JSON schemas for scenario files and reports"""
from moebius_lab.external.contracts import (
    CheckRequest,
    ChartRef,
    FamilyModel,
    GridModel,
    Report,
    Scenario,
    load_scenario,
    parse_scenario,
)

__all__ = [
    "CheckRequest",
    "ChartRef",
    "FamilyModel",
    "GridModel",
    "Report",
    "Scenario",
    "load_scenario",
    "parse_scenario",
]
