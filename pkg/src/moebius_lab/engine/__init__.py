"""Engine: checks and the scenario runner."""
from moebius_lab.engine.runner import run_scenario, run_scenario_model

__all__ = ["run_scenario", "run_scenario_model"]
