"""Moebius lab: numerical Moebius geometry of submanifolds."""

import jax

# Every residual in the lab is measured against float64 tolerances.
jax.config.update("jax_enable_x64", True)

from moebius_lab.core.chart import ImmersionChart, evaluate_jet, exact_chart, fd_chart  # noqa: E402
from moebius_lab.core.errors import MoebiusLabError  # noqa: E402
from moebius_lab.core.jets import Jet, fd_jet_oracle  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "ImmersionChart",
    "Jet",
    "MoebiusLabError",
    "evaluate_jet",
    "exact_chart",
    "fd_chart",
    "fd_jet_oracle",
]
