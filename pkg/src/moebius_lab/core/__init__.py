"""Moebius lab core components."""

from moebius_lab.core.chart import ExactEvaluator, FiniteDifferenceEvaluator, ImmersionChart, evaluate_jet
from moebius_lab.core.jets import DomainBox, Jet, Point, fd_jet_oracle
from moebius_lab.core.settings import LabSettings, load_settings
