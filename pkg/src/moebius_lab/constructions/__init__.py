"""Families with known Moebius geometry and the criteria they are built from."""

from moebius_lab.constructions.families import FamilySpec, ProductCore, build_family, spiral_family
from moebius_lab.constructions.frenet import CurveSpec, frenet_curve, integrate_curve
from moebius_lab.constructions.space_forms import Model, SpaceForm
from moebius_lab.constructions.spirals import SpiralCase, spiral_kappa
from moebius_lab.constructions.theta import theta_cone, theta_rotational

__all__ = [
    "CurveSpec",
    "FamilySpec",
    "Model",
    "ProductCore",
    "SpaceForm",
    "SpiralCase",
    "build_family",
    "frenet_curve",
    "integrate_curve",
    "spiral_family",
    "spiral_kappa",
    "theta_cone",
    "theta_rotational",
]
