"""Curvature spirals: the six first-curvature profiles giving constant Moebius curvature.

Each case fixes the space form the curve lives in, the family that turns it
into a submanifold, and the Moebius curvature ``c`` the family ends up with.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping

import jax.numpy as jnp
import numpy as np

from moebius_lab.core.errors import ParamOutOfRange


class SpiralCase(str, Enum):
    FLAT_C0 = "flat_c0"
    FLAT_CNEG = "flat_cneg"
    SPHERE_CNEG = "sphere_cneg"
    HYP_CPOS = "hyp_cpos"
    HYP_CNEG = "hyp_cneg"
    HYP_C0 = "hyp_c0"


@dataclass(frozen=True)
class SpiralProfile:
    """Where a spiral lives and what it produces."""

    case: SpiralCase
    ambient_curvature: int
    family: str
    default_domain: tuple[float, float]
    admissible: tuple[float, float]
    formula: str


PROFILES: dict[SpiralCase, SpiralProfile] = {
    SpiralCase.FLAT_C0: SpiralProfile(SpiralCase.FLAT_C0, 0, "cylinder", (-1.0, 1.0), (-np.inf, np.inf), "1/r"),
    SpiralCase.FLAT_CNEG: SpiralProfile(SpiralCase.FLAT_CNEG, 0, "cylinder", (0.5, 3.0), (0.0, np.inf),
                                        "1/(sqrt(-c) s)"),
    SpiralCase.SPHERE_CNEG: SpiralProfile(SpiralCase.SPHERE_CNEG, 1, "generalized_cone", (0.6, 2.5), (0.0, np.pi),
                                          "1/(sqrt(-c) sin s)"),
    SpiralCase.HYP_CPOS: SpiralProfile(SpiralCase.HYP_CPOS, -1, "rotational", (-1.0, 1.0), (-np.inf, np.inf),
                                       "1/(sqrt(c) cosh s)"),
    SpiralCase.HYP_CNEG: SpiralProfile(SpiralCase.HYP_CNEG, -1, "rotational", (0.5, 2.0), (0.0, np.inf),
                                       "1/(sqrt(-c) sinh s)"),
    SpiralCase.HYP_C0: SpiralProfile(SpiralCase.HYP_C0, -1, "rotational", (-1.0, 0.5), (-np.inf, np.inf), "e^s"),
}


def _param(params: Mapping[str, float], name: str, case: SpiralCase) -> float:
    if name not in params:
        raise ParamOutOfRange(f"Spiral case '{case.value}' needs parameter '{name}'")
    return float(params[name])


def moebius_curvature_of(case: SpiralCase | str, params: Mapping[str, float]) -> float:
    """The constant Moebius curvature produced by the case with these parameters."""
    case = SpiralCase(case)
    if case in (SpiralCase.FLAT_C0, SpiralCase.HYP_C0):
        return 0.0
    return _param(params, "c", case)


def spiral_kappa(case: SpiralCase | str, params: Mapping[str, float] | None = None) -> Callable:
    """First curvature kappa(s) of the case as a ``jax.numpy`` scalar function.

    - flat_c0: 1/r, r > 0
    - flat_cneg: 1/(sqrt(-c) s), c < 0, s > 0
    - sphere_cneg: 1/(sqrt(-c) sin s), c < 0, s in (0, pi)
    - hyp_cpos: 1/(sqrt(c) cosh s), c > 0
    - hyp_cneg: 1/(sqrt(-c) sinh s), c < 0, s > 0
    - hyp_c0: e^s
    """
    try:
        case = SpiralCase(case)
    except ValueError:
        allowed = ", ".join(c.value for c in SpiralCase)
        raise ParamOutOfRange(f"Unknown spiral case '{case}'. Allowed: {allowed}")
    params = dict(params or {})
    if case is SpiralCase.FLAT_C0:
        r = _param(params, "r", case)
        if not r > 0:
            raise ParamOutOfRange(f"flat_c0 needs r > 0, got r={r}")
        return lambda s: 1.0 / r + 0.0 * s
    if case is SpiralCase.HYP_C0:
        return lambda s: jnp.exp(s)
    c = _param(params, "c", case)
    if case is SpiralCase.HYP_CPOS:
        if not c > 0:
            raise ParamOutOfRange(f"hyp_cpos needs c > 0, got c={c}")
        root = np.sqrt(c)
        return lambda s: 1.0 / (root * jnp.cosh(s))
    if not c < 0:
        raise ParamOutOfRange(f"{case.value} needs c < 0, got c={c}")
    root = np.sqrt(-c)
    if case is SpiralCase.FLAT_CNEG:
        return lambda s: 1.0 / (root * s)
    if case is SpiralCase.SPHERE_CNEG:
        return lambda s: 1.0 / (root * jnp.sin(s))
    return lambda s: 1.0 / (root * jnp.sinh(s))


def check_spiral_domain(case: SpiralCase | str, domain: tuple[float, float]) -> tuple[float, float]:
    """Reject domains that leave the case's admissible arclength range."""
    profile = PROFILES[SpiralCase(case)]
    lo, hi = profile.admissible
    a, b = (float(v) for v in domain)
    if not (lo < a < b < hi):
        raise ParamOutOfRange(
            f"Spiral case '{profile.case.value}' ({profile.formula}) needs arclength in ({lo}, {hi}), "
            f"got [{a}, {b}]"
        )
    return a, b
