"""Lab-wide settings loaded from YAML."""

from __future__ import annotations

import logging
import os
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Dict

import yaml
from pydantic import BaseModel, Field, ValidationError

from moebius_lab.core.errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = resources.files("moebius_lab") / "configs" / "default.yaml"
CONFIG_ENV = "MOEBIUS_LAB_CONFIG"
JOBS_ENV = "MOEBIUS_LAB_JOBS"


class NumericsSettings(BaseModel):
    fd_step: float = Field(default=1e-3, gt=0, description="Base finite-difference step (orders 1-2)")
    fd_high_step: float = Field(default=5e-3, gt=0, description="Finite-difference step for orders 3-4")
    umbilic_threshold: float = Field(default=1e-12, ge=0, description="rho^2 at or below this is umbilic")
    grouping_tol: float = Field(default=1e-6, gt=0, description="Principal normal grouping tolerance, relative")
    random_planes: int = Field(default=10, ge=0, description="Random g*-orthonormal planes per point")


class FrenetSettings(BaseModel):
    rtol: float = Field(default=1e-12, gt=0)
    atol: float = Field(default=1e-14, gt=0)
    knot_spacing: float = Field(default=0.25, gt=0, description="Arclength between constraint projections")


class GridSettings(BaseModel):
    samples_per_axis: int = Field(default=5, ge=1)
    margin: float = Field(default=0.05, ge=0, description="Fraction of each axis kept clear of the boundary")
    max_points: int = Field(default=5000, ge=1)


class RunnerSettings(BaseModel):
    jobs: int = Field(default=1, ge=1)


class LabSettings(BaseModel):
    numerics: NumericsSettings = Field(default_factory=NumericsSettings)
    frenet: FrenetSettings = Field(default_factory=FrenetSettings)
    grid: GridSettings = Field(default_factory=GridSettings)
    runner: RunnerSettings = Field(default_factory=RunnerSettings)
    tolerances: Dict[str, float] = Field(default_factory=dict)


def load_settings(path: str | Path | None = None) -> LabSettings:
    """Read settings from ``path``, ``$MOEBIUS_LAB_CONFIG`` or the bundled defaults."""
    candidate = path or os.environ.get(CONFIG_ENV)
    config_path = Path(candidate) if candidate else DEFAULT_CONFIG
    if not config_path.is_file():
        if candidate:
            raise ConfigError(f"Settings file not found: {config_path}")
        logger.warning("Bundled settings %s are missing; using built-in defaults", config_path)
        raw = {}
    else:
        try:
            raw = yaml.safe_load(config_path.read_text()) or {}
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            raise ConfigError(f"Invalid YAML in {config_path}: {e}", line=mark.line + 1 if mark else None)
    try:
        settings = LabSettings.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        field_path = ".".join(str(part) for part in first["loc"])
        raise ConfigError(f"Invalid settings in {config_path} at '{field_path}': {first['msg']}", field=field_path)
    jobs = os.environ.get(JOBS_ENV)
    if jobs:
        try:
            settings.runner.jobs = max(1, int(jobs))
        except ValueError:
            raise ConfigError(f"{JOBS_ENV} must be an integer, got '{jobs}'", field=JOBS_ENV)
    return settings


@lru_cache(maxsize=1)
def default_settings() -> LabSettings:
    return load_settings()
