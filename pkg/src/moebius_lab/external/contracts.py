"""Formal JSON contracts for scenario files and reports.

These define the exact structure of the scenario files the runner accepts and
of the report it writes. ``load_scenario`` turns JSON and schema problems into
``ConfigError`` with the offending line or dotted field path.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from moebius_lab.constructions.spirals import SpiralCase
from moebius_lab.core.errors import ConfigError
from moebius_lab.core.registry import get_registry

Interval = tuple[float, float]


class SpiralCore(BaseModel):
    """Curvature spiral of one of the six cases, integrated in its space form"""
    model_config = ConfigDict(extra="forbid")

    type: Literal["spiral"] = Field(description="Core type identifier")
    case: SpiralCase = Field(description="Spiral case", examples=["flat_cneg", "hyp_cpos"])
    params: dict[str, float] = Field(
        default_factory=dict,
        description="Case parameters: r for flat_c0, c for the others",
        examples=[{"c": -1.0}, {"r": 2.0}],
    )
    domain: Interval | None = Field(default=None, description="Arclength interval; the case default when omitted")


class CurveCore(BaseModel):
    """Constant-curvature curve in a two-dimensional space form"""
    model_config = ConfigDict(extra="forbid")

    type: Literal["curve"] = Field(description="Core type identifier")
    ambient: Literal["euclidean", "sphere", "hyperboloid"] = Field(description="Model of the space form")
    kappa: float = Field(description="Constant first curvature", examples=[0.5, 1.0])
    domain: Interval = Field(description="Arclength interval", examples=[[-1.0, 1.0]])


class ProductCore(BaseModel):
    """gamma1 x gamma2 in R^4: constant curvatures, or the spiral pairing when c is given"""
    model_config = ConfigDict(extra="forbid")

    type: Literal["product_curves"] = Field(description="Core type identifier")
    c: float | None = Field(default=None, lt=0, description="Target curvature of the spiral pairing")
    r: float = Field(default=1.0, gt=0, description="Radius parameter of the spiral pairing")
    kappa1: float | None = Field(default=None, description="Constant curvature of gamma1")
    kappa2: float | None = Field(default=None, description="Constant curvature of gamma2")
    domain1: Interval = Field(default=(0.3, 0.8), description="Arclength interval of gamma1")
    domain2: Interval = Field(default=(-1.0, 1.0), description="Arclength interval of gamma2")

    @model_validator(mode="after")
    def _curvatures(self):
        if self.c is None and (self.kappa1 is None or self.kappa2 is None):
            raise ValueError("product_curves needs either c (spiral pairing) or both kappa1 and kappa2")
        return self


class ChartRef(BaseModel):
    """External chart given as module:callable"""
    model_config = ConfigDict(extra="forbid")

    type: Literal["chart"] = Field(default="chart", description="Core type identifier")
    target: str = Field(
        description="Import path 'module:callable'",
        examples=["moebius_lab.constructions.controls:ellipsoid_cross_line"],
    )
    factory: bool = Field(default=False, description="The callable returns an ImmersionChart when called with args")
    args: dict[str, Any] = Field(default_factory=dict, description="Keyword arguments for a factory")
    traceable: bool = Field(default=True, description="Map written with jax.numpy (exact jets); else finite differences")
    bounds: list[Interval] | None = Field(default=None, description="Domain box of a point map")
    ambient_dim: int | None = Field(default=None, ge=2, description="Ambient dimension of a point map")
    target_curvature: float | None = Field(default=None, description="Expected constant K*, if any")

    @field_validator("target")
    @classmethod
    def _import_path(cls, value: str) -> str:
        module, _, attr = value.partition(":")
        if not module or not attr:
            raise ValueError(f"target must look like 'package.module:callable', got '{value}'")
        return value

    @model_validator(mode="after")
    def _point_map_needs_box(self):
        if not self.factory and (self.bounds is None or self.ambient_dim is None):
            raise ValueError("a point-map chart needs bounds and ambient_dim")
        return self


Core = Annotated[Union[SpiralCore, CurveCore, ProductCore, ChartRef], Field(discriminator="type")]


class FamilyModel(BaseModel):
    """Cylinder, generalized cone or rotational submanifold over a core"""
    model_config = ConfigDict(extra="forbid")

    kind: Literal["cylinder", "generalized_cone", "rotational"] = Field(
        description="Family type", examples=["cylinder"]
    )
    n: int = Field(ge=2, description="Dimension of the submanifold", examples=[2, 5])
    p: int = Field(default=1, ge=1, description="Codimension")
    ell: int | None = Field(default=None, ge=0, description="Defaults to p minus the core dimension")
    core: Core = Field(description="What the family is built over")
    fiber_bounds: list[Interval] | None = Field(default=None, description="Domain of the fiber coordinates")


class GridModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    samples_per_axis: int | list[int] | None = Field(default=None, description="One count, or one per axis")
    margin: float | None = Field(default=None, ge=0, lt=0.5, description="Fraction of each axis kept clear")
    max_points: int | None = Field(default=None, ge=1, description="Cap on the total number of points")

    @field_validator("samples_per_axis")
    @classmethod
    def _positive(cls, value):
        counts = value if isinstance(value, list) else [value] if value is not None else []
        if any(c < 1 for c in counts):
            raise ValueError("sample counts must be >= 1")
        return value


class CheckRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = Field(description="Registered check name", examples=["conformal_gauss"])
    tol: float | None = Field(default=None, gt=0, description="Tolerance override")


class Scenario(BaseModel):
    """Contract for a scenario file

    Example:
        {"name": "flat_cylinder",
         "family": {"kind": "cylinder", "n": 2, "p": 1,
                    "core": {"type": "spiral", "case": "flat_c0", "params": {"r": 2.0}}},
         "checks": ["beta_norm", {"name": "constant_curvature", "tol": 1e-6}],
         "seed": 7}
    """
    model_config = ConfigDict(extra="forbid")

    name: str = Field(description="Scenario name", examples=["spiral_cneg"])
    description: str = Field(default="", description="Free text")
    family: FamilyModel | None = Field(default=None, description="Built-in family")
    chart: ChartRef | None = Field(default=None, description="External chart, instead of a family")
    grid: GridModel = Field(default_factory=GridModel, description="Sample grid")
    checks: list[Union[str, CheckRequest]] = Field(description="Checks to run", min_length=1)
    seed: int = Field(default=0, ge=0, description="Seed of every random stream")
    output: str | None = Field(default=None, description="Output path prefix")
    target_curvature: float | None = Field(default=None, description="Expected constant K*")

    @model_validator(mode="after")
    def _one_source(self):
        if (self.family is None) == (self.chart is None):
            raise ValueError("give exactly one of 'family' and 'chart'")
        return self

    @field_validator("checks")
    @classmethod
    def _registered(cls, value):
        registry = get_registry()
        unknown = [c if isinstance(c, str) else c.name for c in value]
        unknown = [name for name in unknown if not registry.has_check(name)]
        if unknown:
            raise ValueError(f"unknown checks {unknown}; registered: {', '.join(registry.names())}")
        return value

    def check_requests(self) -> list[CheckRequest]:
        return [CheckRequest(name=c) if isinstance(c, str) else c for c in self.checks]


_UNION_TAGS = {"spiral", "curve", "product_curves", "chart", "str", "CheckRequest", "list[int]", "int"}


def _field_path(loc) -> str:
    # Drop the member tags pydantic adds inside unions.
    parts = []
    for i, part in enumerate(loc):
        parent = loc[i - 1] if i else None
        in_union = parent == "core" or parent == "samples_per_axis" or isinstance(parent, int)
        if in_union and part in _UNION_TAGS:
            continue
        parts.append(str(part))
    return ".".join(parts)


def parse_scenario(raw: Any, source: str = "<scenario>") -> Scenario:
    try:
        return Scenario.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        path = _field_path(first["loc"])
        lines = [f"Invalid scenario {source}:"]
        for err in e.errors():
            lines.append(f"  - {_field_path(err['loc']) or '<root>'}: {err['msg']}")
        raise ConfigError("\n".join(lines), field=path or None)


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a JSON scenario file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"Cannot read scenario file {path}: {e}")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in {path} at line {e.lineno}, column {e.colno}: {e.msg}", line=e.lineno)
    return parse_scenario(raw, str(path))


class CheckVerdictModel(BaseModel):
    check: str
    status: Literal["pass", "fail", "warn", "skip"]
    tolerance: float
    worst_residual: float | None = None
    counts: dict[str, int] = Field(default_factory=dict)


class PointRow(BaseModel):
    point_index: int
    point: list[float]
    s: float | None = None
    rho: float | None = None
    kstar_min: float | None = None
    kstar_max: float | None = None
    residuals: dict[str, float | None] = Field(default_factory=dict)
    statuses: dict[str, str] = Field(default_factory=dict)
    messages: dict[str, str] = Field(default_factory=dict)
    error: str | None = None
    events: list[dict[str, Any]] = Field(default_factory=list)


class Environment(BaseModel):
    version: str
    seed: int
    numpy: str
    jax: str
    scipy: str
    generated_at: str = Field(description="UTC timestamp; the only field that differs between identical runs")


class Report(BaseModel):
    """Contract for the report a scenario run writes"""
    scenario: dict[str, Any]
    label: str
    rows: list[PointRow]
    verdicts: list[CheckVerdictModel]
    environment: Environment
    passed: bool = Field(description="True when no check verdict is 'fail'")

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"
