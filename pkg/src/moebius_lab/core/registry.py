"""Check Registry - central discovery for all residual checks"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List


class CheckSkipped(Exception):
    """Raised by a check that does not apply at the point (dimension, pattern, missing reference)"""


@dataclass(frozen=True)
class Measurement:
    """What a check function hands back: the residual and whether it is only advisory"""
    residual: float
    warn: bool = False
    message: str = ""


@dataclass(frozen=True)
class Check:
    """A registered residual check"""
    name: str
    fn: Callable
    anchor: str
    description: str
    default_tol: float
    module: str = "moebius-invariants"
    exact_only: bool = False

    def run(self, ctx) -> Measurement:
        out = self.fn(ctx)
        if isinstance(out, Measurement):
            return out
        return Measurement(residual=float(out))


@dataclass
class CheckMetadata:
    """Check metadata for listings"""
    name: str
    anchor: str
    description: str
    default_tol: float
    module: str
    tags: List[str] = field(default_factory=list)


class CheckRegistry:
    """Registry for all checks"""

    def __init__(self):
        self._checks: Dict[str, Check] = {}
        self._metadata: Dict[str, CheckMetadata] = {}

    def register(self, check: Check):
        """Register a check; names are unique"""
        if check.name in self._checks:
            raise ValueError(f"Check '{check.name}' is already registered")
        self._checks[check.name] = check
        self._metadata[check.name] = CheckMetadata(
            name=check.name,
            anchor=check.anchor,
            description=check.description,
            default_tol=check.default_tol,
            module=check.module,
            tags=["exact-only"] if check.exact_only else [],
        )

    def get_check(self, name: str) -> Check:
        """Get check by name"""
        if name not in self._checks:
            raise KeyError(f"Unknown check '{name}'. Registered: {', '.join(self.names())}")
        return self._checks[name]

    def has_check(self, name: str) -> bool:
        """Check if a check exists"""
        return name in self._checks

    def names(self) -> List[str]:
        return list(self._checks)

    def list_checks(self) -> List[CheckMetadata]:
        """List all checks in registration order"""
        return list(self._metadata.values())

    def __len__(self) -> int:
        return len(self._checks)


_registry = CheckRegistry()


def get_registry() -> CheckRegistry:
    """Get global registry (importing the engine populates it)"""
    import moebius_lab.engine.checks  # noqa: F401

    return _registry


def check(name: str, anchor: str, default_tol: float, module: str = "moebius-invariants",
          exact_only: bool = False):
    """Register the decorated function ``fn(ctx) -> float | Measurement`` as a check"""
    def decorator(fn: Callable) -> Callable:
        description = (fn.__doc__ or "").strip().splitlines()[0] if fn.__doc__ else name
        _registry.register(Check(name=name, fn=fn, anchor=anchor, description=description,
                                 default_tol=default_tol, module=module, exact_only=exact_only))
        return fn
    return decorator
