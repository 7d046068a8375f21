"""Exception hierarchy for the lab.

Every error raised on purpose by the package derives from ``MoebiusLabError`` so
callers (the scenario runner in particular) can turn numeric failures at one
point into a failed row instead of a crash.
"""


class MoebiusLabError(Exception):
    """Base class for all lab errors"""


class DomainViolation(MoebiusLabError):
    """Point outside the chart domain, or too close to its boundary for a stencil"""


class RankDeficient(MoebiusLabError):
    """The differential of the chart lost rank (not an immersion at the point)"""


class UmbilicPoint(MoebiusLabError):
    """rho vanishes (up to the umbilic threshold) where a Moebius quantity needs rho > 0"""


class DimensionTooSmall(MoebiusLabError):
    """The operation is undefined for the intrinsic dimension at hand"""


class NotFlat(MoebiusLabError):
    """Shape operators do not commute: the normal bundle is not flat at the point"""


class GroupingAmbiguous(MoebiusLabError):
    """Two candidate principal normals are neither clearly equal nor clearly distinct"""

    def __init__(self, message: str, groupings: list | None = None):
        super().__init__(message)
        self.groupings = groupings or []


class StructureMismatch(MoebiusLabError):
    """The multiplicity pattern required by an adapted-frame operation is absent"""


class DegenerateFi(MoebiusLabError):
    """Some f_i of the Moebius normal decomposition vanishes"""


class IntegrationFailure(MoebiusLabError):
    """The Frenet integrator did not reach the requested tolerance"""


class ParamOutOfRange(MoebiusLabError):
    """Curvature-spiral parameters outside the admissible range of the case"""


class SpecInvalid(MoebiusLabError):
    """A family description violates its dimension bookkeeping"""


class ConfigError(MoebiusLabError):
    """A scenario or settings file failed validation"""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        super().__init__(message)
        self.field = field
        self.line = line
