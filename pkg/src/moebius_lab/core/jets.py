"""Jets of maps R^n -> R^m and the finite-difference jet oracle.

A jet at a point holds the value and the derivative tensors up to order 4.
Derivative slots beyond ``order`` are zero-filled and reported absent by
``Jet.has``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from moebius_lab.core.errors import DomainViolation

MAX_ORDER = 4

# Central stencils (integer offsets, weights); every one is second-order accurate.
_STENCILS: dict[int, tuple[tuple[int, ...], tuple[float, ...]]] = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}

DEFAULT_STEP = 1e-3
DEFAULT_HIGH_STEP = 5e-3


@dataclass(frozen=True)
class DomainBox:
    """Axis-aligned parameter box ``lower < x < upper``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        upper = np.asarray(self.upper, dtype=float).reshape(-1)
        if lower.size == 0 or lower.shape != upper.shape:
            raise ValueError(
                f"DomainBox bounds must be non-empty vectors of equal length, "
                f"got {lower.shape} and {upper.shape}"
            )
        if not np.all(lower < upper):
            raise ValueError(f"DomainBox requires lower < upper componentwise, got {lower} and {upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def from_bounds(cls, bounds: Sequence[Sequence[float]]) -> "DomainBox":
        """Build from ``[(lo, hi), ...]`` pairs."""
        pairs = np.asarray(bounds, dtype=float)
        return cls(pairs[:, 0], pairs[:, 1])

    @property
    def dim(self) -> int:
        return int(self.lower.size)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def margin_of(self, x: np.ndarray) -> float:
        """Distance from x to the boundary (negative when outside)."""
        return float(np.min(np.minimum(x - self.lower, self.upper - x)))

    def require(self, x: np.ndarray, margin: float = 0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != self.dim:
            raise DomainViolation(f"Point has {x.size} coordinates, chart domain has dimension {self.dim}")
        distance = self.margin_of(x)
        if distance <= margin:
            raise DomainViolation(
                f"Point {x.tolist()} is outside the domain or too near its boundary.\n"
                f"Distance to boundary: {distance:.3g}, required margin: {margin:.3g}\n"
                f"Domain: lower={self.lower.tolist()} upper={self.upper.tolist()}"
            )
        return x


@dataclass(frozen=True)
class Point:
    """Chart coordinates of a sample point."""

    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=float).reshape(-1))


def as_coords(x) -> np.ndarray:
    if isinstance(x, Point):
        return x.coords
    return np.asarray(x, dtype=float).reshape(-1)


@dataclass(frozen=True)
class Jet:
    """Value and derivative tensors of a map at one point.

    ``derivatives[k - 1]`` has shape ``(m,) + (n,) * k``.
    """

    order: int
    value: np.ndarray
    derivatives: tuple[np.ndarray, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 0 <= self.order <= MAX_ORDER:
            raise ValueError(f"Jet order must lie in 0..{MAX_ORDER}, got {self.order}")
        value = np.asarray(self.value, dtype=float).reshape(-1)
        derivs = [np.asarray(d, dtype=float) for d in self.derivatives[: self.order]]
        if derivs:
            n = derivs[0].shape[1]
        else:
            n = 0
        for k in range(len(derivs) + 1, MAX_ORDER + 1):
            derivs.append(np.zeros((value.size,) + (n,) * k))
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "derivatives", tuple(derivs))

    @property
    def ambient_dim(self) -> int:
        return int(self.value.size)

    @property
    def intrinsic_dim(self) -> int:
        return int(self.derivatives[0].shape[1])

    def has(self, k: int) -> bool:
        return 0 <= k <= self.order

    def derivative(self, k: int) -> np.ndarray:
        if k == 0:
            return self.value
        return self.derivatives[k - 1]

    @property
    def d1(self) -> np.ndarray:
        return self.derivatives[0]

    @property
    def d2(self) -> np.ndarray:
        return self.derivatives[1]

    @property
    def d3(self) -> np.ndarray:
        return self.derivatives[2]

    @property
    def d4(self) -> np.ndarray:
        return self.derivatives[3]

    def symmetry_defect(self) -> float:
        """Largest relative asymmetry over the lower indices of d2..d4."""
        worst = 0.0
        for k in range(2, self.order + 1):
            tensor = self.derivative(k)
            scale = max(1.0, float(np.max(np.abs(tensor))))
            for perm in itertools.permutations(range(1, k + 1)):
                swapped = np.transpose(tensor, (0,) + perm)
                worst = max(worst, float(np.max(np.abs(swapped - tensor))) / scale)
        return worst


def _mixed_partial(evaluate, counts: Sequence[int], h: float) -> np.ndarray:
    """Tensor-product central difference for the multi-index ``counts``."""
    axes = [i for i, c in enumerate(counts) if c > 0]
    stencils = [_STENCILS[counts[i]] for i in axes]
    total = None
    for combo in itertools.product(*(range(len(s[0])) for s in stencils)):
        weight = 1.0
        offset = [0] * len(counts)
        for axis, stencil, pick in zip(axes, stencils, combo):
            offset[axis] = stencil[0][pick]
            weight *= stencil[1][pick]
        term = weight * evaluate(tuple(offset), h)
        total = term if total is None else total + term
    return total / h ** sum(counts)


def fd_jet_oracle(
    point_map: Callable[[np.ndarray], np.ndarray],
    x,
    order: int,
    step: float | None = None,
    high_step: float | None = None,
    domain: DomainBox | None = None,
) -> Jet:
    """Finite-difference jet with one Richardson extrapolation level.

    Orders 1 and 2 use ``step``; orders 3 and 4 use ``high_step``. Every stencil
    is central and second-order, so after extrapolation the error is O(h^4) with
    a roundoff floor of roughly eps / h^k for the k-th derivative.
    """
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"FD jet order must lie in 1..{MAX_ORDER}, got {order}")
    step = DEFAULT_STEP if step is None else float(step)
    high_step = DEFAULT_HIGH_STEP if high_step is None else float(high_step)
    x = as_coords(x)
    if domain is not None:
        radius = 4.0 * (high_step if order >= 3 else step)
        domain.require(x, margin=radius)

    cache: dict[tuple, np.ndarray] = {}

    def evaluate(offset: tuple[int, ...], h: float) -> np.ndarray:
        key = (h, offset)
        if key not in cache:
            cache[key] = np.asarray(point_map(x + h * np.asarray(offset, dtype=float)), dtype=float).reshape(-1)
        return cache[key]

    value = evaluate((0,) * x.size, step)
    n, m = x.size, value.size
    derivatives = []
    for k in range(1, order + 1):
        h = step if k <= 2 else high_step
        tensor = np.zeros((m,) + (n,) * k)
        for multi in itertools.combinations_with_replacement(range(n), k):
            counts = [multi.count(i) for i in range(n)]
            coarse = _mixed_partial(evaluate, counts, 2.0 * h)
            fine = _mixed_partial(evaluate, counts, h)
            entry = (4.0 * fine - coarse) / 3.0
            for perm in set(itertools.permutations(multi)):
                tensor[(slice(None),) + perm] = entry
        derivatives.append(tensor)
    return Jet(order=order, value=value, derivatives=tuple(derivatives))
