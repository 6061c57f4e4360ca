"""
Action sets C: boxes, Euclidean balls and scaled simplices.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from app.errors import InvalidInputError
from app.models.vector import RealVector, as_vector

MEMBERSHIP_TOL = 1e-12


class ActionSet(ABC):
    """A nonempty compact convex set with a closed-form diameter."""

    kind: str = ""

    @property
    @abstractmethod
    def dimension(self) -> int:
        pass

    @property
    @abstractmethod
    def diameter(self) -> float:
        """D such that ||u - v|| <= D for all u, v in the set."""
        pass

    @abstractmethod
    def contains(self, x: RealVector, tol: float = MEMBERSHIP_TOL) -> bool:
        pass


@dataclass(frozen=True, eq=False)
class Box(ActionSet):
    """Axis-aligned box {lo <= x <= hi}."""

    lo: RealVector
    hi: RealVector
    kind: str = field(default="box", init=False)

    def __post_init__(self):
        lo = as_vector(self.lo, name="box lo")
        hi = as_vector(self.hi, dim=lo.shape[0], name="box hi")
        if np.any(lo > hi):
            raise InvalidInputError("box requires lo <= hi elementwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def unit(cls, n: int) -> "Box":
        """The unit cube [0, 1]^n."""
        return cls(np.zeros(n), np.ones(n))

    @property
    def dimension(self) -> int:
        return self.lo.shape[0]

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))

    def contains(self, x: RealVector, tol: float = MEMBERSHIP_TOL) -> bool:
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))


@dataclass(frozen=True, eq=False)
class EuclideanBall(ActionSet):
    """Closed ball {||x - center|| <= radius}."""

    center: RealVector
    radius: float
    kind: str = field(default="euclidean_ball", init=False)

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center, name="ball center"))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise InvalidInputError("ball radius must be positive and finite")

    @property
    def dimension(self) -> int:
        return self.center.shape[0]

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, x: RealVector, tol: float = MEMBERSHIP_TOL) -> bool:
        return bool(np.linalg.norm(x - self.center) <= self.radius + tol)


@dataclass(frozen=True, eq=False)
class Simplex(ActionSet):
    """Scaled probability simplex {x >= 0, sum(x) = scale}."""

    n: int
    scale: float = 1.0
    kind: str = field(default="simplex", init=False)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("simplex dimension must be >= 1")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise InvalidInputError("simplex scale must be positive and finite")

    @property
    def dimension(self) -> int:
        return self.n

    @property
    def diameter(self) -> float:
        # Distance between two vertices; a single point when n == 1.
        return self.scale * math.sqrt(2.0) if self.n > 1 else 0.0

    def contains(self, x: RealVector, tol: float = MEMBERSHIP_TOL) -> bool:
        return bool(np.all(x >= -tol) and abs(float(np.sum(x)) - self.scale) <= tol * max(1.0, self.n))
