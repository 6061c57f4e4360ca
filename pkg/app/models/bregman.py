"""
Bregman generators psi / phi: strongly convex, smooth functions with exact gradients.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from app.errors import InvalidInputError
from app.models.vector import RealVector, as_vector


class BregmanGenerator(ABC):
    """A sigma-strongly convex, L-smooth generator inducing B(a, b)."""

    kind: str = ""

    @property
    @abstractmethod
    def sigma(self) -> float:
        """Strong-convexity modulus."""
        pass

    @property
    @abstractmethod
    def L(self) -> float:
        """Smoothness modulus."""
        pass

    @abstractmethod
    def value(self, x: RealVector) -> float:
        pass

    @abstractmethod
    def gradient(self, x: RealVector) -> RealVector:
        pass


@dataclass(frozen=True, eq=False)
class HalfSquaredEuclidean(BregmanGenerator):
    """psi(x) = 1/2 ||x||^2, so B(a, b) = 1/2 ||a - b||^2 and sigma = L = 1."""

    kind: str = field(default="half_sq_euclidean", init=False)

    @property
    def sigma(self) -> float:
        return 1.0

    @property
    def L(self) -> float:
        return 1.0

    def value(self, x: RealVector) -> float:
        return 0.5 * float(np.dot(x, x))

    def gradient(self, x: RealVector) -> RealVector:
        return np.array(x, dtype=np.float64, copy=True)


@dataclass(frozen=True, eq=False)
class WeightedQuadratic(BregmanGenerator):
    """psi(x) = 1/2 sum_i w_i x_i^2 with positive weights.

    sigma = min(w), L = max(w). The gradient w * x is strictly increasing on the
    nonnegative orthant, so this kind is admissible as a dual generator.
    """

    weights: RealVector
    kind: str = field(default="weighted_quadratic", init=False)

    def __post_init__(self):
        w = as_vector(self.weights, name="generator weights")
        if np.any(w <= 0):
            raise InvalidInputError("weighted_quadratic requires positive weights")
        object.__setattr__(self, "weights", w)

    @property
    def sigma(self) -> float:
        return float(np.min(self.weights))

    @property
    def L(self) -> float:
        return float(np.max(self.weights))

    def _check(self, x: RealVector) -> None:
        if x.shape[0] != self.weights.shape[0]:
            raise InvalidInputError(
                f"generator has dimension {self.weights.shape[0]}, got {x.shape[0]}"
            )

    def value(self, x: RealVector) -> float:
        self._check(x)
        return 0.5 * float(np.dot(self.weights * x, x))

    def gradient(self, x: RealVector) -> RealVector:
        self._check(x)
        return self.weights * x


def squared_euclidean(n: int) -> WeightedQuadratic:
    """psi(x) = ||x||^2 (sigma = L = 2), the convention used when quoting bounds."""
    return WeightedQuadratic(np.full(n, 2.0))
