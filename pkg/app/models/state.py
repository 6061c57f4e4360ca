"""
Round-by-round state of the primal-dual engine, the feedback revealed after
each play, and the learning-rate schedules.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

from app.errors import InvalidInputError
from app.models.costs import CostFunction
from app.models.vector import RealVector


def step_rate(t: int, epsilon: float) -> float:
    """rho_t = t^(-epsilon) for t >= 1 and epsilon in [0, 1)."""
    if t < 1:
        raise InvalidInputError(f"round index must be >= 1, got {t}")
    if not 0.0 <= epsilon < 1.0:
        raise InvalidInputError(f"epsilon must lie in [0, 1), got {epsilon}")
    if epsilon == 0.0:
        return 1.0
    return float(t) ** (-epsilon)


class RateSchedule(ABC):
    """Maps a round index t >= 1 to a positive step size."""

    label: str = ""

    @abstractmethod
    def rate(self, t: int) -> float:
        pass

    def rates(self, T: int) -> list[float]:
        return [self.rate(t) for t in range(1, T + 1)]


@dataclass(frozen=True)
class AdaptiveRate(RateSchedule):
    """rho_t = alpha * t^(-epsilon); needs no horizon."""

    epsilon: float
    alpha: float = 1.0
    label: str = field(default="adaptive", init=False)

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise InvalidInputError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise InvalidInputError(f"alpha must be positive, got {self.alpha}")

    def rate(self, t: int) -> float:
        rho = step_rate(t, self.epsilon)
        return rho if self.alpha == 1.0 else self.alpha * rho


@dataclass(frozen=True)
class FixedRate(RateSchedule):
    """The same step size every round."""

    rho: float
    label: str = field(default="fixed_rate", init=False)

    def __post_init__(self):
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise InvalidInputError(f"fixed rate must be positive, got {self.rho}")

    @classmethod
    def for_horizon(cls, T: int) -> "FixedRate":
        """rho = 1 / sqrt(T), the horizon-dependent constant rate."""
        if T < 1:
            raise InvalidInputError(f"horizon must be >= 1, got {T}")
        return cls(1.0 / math.sqrt(T))

    def rate(self, t: int) -> float:
        if t < 1:
            raise InvalidInputError(f"round index must be >= 1, got {t}")
        return self.rho


@dataclass(frozen=True, eq=False)
class RoundFeedback:
    """What the environment reveals once x_t has been played."""

    f_value: float
    f_grad: RealVector
    b: RealVector
    cost: CostFunction | None = None


@dataclass(frozen=True, eq=False)
class AlgoState:
    """(t, x_t, y_t, rho_t) plus the cost subgradient observed at x_t."""

    t: int
    x: RealVector
    y: RealVector
    rho: float
    last_f_grad: RealVector
