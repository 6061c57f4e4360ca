"""
Cost functions f_t revealed after each round.

Quadratic costs (linear ones included) are closed under addition, so the
offline objective sum_t f_t stays a single QuadraticCost and the hindsight
solvers can recognise the linear case.
"""

from abc import ABC, abstractmethod
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field

import numpy as np

from app.errors import InvalidInputError
from app.models.vector import RealVector, as_vector


class CostFunction(ABC):
    """A differentiable convex function on R^n."""

    kind: str = ""

    @abstractmethod
    def value(self, x: RealVector) -> float:
        pass

    @abstractmethod
    def gradient(self, x: RealVector) -> RealVector:
        pass

    def __add__(self, other: "CostFunction") -> "CostFunction":
        if not isinstance(other, CostFunction):
            return NotImplemented
        return CostSum(_terms(self) + _terms(other))


@dataclass(frozen=True, eq=False)
class QuadraticCost(CostFunction):
    """f(x) = q/2 ||x||^2 + <lin, x> + const, with q >= 0."""

    lin: RealVector
    q: float = 0.0
    const: float = 0.0
    kind: str = field(default="quadratic", init=False)

    def __post_init__(self):
        object.__setattr__(self, "lin", as_vector(self.lin, name="linear coefficients"))
        if not self.q >= 0:
            raise InvalidInputError("quadratic cost curvature must be >= 0")

    @classmethod
    def linear(cls, lin: RealVector, const: float = 0.0) -> "QuadraticCost":
        return cls(lin, 0.0, const)

    @property
    def is_linear(self) -> bool:
        return self.q == 0.0

    def value(self, x: RealVector) -> float:
        return 0.5 * self.q * float(np.dot(x, x)) + float(np.dot(self.lin, x)) + self.const

    def gradient(self, x: RealVector) -> RealVector:
        if self.q == 0.0:
            return self.lin.copy()
        return self.q * x + self.lin

    def __add__(self, other: CostFunction) -> CostFunction:
        if isinstance(other, QuadraticCost):
            return QuadraticCost(self.lin + other.lin, self.q + other.q, self.const + other.const)
        return super().__add__(other)


@dataclass(frozen=True, eq=False)
class CallableCost(CostFunction):
    """Any convex differentiable cost given by value and gradient callables."""

    value_fn: Callable[[RealVector], float]
    gradient_fn: Callable[[RealVector], RealVector]
    kind: str = field(default="callable", init=False)

    def value(self, x: RealVector) -> float:
        return float(self.value_fn(x))

    def gradient(self, x: RealVector) -> RealVector:
        return as_vector(self.gradient_fn(x), dim=x.shape[0], name="cost gradient")


@dataclass(frozen=True, eq=False)
class CostSum(CostFunction):
    terms: tuple[CostFunction, ...]
    kind: str = field(default="sum", init=False)

    def value(self, x: RealVector) -> float:
        return sum(term.value(x) for term in self.terms)

    def gradient(self, x: RealVector) -> RealVector:
        total = np.zeros_like(x)
        for term in self.terms:
            total = total + term.gradient(x)
        return total


def _terms(cost: CostFunction) -> tuple[CostFunction, ...]:
    return cost.terms if isinstance(cost, CostSum) else (cost,)


def total_cost(costs: Iterable[CostFunction]) -> CostFunction:
    """Fold costs into one objective; quadratic terms are merged."""
    quadratic: QuadraticCost | None = None
    others: list[CostFunction] = []
    for cost in costs:
        if isinstance(cost, QuadraticCost):
            quadratic = cost if quadratic is None else quadratic + cost
        else:
            others.extend(_terms(cost))
    if not others:
        if quadratic is None:
            raise InvalidInputError("cannot total an empty cost sequence")
        return quadratic
    terms = tuple(others) if quadratic is None else (quadratic, *others)
    return terms[0] if len(terms) == 1 else CostSum(terms)
