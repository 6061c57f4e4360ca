"""
Constraint maps g = (g_1, ..., g_m): affine, or general convex callables.
"""

from abc import ABC, abstractmethod
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from app.errors import InvalidInputError
from app.models.vector import RealVector, as_matrix, as_vector


class ConstraintMap(ABC):
    """A vector of m convex functions on R^n."""

    kind: str = ""

    @property
    @abstractmethod
    def m(self) -> int:
        pass

    @property
    @abstractmethod
    def n(self) -> int:
        pass

    @abstractmethod
    def value(self, x: RealVector) -> RealVector:
        pass

    @abstractmethod
    def jacobian(self, x: RealVector) -> NDArray[np.float64]:
        """m x n matrix whose rows are (sub)gradients of each g_j at x."""
        pass

    @abstractmethod
    def weighted_gradient_lipschitz(self, y: RealVector) -> float:
        """Lipschitz constant of x -> J(x)^T y, for y >= 0."""
        pass


@dataclass(frozen=True, eq=False)
class AffineConstraints(ConstraintMap):
    """g(x) = A x + c."""

    A: NDArray[np.float64]
    c: RealVector
    kind: str = field(default="affine", init=False)

    def __post_init__(self):
        A = as_matrix(self.A, name="constraint matrix A")
        c = as_vector(self.c, dim=A.shape[0], name="constraint offset c")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "c", c)

    @classmethod
    def covering(cls, a: RealVector, offset: float = 0.0) -> "AffineConstraints":
        """Single covering row g(x) = offset - <a, x>, i.e. <a, x> >= offset + b."""
        a = as_vector(a, name="covering weights")
        return cls(-a.reshape(1, -1), np.array([offset]))

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def value(self, x: RealVector) -> RealVector:
        return self.A @ x + self.c

    def jacobian(self, x: RealVector) -> NDArray[np.float64]:
        return self.A

    def weighted_gradient_lipschitz(self, y: RealVector) -> float:
        # x -> A^T y is constant in x.
        return 0.0

    @property
    def spectral_norm(self) -> float:
        return float(np.linalg.norm(self.A, ord=2))


@dataclass(frozen=True, eq=False)
class GeneralConstraints(ConstraintMap):
    """Callable convex constraints with declared per-component gradient Lipschitz constants.

    `value_fn(x)` returns the m-vector g(x); `jacobian_fn(x)` returns the m x n
    matrix of gradients. `smoothness[j]` bounds the Lipschitz constant of
    grad g_j; it sizes the step of the inner proximal solver.
    """

    value_fn: Callable[[RealVector], RealVector]
    jacobian_fn: Callable[[RealVector], NDArray[np.float64]]
    dims: tuple[int, int]
    smoothness: RealVector
    kind: str = field(default="general", init=False)

    def __post_init__(self):
        m, n = self.dims
        if m < 1 or n < 1:
            raise InvalidInputError("general constraints need m >= 1 and n >= 1")
        s = as_vector(self.smoothness, dim=m, name="constraint smoothness")
        if np.any(s < 0):
            raise InvalidInputError("constraint smoothness constants must be >= 0")
        object.__setattr__(self, "smoothness", s)

    @property
    def m(self) -> int:
        return self.dims[0]

    @property
    def n(self) -> int:
        return self.dims[1]

    def value(self, x: RealVector) -> RealVector:
        return as_vector(self.value_fn(x), dim=self.m, name="g(x)")

    def jacobian(self, x: RealVector) -> NDArray[np.float64]:
        return as_matrix(self.jacobian_fn(x), shape=(self.m, self.n), name="jacobian")

    def weighted_gradient_lipschitz(self, y: RealVector) -> float:
        return float(np.dot(np.maximum(y, 0.0), self.smoothness))
