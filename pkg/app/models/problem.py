"""
Problem specification: action set, constraints, Bregman generators and the
declared assumption constants.
"""

import math
from dataclasses import dataclass

from app.errors import InvalidInputError
from app.models.action_set import ActionSet
from app.models.bregman import BregmanGenerator, WeightedQuadratic
from app.models.constraints import ConstraintMap
from app.models.vector import RealVector, as_vector


@dataclass(frozen=True, eq=False)
class AssumptionConstants:
    """Analytic constants a scenario declares for its problem.

    D bounds the diameter of C, F_star the cost subgradients, G_star and G the
    perturbed constraint values, and eta is the Slater margin attained at
    slater_point.
    """

    D: float
    F_star: float
    G_star: float
    G: float
    eta: float
    slater_point: RealVector

    def __post_init__(self):
        for name in ("D", "F_star", "G", "eta"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise InvalidInputError(f"assumption constant {name} must be positive, got {value}")
        # G_star = 0 is the always-feasible reduction
        if not (self.G_star >= 0 and math.isfinite(self.G_star)):
            raise InvalidInputError(f"assumption constant G_star must be >= 0, got {self.G_star}")
        object.__setattr__(self, "slater_point", as_vector(self.slater_point, name="slater point"))


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    action_set: ActionSet
    constraints: ConstraintMap
    psi: BregmanGenerator
    phi: BregmanGenerator
    consts: AssumptionConstants
    initial_point: RealVector | None = None

    def __post_init__(self):
        n = self.action_set.dimension
        if self.constraints.n != n:
            raise InvalidInputError(
                f"constraints act on dimension {self.constraints.n}, action set has {n}"
            )
        _check_generator(self.psi, n, "psi")
        _check_generator(self.phi, self.constraints.m, "phi")
        if self.consts.slater_point.shape[0] != n:
            raise InvalidInputError("slater point dimension does not match the action set")
        if not self.action_set.contains(self.consts.slater_point):
            raise InvalidInputError("slater point must lie in the action set")
        if self.initial_point is not None:
            x1 = as_vector(self.initial_point, dim=n, name="initial point")
            if not self.action_set.contains(x1):
                raise InvalidInputError("initial point must lie in the action set")
            object.__setattr__(self, "initial_point", x1)

    @property
    def n(self) -> int:
        return self.action_set.dimension

    @property
    def m(self) -> int:
        return self.constraints.m

    def slater_slack(self, b: RealVector) -> RealVector:
        """g(x_hat) + b + eta * 1; must be <= 0 for every emitted b."""
        return self.constraints.value(self.consts.slater_point) + b + self.consts.eta


def _check_generator(gen: BregmanGenerator, dim: int, label: str) -> None:
    if isinstance(gen, WeightedQuadratic) and gen.weights.shape[0] != dim:
        raise InvalidInputError(
            f"{label} has dimension {gen.weights.shape[0]}, expected {dim}"
        )
    if not 0 < gen.sigma <= gen.L:
        raise InvalidInputError(f"{label} needs 0 < sigma <= L")
