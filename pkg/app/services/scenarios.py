"""
Seeded scenario generators.

A stream hands out one round of feedback per played point, so a decision can
only depend on what earlier rounds revealed. Every emitted round is audited
against the constants the scenario declares.
"""

import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Callable

import numpy as np

from app.errors import InfeasibleError, InvalidInputError
from app.models.action_set import Box
from app.models.bregman import HalfSquaredEuclidean
from app.models.constraints import AffineConstraints
from app.models.costs import CostFunction, QuadraticCost
from app.models.problem import AssumptionConstants, ProblemSpec
from app.models.state import RoundFeedback
from app.models.vector import RealVector, as_vector
from app.services.knapsack import solve_covering_knapsack
from app.services.prng import Prng

logger = logging.getLogger(__name__)

AUDIT_TOL = 1e-9
MAX_LOGGED_BREACHES = 10
SLATER_GUARD = 1e-6
JITTER_SALT = 0x5DEECE66D
STATIC_LP_MAX_DRAWS = 100
STATIC_LP_MARGIN = 0.05


class ScenarioStream(ABC):
    """Round-by-round emitter of (f_t, b_t) for one problem."""

    name: str = ""

    def __init__(self, spec: ProblemSpec, horizon: int | None = None):
        self.spec = spec
        self.horizon = horizon
        self.round = 0
        self.assumption_breaches: list[str] = []

    def play(self, x: RealVector) -> RoundFeedback:
        """Play x_t and learn f_t(x_t), f'_t(x_t) and b_t."""
        if self.horizon is not None and self.round >= self.horizon:
            raise InvalidInputError(f"{self.name} stream exhausted after {self.horizon} rounds")
        self.round += 1
        cost, b = self._emit(self.round, x)
        feedback = RoundFeedback(f_value=cost.value(x), f_grad=cost.gradient(x), b=b, cost=cost)
        self._audit(x, feedback)
        return feedback

    @abstractmethod
    def _emit(self, t: int, x: RealVector) -> tuple[CostFunction, RealVector]:
        pass

    def _audit(self, x: RealVector, feedback: RoundFeedback) -> None:
        consts = self.spec.consts
        grad_norm = float(np.linalg.norm(feedback.f_grad))
        if grad_norm > consts.F_star + AUDIT_TOL:
            self._breach(f"round {self.round}: ||f'|| = {grad_norm:.6g} exceeds F* = {consts.F_star:.6g}")
        slack_norm = float(np.linalg.norm(self.spec.constraints.value(x) + feedback.b))
        if slack_norm > consts.G + AUDIT_TOL:
            self._breach(f"round {self.round}: ||g(x)+b|| = {slack_norm:.6g} exceeds G = {consts.G:.6g}")
        slater = float(np.max(self.spec.slater_slack(feedback.b)))
        if slater > AUDIT_TOL:
            self._breach(f"round {self.round}: Slater condition fails by {slater:.6g}")

    def _breach(self, message: str) -> None:
        self.assumption_breaches.append(message)
        if len(self.assumption_breaches) <= MAX_LOGGED_BREACHES:
            logger.warning("%s scenario: %s", self.name, message)


class DatacenterStream(ScenarioStream):
    """Geo-distributed datacenter with arrivals driven by the previous round's cost.

    f_t(x) = <l_t, x> with l_t uniform on [0, 1]^n, the covering constraint
    <a, x_t> >= b_t, and b_t = 1/2 <1, a> exp(-<l_{t-1}, x_{t-1}>) with
    l_0 = x_0 = 0.
    """

    name = "datacenter"

    def __init__(self, n: int, seed: int, horizon: int | None = None):
        if n < 1:
            raise InvalidInputError(f"datacenter scenario needs n >= 1, got {n}")
        self.prng = Prng(seed)
        self.a = np.array(self.prng.uniform_vector(n, 0.5, 1.5))
        self.total = math.fsum(self.a)
        super().__init__(self._build_spec(n), horizon)
        self._prev_l = np.zeros(n)
        self._prev_x = np.zeros(n)

    def _build_spec(self, n: int) -> ProblemSpec:
        consts = AssumptionConstants(
            D=math.sqrt(n),
            F_star=math.sqrt(n),
            G_star=self.total,
            G=self.total,
            eta=0.5 * self.total - SLATER_GUARD,
            slater_point=np.ones(n),
        )
        return ProblemSpec(
            action_set=Box.unit(n),
            constraints=AffineConstraints.covering(self.a),
            psi=HalfSquaredEuclidean(),
            phi=HalfSquaredEuclidean(),
            consts=consts,
        )

    def _arrival(self) -> float:
        exposure = math.fsum(self._prev_l * self._prev_x)
        return 0.5 * self.total * math.exp(-exposure)

    def _emit(self, t: int, x: RealVector) -> tuple[CostFunction, RealVector]:
        b = np.array([self._arrival()])
        prices = np.array(self.prng.uniform_vector(self.spec.n))
        self._prev_l = prices
        self._prev_x = np.array(x, dtype=np.float64, copy=True)
        return QuadraticCost.linear(prices), b


class AllFeasibleStream(DatacenterStream):
    """Datacenter prices with arrivals that never bind: g(x) + b_t <= -0.05 on all of C."""

    name = "all_feasible"

    def __init__(self, n: int, seed: int, horizon: int | None = None):
        self.jitter = Prng(seed ^ JITTER_SALT)
        super().__init__(n, seed, horizon)

    def _build_spec(self, n: int) -> ProblemSpec:
        consts = AssumptionConstants(
            D=math.sqrt(n),
            F_star=math.sqrt(n),
            G_star=2.0 * self.total + 0.1,
            G=2.0 * self.total + 0.1,
            eta=self.total,
            slater_point=np.ones(n),
        )
        return ProblemSpec(
            action_set=Box.unit(n),
            constraints=AffineConstraints.covering(self.a),
            psi=HalfSquaredEuclidean(),
            phi=HalfSquaredEuclidean(),
            consts=consts,
        )

    def _arrival(self) -> float:
        return -self.total - 0.1 + 0.05 * self.jitter.u01()


class StaticStream(ScenarioStream):
    """The same cost and perturbation every round."""

    name = "static"

    def __init__(
        self,
        spec: ProblemSpec,
        cost: CostFunction,
        b: RealVector,
        horizon: int | None = None,
        f_star: float | None = None,
    ):
        super().__init__(spec, horizon)
        self.cost = cost
        self.b = as_vector(b, dim=spec.m, name="static perturbation")
        self.f_star = f_star

    def _emit(self, t: int, x: RealVector) -> tuple[CostFunction, RealVector]:
        return self.cost, self.b.copy()


def datacenter_scenario(n: int, seed: int) -> DatacenterStream:
    return DatacenterStream(n, seed)


def all_feasible_scenario(n: int, seed: int) -> AllFeasibleStream:
    return AllFeasibleStream(n, seed)


def static_lp_scenario(
    n: int,
    seed: int,
    cost: RealVector | None = None,
    a: RealVector | None = None,
    b: float | None = None,
) -> tuple[StaticStream, float]:
    """Frozen covering LP over [0, 1]^n and its optimal value f*.

    Any of `cost`, `a`, `b` may be fixed; the rest are drawn from the seed and
    redrawn while the Slater margin <1, a> - b is below 5% of <1, a>.
    """
    if n < 1:
        raise InvalidInputError(f"static LP scenario needs n >= 1, got {n}")
    prng = Prng(seed)
    for _ in range(STATIC_LP_MAX_DRAWS):
        weights = _given_or_drawn(a, n, "cover weights", lambda: prng.uniform_vector(n, 0.5, 1.5))
        prices = _given_or_drawn(cost, n, "cost", lambda: prng.uniform_vector(n))
        total = math.fsum(weights)
        demand = float(b) if b is not None else total * prng.u01()
        if total - demand >= STATIC_LP_MARGIN * total:
            break
    else:
        raise InfeasibleError(
            f"no static LP draw with a Slater margin after {STATIC_LP_MAX_DRAWS} attempts"
            f" (last demand {demand} under <1, a> = {total})"
        )

    consts = AssumptionConstants(
        D=math.sqrt(n),
        F_star=max(float(np.linalg.norm(prices)), 1e-12),
        G_star=max(abs(demand), abs(total - demand)),
        G=max(abs(demand), abs(total - demand)),
        eta=total - demand,
        slater_point=np.ones(n),
    )
    spec = ProblemSpec(
        action_set=Box.unit(n),
        constraints=AffineConstraints.covering(weights),
        psi=HalfSquaredEuclidean(),
        phi=HalfSquaredEuclidean(),
        consts=consts,
    )
    f_star = solve_covering_knapsack(prices, weights, demand, np.zeros(n), np.ones(n)).value
    stream = StaticStream(spec, QuadraticCost.linear(prices), np.array([demand]), f_star=f_star)
    stream.name = "static_lp"
    return stream, f_star


def _given_or_drawn(value, n: int, name: str, draw: Callable[[], list[float]]) -> RealVector:
    if value is not None:
        return as_vector(value, dim=n, name=name)
    return np.array(draw())


SCENARIOS: dict[str, Callable[[int, int], ScenarioStream]] = {
    "datacenter": datacenter_scenario,
    "static_lp": lambda n, seed: static_lp_scenario(n, seed)[0],
    "all_feasible": all_feasible_scenario,
}


def build_scenario(name: str, n: int, seed: int) -> ScenarioStream:
    """Fresh stream for a registered scenario."""
    try:
        factory = SCENARIOS[name]
    except KeyError:
        raise InvalidInputError(f"unknown scenario {name!r}") from None
    return factory(n, seed)
