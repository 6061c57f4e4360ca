"""
Run history: per-round records and the cumulative series derived from them.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.typing import NDArray

from app.errors import InvalidInputError
from app.models.costs import CostFunction, QuadraticCost, total_cost
from app.models.state import AlgoState, RoundFeedback
from app.models.vector import RealVector


@dataclass(eq=False)
class RunTrace:
    """Round t is row t-1 of every array.

    `gs[t-1]` is g(x_t) and `bs[t-1]` the perturbation b_t revealed at round t;
    `cum_cost` and `cum_slack` are running sums of f_t(x_t) and g(x_t) + b_t.
    """

    xs: NDArray[np.float64]
    ys: NDArray[np.float64]
    rhos: NDArray[np.float64]
    f_values: NDArray[np.float64]
    bs: NDArray[np.float64]
    gs: NDArray[np.float64]
    costs: list[CostFunction | None]
    algorithm: str
    epsilon: float | None = None
    scenario: str = ""
    assumption_breaches: list[str] = field(default_factory=list)
    cum_cost: NDArray[np.float64] = field(init=False)
    cum_slack: NDArray[np.float64] = field(init=False)

    def __post_init__(self):
        if self.xs.shape[0] == 0:
            raise InvalidInputError("a run trace needs at least one round")
        self.cum_cost = np.cumsum(self.f_values)
        self.cum_slack = np.cumsum(self.gs + self.bs, axis=0)

    @property
    def T(self) -> int:
        return self.xs.shape[0]

    @property
    def n(self) -> int:
        return self.xs.shape[1]

    @property
    def m(self) -> int:
        return self.ys.shape[1]

    def prefix(self, T: int) -> "RunTrace":
        """The first T rounds as a trace of their own."""
        if not 1 <= T <= self.T:
            raise InvalidInputError(f"prefix length must lie in [1, {self.T}], got {T}")
        if T == self.T:
            return self
        sub = RunTrace(
            xs=self.xs[:T],
            ys=self.ys[:T],
            rhos=self.rhos[:T],
            f_values=self.f_values[:T],
            bs=self.bs[:T],
            gs=self.gs[:T],
            costs=self.costs[:T],
            algorithm=self.algorithm,
            epsilon=self.epsilon,
            scenario=self.scenario,
            assumption_breaches=list(self.assumption_breaches),
        )
        # Prefix sums of a prefix are a slice of ours.
        sums = self._quadratic_prefix
        if sums is not None:
            sub.__dict__["_quadratic_prefix"] = tuple(series[:T] for series in sums)
        return sub

    @cached_property
    def prefix_averages(self) -> NDArray[np.float64]:
        """Row T-1 holds x_bar_T = (1/T) sum_{t<=T} x_t."""
        counts = np.arange(1, self.T + 1, dtype=np.float64)[:, None]
        return np.cumsum(self.xs, axis=0) / counts

    def average(self, T: int | None = None) -> RealVector:
        T = self.T if T is None else T
        return self.prefix_averages[T - 1]

    @cached_property
    def violation_series(self) -> NDArray[np.float64]:
        """V(t) = ||[sum_{s<=t} (g(x_s) + b_s)]^+|| for every prefix t."""
        return np.linalg.norm(np.maximum(self.cum_slack, 0.0), axis=1)

    @cached_property
    def dual_norms(self) -> NDArray[np.float64]:
        return np.linalg.norm(self.ys, axis=1)

    @cached_property
    def _quadratic_prefix(self) -> tuple[NDArray, NDArray, NDArray] | None:
        if not all(isinstance(c, QuadraticCost) for c in self.costs):
            return None
        qs = np.cumsum([c.q for c in self.costs])
        lins = np.cumsum(np.stack([c.lin for c in self.costs]), axis=0)
        consts = np.cumsum([c.const for c in self.costs])
        return qs, lins, consts

    def cumulative_objective(self, T: int | None = None) -> CostFunction:
        """sum_{t<=T} f_t as one cost function."""
        T = self.T if T is None else T
        if any(c is None for c in self.costs[:T]):
            raise InvalidInputError("trace does not carry the revealed cost functions")
        prefix = self._quadratic_prefix
        if prefix is not None:
            qs, lins, consts = prefix
            return QuadraticCost(lins[T - 1], float(qs[T - 1]), float(consts[T - 1]))
        return total_cost(self.costs[:T])


class TraceRecorder:
    """Collects rounds as they are played and freezes them into a RunTrace."""

    def __init__(self, algorithm: str, epsilon: float | None = None, scenario: str = ""):
        self.algorithm = algorithm
        self.epsilon = epsilon
        self.scenario = scenario
        self._xs: list[RealVector] = []
        self._ys: list[RealVector] = []
        self._rhos: list[float] = []
        self._f_values: list[float] = []
        self._bs: list[RealVector] = []
        self._gs: list[RealVector] = []
        self._costs: list[CostFunction | None] = []

    def record(self, state: AlgoState, feedback: RoundFeedback, g_value: RealVector) -> None:
        self._xs.append(state.x)
        self._ys.append(state.y)
        self._rhos.append(state.rho)
        self._f_values.append(feedback.f_value)
        self._bs.append(feedback.b)
        self._gs.append(g_value)
        self._costs.append(feedback.cost)

    def build(self, assumption_breaches: list[str] | None = None) -> RunTrace:
        return RunTrace(
            xs=np.array(self._xs, dtype=np.float64),
            ys=np.array(self._ys, dtype=np.float64),
            rhos=np.array(self._rhos, dtype=np.float64),
            f_values=np.array(self._f_values, dtype=np.float64),
            bs=np.array(self._bs, dtype=np.float64),
            gs=np.array(self._gs, dtype=np.float64),
            costs=list(self._costs),
            algorithm=self.algorithm,
            epsilon=self.epsilon,
            scenario=self.scenario,
            assumption_breaches=list(assumption_breaches or []),
        )
