"""
Hindsight machinery: perturbation statistics, selection of the shift b_T,
offline best fixed decisions over {x in C | g(x) + w <= 0}, and the regret and
violation evaluators.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from app.errors import ConvergenceError, InfeasibleError, InvalidInputError
from app.models.action_set import ActionSet, Box
from app.models.constraints import AffineConstraints, ConstraintMap
from app.models.costs import CostFunction, QuadraticCost
from app.models.problem import ProblemSpec
from app.models.trace import RunTrace
from app.models.vector import RealVector, as_vector
from app.services.knapsack import solve_covering_knapsack
from app.services.projection import project
from app.services.prox import ProxConfig
from app.settings import settings

logger = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-8
PENALTY_START = 10.0
BACKTRACK_SHRINK = 0.5
STEP_GROWTH = 1.25
MAX_SHIFT_NUDGES = 64


@dataclass(frozen=True, eq=False)
class PerturbationStats:
    """underline_b: mean of b_1..b_T; bar_b: componentwise max."""

    underline_b: RealVector
    bar_b: RealVector


@dataclass(frozen=True, eq=False)
class FeasibleSetSpec:
    """{x in base | g(x) + w <= 0}."""

    base: ActionSet
    constraints: ConstraintMap
    w: RealVector

    def __post_init__(self):
        object.__setattr__(self, "w", as_vector(self.w, dim=self.constraints.m, name="shift w"))

    def contains(self, x: RealVector, tol: float = FEASIBILITY_TOL) -> bool:
        return self.base.contains(x) and bool(np.all(self.constraints.value(x) + self.w <= tol))


@dataclass
class HindsightCosts:
    """Best fixed-decision costs over X^min (w = bar_b), X_T (w = b_T) and X^max (w = underline_b)."""

    t: int
    cost_min: float
    cost_T: float
    cost_max: float
    b_T: RealVector

    @property
    def ordered(self) -> bool:
        return self.cost_min >= self.cost_T - FEASIBILITY_TOL and self.cost_T >= self.cost_max - FEASIBILITY_TOL


def perturbation_stats(trace: RunTrace) -> PerturbationStats:
    if trace.T < 1:
        raise InvalidInputError("perturbation statistics need a nonempty trace")
    mean = np.array([math.fsum(column) / trace.T for column in trace.bs.T])
    lowest = trace.bs.min(axis=0)
    bar = trace.bs.max(axis=0)
    # Keep the rounded mean inside the observed range.
    return PerturbationStats(underline_b=np.clip(mean, lowest, bar), bar_b=bar)


def select_shift(
    ys: NDArray[np.float64],
    b_next: NDArray[np.float64],
    underline: RealVector,
    bar: RealVector,
) -> RealVector:
    """Smallest w in [underline, bar] this rule certifies with sum_t <y_t, b_{t+1} - w> <= 0.

    `ys[k]` is paired with `b_next[k]`. Each component takes the dual-weighted
    mean of b_{t+1}, clamped into the interval, then nudged upward until the
    per-component sum is nonpositive in floating point.
    """
    underline = as_vector(underline, name="underline_b")
    bar = as_vector(bar, dim=underline.shape[0], name="bar_b")
    ys = np.asarray(ys, dtype=np.float64).reshape(-1, underline.shape[0])
    b_next = np.asarray(b_next, dtype=np.float64).reshape(-1, underline.shape[0])
    if ys.shape != b_next.shape:
        raise InvalidInputError(f"dual and perturbation series differ in shape: {ys.shape} vs {b_next.shape}")

    w = underline.copy()
    for j in range(underline.shape[0]):
        weight = math.fsum(ys[:, j])
        if weight > 0:
            target = math.fsum(ys[:, j] * b_next[:, j]) / weight
            w[j] = min(max(target, underline[j]), bar[j])
        for _ in range(MAX_SHIFT_NUDGES):
            if _component_condition(ys[:, j], b_next[:, j], w[j]) <= 0 or w[j] >= bar[j]:
                break
            w[j] = np.nextafter(w[j], math.inf)
        if _component_condition(ys[:, j], b_next[:, j], w[j]) > 0:
            w[j] = bar[j]
    return w


def _component_condition(y: NDArray, b: NDArray, w: float) -> float:
    return math.fsum(y * (b - w))


def shift_condition(trace: RunTrace, w: RealVector) -> float:
    """sum_{t=1}^{T-1} <y_t, b_{t+1} - w>; the shift is admissible when this is <= 0."""
    if trace.T < 2:
        return 0.0
    return math.fsum((trace.ys[:-1] * (trace.bs[1:] - w)).ravel())


def select_b_T(trace: RunTrace) -> RealVector:
    """Shift defining X_T for a trace.

    The pairs (y_t, b_{t+1}) run over t = 1..T-1 since b_{T+1} is not observed
    within the horizon.
    """
    stats = perturbation_stats(trace)
    return select_shift(trace.ys[:-1], trace.bs[1:], stats.underline_b, stats.bar_b)


def feasible_sets(spec: ProblemSpec, trace: RunTrace) -> dict[str, FeasibleSetSpec]:
    """X^min, X_T and X^max for a trace."""
    stats = perturbation_stats(trace)
    return {
        "min": FeasibleSetSpec(spec.action_set, spec.constraints, stats.bar_b),
        "T": FeasibleSetSpec(spec.action_set, spec.constraints, select_b_T(trace)),
        "max": FeasibleSetSpec(spec.action_set, spec.constraints, stats.underline_b),
    }


def hindsight_cost(
    objective: CostFunction,
    fs: FeasibleSetSpec,
    cfg: ProxConfig | None = None,
    method: str = "auto",
) -> tuple[float, RealVector]:
    """min over fs of the offline objective, with its minimizer.

    `method` is "knapsack" (linear objective, box, single covering row),
    "penalty" (augmented-Lagrangian continuation) or "auto".
    """
    if method not in ("auto", "knapsack", "penalty"):
        raise InvalidInputError(f"unknown hindsight method {method!r}")
    knapsack_ready = _knapsack_applicable(objective, fs)
    if method == "knapsack" and not knapsack_ready:
        raise InvalidInputError("knapsack path needs a linear objective, a box and one covering row")
    if method != "penalty" and knapsack_ready:
        return _knapsack_hindsight(objective, fs)
    return _penalty_hindsight(objective, fs, cfg or ProxConfig.from_settings())


def _knapsack_applicable(objective: CostFunction, fs: FeasibleSetSpec) -> bool:
    return (
        isinstance(objective, QuadraticCost)
        and objective.is_linear
        and isinstance(fs.base, Box)
        and isinstance(fs.constraints, AffineConstraints)
        and fs.constraints.m == 1
        and bool(np.all(fs.constraints.A[0] <= 0))
    )


def _knapsack_hindsight(objective: QuadraticCost, fs: FeasibleSetSpec) -> tuple[float, RealVector]:
    # -<a, x> + c + w <= 0  <=>  <a, x> >= c + w
    weights = -fs.constraints.A[0]
    demand = float(fs.constraints.c[0] + fs.w[0])
    solution = solve_covering_knapsack(objective.lin, weights, demand, fs.base.lo, fs.base.hi)
    return solution.value + objective.const, solution.x


def _penalty_hindsight(objective: CostFunction, fs: FeasibleSetSpec, cfg: ProxConfig) -> tuple[float, RealVector]:
    """Augmented-Lagrangian continuation with projected-gradient inner solves.

    The objective is scaled by its gradient norm at the start point and each
    constraint row by its gradient norm there. The penalty doubles whenever
    the KKT residual fails to shrink fourfold.
    """
    x = project(fs.base, np.zeros(fs.base.dimension))
    scale = max(1.0, float(np.linalg.norm(objective.gradient(x))))
    row_norms = np.linalg.norm(fs.constraints.jacobian(x), axis=1)
    row_scale = np.where(row_norms > 0, row_norms, 1.0)

    def h(u: RealVector) -> RealVector:
        return (fs.constraints.value(u) + fs.w) / row_scale

    def h_jac(u: RealVector) -> NDArray:
        return fs.constraints.jacobian(u) / row_scale[:, None]

    mu = PENALTY_START
    lam = np.zeros(fs.constraints.m)
    residual_prev = math.inf
    residual = math.inf
    for stage in range(settings.hindsight_stages):
        x = _augmented_lagrangian_solve(objective, scale, h, h_jac, fs.base, x, lam, mu, cfg)
        hx = h(x)
        residual = float(np.linalg.norm(np.maximum(hx, -lam / mu)))
        lam_next = np.maximum(lam + mu * hx, 0.0)
        step = float(np.linalg.norm(lam_next - lam))
        lam = lam_next
        logger.debug("hindsight stage %d: mu=%.3g residual=%.3e", stage, mu, residual)
        infeasibility = float(np.linalg.norm(np.maximum(hx, 0.0)))
        if infeasibility <= 0.1 * FEASIBILITY_TOL and step <= 1e-9 * (1.0 + float(np.linalg.norm(lam))):
            break
        if residual > 0.25 * residual_prev:
            mu *= 2.0
        residual_prev = residual

    violation = fs.constraints.value(x) + fs.w
    infeasibility = float(np.max(violation))
    if infeasibility > FEASIBILITY_TOL:
        raise ConvergenceError(
            "hindsight solver ended infeasible",
            infeasibility,
            {"max_violation": infeasibility, "kkt_residual": residual, "penalty": mu},
        )
    return objective.value(x), x


def _augmented_lagrangian_solve(
    objective: CostFunction,
    scale: float,
    h,
    h_jac,
    base: ActionSet,
    x: RealVector,
    lam: RealVector,
    mu: float,
    cfg: ProxConfig,
) -> RealVector:
    """Accelerated projected gradient on the augmented Lagrangian, restarted on oscillation.

    The step is backtracked until the gradient change across it is at most
    |move| / step. Stops when the natural residual ||x - P(x - grad)|| falls
    to the inner tolerance.
    """

    def gradient(u: RealVector) -> RealVector:
        shifted = np.maximum(lam + mu * h(u), 0.0)
        return objective.gradient(u) / scale + h_jac(u).T @ shifted

    step = 1.0 / mu
    momentum = 1.0
    z = x
    grad_z = gradient(z)
    for _ in range(cfg.inner_max_iters * 5):
        step *= STEP_GROWTH
        while True:
            candidate = project(base, z - step * grad_z)
            candidate_grad = gradient(candidate)
            if step * float(np.linalg.norm(candidate_grad - grad_z)) <= float(np.linalg.norm(candidate - z)):
                break
            step *= BACKTRACK_SHRINK
            if step < 1e-20:
                return x
        if float(np.linalg.norm(candidate - project(base, candidate - candidate_grad))) <= cfg.inner_tol:
            return candidate
        momentum_next = (1.0 + math.sqrt(1.0 + 4.0 * momentum**2)) / 2.0
        if float(np.dot(z - candidate, candidate - x)) > 0:
            momentum_next = 1.0
            z = candidate
        else:
            z = candidate + (momentum - 1.0) / momentum_next * (candidate - x)
        x, momentum = candidate, momentum_next
        grad_z = candidate_grad if z is candidate else gradient(z)
    logger.debug("hindsight inner solver hit its iteration cap")
    return x


def violation_norm(cum_slack: RealVector) -> float:
    """||[s]^+||."""
    return float(np.linalg.norm(np.maximum(as_vector(cum_slack, name="cumulative slack"), 0.0)))


def violation(trace: RunTrace) -> float:
    """V(T) = ||[sum_t (g(x_t) + b_t)]^+||."""
    return violation_norm(trace.cum_slack[-1])


def regret(
    trace: RunTrace,
    fs: FeasibleSetSpec,
    cfg: ProxConfig | None = None,
    method: str = "auto",
) -> float:
    """sum_t f_t(x_t) minus the best fixed decision over fs; may be negative."""
    best, _ = hindsight_cost(trace.cumulative_objective(), fs, cfg, method)
    return float(trace.cum_cost[-1]) - best


def hindsight_costs_at(
    spec: ProblemSpec,
    trace: RunTrace,
    cfg: ProxConfig | None = None,
) -> HindsightCosts:
    sets = feasible_sets(spec, trace)
    objective = trace.cumulative_objective()
    costs = {key: hindsight_cost(objective, fs, cfg)[0] for key, fs in sets.items()}
    return HindsightCosts(
        t=trace.T,
        cost_min=costs["min"],
        cost_T=costs["T"],
        cost_max=costs["max"],
        b_T=sets["T"].w,
    )


def checkpoints(T: int, every: int) -> list[int]:
    """Multiples of `every` up to T, always ending at T."""
    if every < 1:
        raise InvalidInputError(f"checkpoint interval must be >= 1, got {every}")
    points = list(range(every, T + 1, every))
    if not points or points[-1] != T:
        points.append(T)
    return points


def hindsight_curves(
    spec: ProblemSpec,
    trace: RunTrace,
    every: int,
    cfg: ProxConfig | None = None,
) -> list[HindsightCosts]:
    """Hindsight costs recomputed on every prefix ending at a checkpoint."""
    curves = []
    for t in checkpoints(trace.T, every):
        try:
            curves.append(hindsight_costs_at(spec, trace.prefix(t), cfg))
        except InfeasibleError:
            logger.warning("hindsight set empty at checkpoint t=%d", t)
            raise
    return curves
