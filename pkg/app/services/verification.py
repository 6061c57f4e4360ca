"""
Numerical self-checks behind `oco-sim verify`.

Each suite samples its instances from a seeded numpy generator and returns a
SuiteResult; nothing here raises on a failed check.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from app.errors import OcoError
from app.models.action_set import Box
from app.models.bregman import BregmanGenerator, HalfSquaredEuclidean, WeightedQuadratic, squared_euclidean
from app.models.constraints import AffineConstraints
from app.models.costs import QuadraticCost
from app.models.problem import AssumptionConstants, ProblemSpec
from app.services.bregman import three_point_residual
from app.services.engines import run
from app.services.metrics import (
    TheoremConstants,
    compute_chi,
    compute_E,
    default_window_grid,
    dual_bound_monitor,
    lemma5_sweep,
    proposition1_monitor,
    rate_sum,
    rate_sum_integral_bound,
    regret_bound,
    squared_euclidean_E,
    squared_euclidean_regret_bound,
)
from app.services.oracle import FeasibleSetSpec, hindsight_cost
from app.services.projection import project
from app.services.prox import (
    ProxConfig,
    dual_step,
    dual_step_iterative,
    primal_step,
    primal_step_iterative,
    proximal_descent_slack,
    proximal_gradient_slack,
)
from app.services.scenarios import datacenter_scenario
from app.settings import settings

logger = logging.getLogger(__name__)

WINDOW_EPSILONS = tuple(k / 10 for k in range(10))
GRID_STEP = 1e-3


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checked: int
    worst: float
    detail: str = ""

    @property
    def status(self) -> str:
        return "pass" if self.passed else "FAIL"


def verify_window_sums() -> SuiteResult:
    """Window sums of rho_i over {t..t+ceil(t^eps)} stay in [log 2, 3], squares below 3."""
    sweeps = lemma5_sweep(default_window_grid(), WINDOW_EPSILONS)
    failures = [(s.epsilon, s.failures[0]) for s in sweeps if not s.passed]
    return SuiteResult(
        name="window_sums",
        passed=not failures,
        checked=sum(s.checked for s in sweeps),
        worst=max(s.max_sum for s in sweeps),
        detail=f"first failure (eps, t) = {failures[0]}" if failures else "",
    )


def _generators(rng: np.random.Generator, n: int) -> list[BregmanGenerator]:
    return [HalfSquaredEuclidean(), WeightedQuadratic(rng.uniform(0.5, 2.0, n)), squared_euclidean(n)]


def verify_bregman_identity(rng: np.random.Generator, triples: int = 1000, n: int = 5) -> SuiteResult:
    """Three-point identity residual within 1e-10 for every generator kind."""
    worst = 0.0
    for gen in _generators(rng, n):
        for _ in range(triples):
            a, b, c = rng.normal(size=(3, n))
            worst = max(worst, abs(three_point_residual(gen, a, b, c)))
    return SuiteResult("bregman_identity", worst <= 1e-10, 3 * triples, worst)


def _random_affine_spec(rng: np.random.Generator, n: int, m: int, phi: BregmanGenerator) -> ProblemSpec:
    A = rng.normal(size=(m, n))
    box = Box(-np.ones(n), np.ones(n))
    # c chosen so the origin has slack 1 in every row
    consts = AssumptionConstants(
        D=box.diameter, F_star=1.0, G_star=1.0, G=1.0, eta=1.0, slater_point=np.zeros(n)
    )
    return ProblemSpec(box, AffineConstraints(A, -np.ones(m)), HalfSquaredEuclidean(), phi, consts)


def verify_prox(rng: np.random.Generator, instances: int = 200) -> SuiteResult:
    """Closed-form and iterative subproblem solvers agree; one-step inequalities hold."""
    cfg = ProxConfig(inner_tol=1e-12, inner_max_iters=settings.prox_inner_max_iters)
    worst_gap = 0.0
    worst_slack = math.inf
    for _ in range(instances):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 4))
        spec = _random_affine_spec(rng, n, m, WeightedQuadratic(rng.uniform(0.5, 2.0, m)))
        x = project(spec.action_set, rng.normal(size=n))
        y = rng.uniform(0.0, 2.0, m)
        f_grad = rng.normal(size=n)
        rho = float(rng.uniform(0.05, 2.0))
        closed = primal_step(spec, x, y, f_grad, rho)
        iterative = primal_step_iterative(spec, x, y, f_grad, rho, cfg)
        worst_gap = max(worst_gap, float(np.max(np.abs(closed - iterative))))

        slack = rng.normal(size=m)
        worst_gap = max(
            worst_gap,
            float(np.max(np.abs(dual_step(spec, y, slack, rho) - dual_step_iterative(spec.phi, y, slack, rho, cfg)))),
        )

        z = project(spec.action_set, rng.normal(size=n))
        c = rng.normal(size=n)
        x_plus = project(spec.action_set, x - rho * c)
        worst_slack = min(worst_slack, proximal_descent_slack(spec.psi, lambda u: float(np.dot(c, u)), x, x_plus, z, rho))

        cost = QuadraticCost(rng.normal(size=n), float(rng.uniform(0.0, 2.0)))
        penalty_dir = spec.constraints.A.T @ y
        x_plus = project(spec.action_set, x - rho * (cost.gradient(x) + penalty_dir))
        worst_slack = min(
            worst_slack,
            proximal_gradient_slack(spec.psi, cost, lambda u: float(np.dot(penalty_dir, u)), x, x_plus, z, rho),
        )
    passed = worst_gap <= 1e-8 and worst_slack >= -1e-9
    return SuiteResult("prox", passed, instances, worst_gap, f"min one-step slack {worst_slack:.3e}")


def _covering_instance(rng: np.random.Generator, n: int) -> tuple[QuadraticCost, FeasibleSetSpec]:
    prices = rng.uniform(0.0, 1.0, n)
    weights = rng.uniform(0.5, 1.5, n)
    demand = float(weights.sum() * rng.uniform(0.05, 0.95))
    fs = FeasibleSetSpec(Box.unit(n), AffineConstraints.covering(weights), np.array([demand]))
    return QuadraticCost.linear(prices), fs


def grid_covering_value(prices: np.ndarray, weights: np.ndarray, demand: float, step: float = GRID_STEP) -> float:
    """Best grid point of min <c, x> s.t. <a, x> >= demand on [0, 1]^n.

    The first n-1 coordinates are enumerated on the grid; the last takes the
    smallest grid value that covers the remaining demand.
    """
    n = prices.shape[0]
    ticks = np.round(np.arange(0.0, 1.0 + step / 2, step), 12)
    axes = np.meshgrid(*([ticks] * (n - 1)), indexing="ij") if n > 1 else []
    partial_cost = sum((prices[i] * axis for i, axis in enumerate(axes)), np.zeros(()))
    partial_cover = sum((weights[i] * axis for i, axis in enumerate(axes)), np.zeros(()))
    needed = np.maximum(demand - partial_cover, 0.0) / weights[-1]
    last = np.ceil(needed / step - 1e-9) * step
    cost = np.where(last <= 1.0 + 1e-12, partial_cost + prices[-1] * last, np.inf)
    return float(np.min(cost))


def verify_knapsack_grid(rng: np.random.Generator, instances: int = 100) -> SuiteResult:
    """Exact covering knapsack against a 1e-3 grid search for n <= 3."""
    worst = 0.0
    for _ in range(instances):
        n = int(rng.integers(1, 4))
        objective, fs = _covering_instance(rng, n)
        exact, _ = hindsight_cost(objective, fs, method="knapsack")
        grid = grid_covering_value(objective.lin, -fs.constraints.A[0], float(fs.w[0]))
        worst = max(worst, abs(grid - exact))
    return SuiteResult("knapsack_vs_grid", worst <= 2e-3, instances, worst)


def verify_knapsack_penalty(rng: np.random.Generator, instances: int = 100) -> SuiteResult:
    """Exact covering knapsack against the generic augmented-Lagrangian solver for n <= 10."""
    worst = 0.0
    errors = 0
    for _ in range(instances):
        n = int(rng.integers(1, 11))
        objective, fs = _covering_instance(rng, n)
        exact, _ = hindsight_cost(objective, fs, method="knapsack")
        try:
            generic, _ = hindsight_cost(objective, fs, method="penalty")
        except OcoError:
            logger.warning("penalty hindsight solver failed on a covering instance", exc_info=True)
            errors += 1
            continue
        worst = max(worst, abs(generic - exact))
    return SuiteResult(
        "knapsack_vs_penalty", worst <= 1e-6 and errors == 0, instances, worst, f"solver errors {errors}" if errors else ""
    )


def verify_formulas(rng: np.random.Generator, instances: int = 50) -> SuiteResult:
    """Generic bounds at sigma = L = 2 reproduce the squared-Euclidean forms; rate sums stay under the integral."""
    worst = 0.0
    for _ in range(instances):
        n = int(rng.integers(1, 6))
        consts = AssumptionConstants(
            D=float(rng.uniform(0.5, 5)),
            F_star=float(rng.uniform(0.5, 5)),
            G_star=float(rng.uniform(0.5, 5)),
            G=float(rng.uniform(0.5, 5)),
            eta=float(rng.uniform(0.1, 2)),
            slater_point=np.zeros(n),
        )
        spec = ProblemSpec(
            Box(-np.ones(n), np.ones(n)),
            AffineConstraints(np.ones((1, n)), [-1.0]),
            squared_euclidean(n),
            squared_euclidean(1),
            consts,
        )
        tc = TheoremConstants.from_spec(spec)
        chi = compute_chi(consts, spec.psi, spec.phi)
        worst = max(worst, abs(compute_E(chi, consts, spec.phi) - squared_euclidean_E(chi, consts.eta)) / tc.E)
        T = int(rng.integers(1, 500))
        epsilon = float(rng.uniform(0.0, 0.95))
        generic = regret_bound(T, epsilon, tc)
        special = squared_euclidean_regret_bound(T, epsilon, consts.D, tc.E, consts.F_star, consts.G_star)
        worst = max(worst, abs(generic - special) / special)
        if rate_sum(T, epsilon) > rate_sum_integral_bound(T, epsilon) * (1 + 1e-12):
            worst = math.inf
    return SuiteResult("formulas", worst <= 1e-12, instances, worst)


def verify_monitors(seed: int, T: int = 2000, epsilon: float = 0.5) -> SuiteResult:
    """Dual-norm and violation monitors on a short datacenter run."""
    stream = datacenter_scenario(10, seed)
    trace = run(stream.spec, stream, epsilon, T)
    tc = TheoremConstants.from_spec(stream.spec)
    dual = dual_bound_monitor(trace, tc)
    violation = proposition1_monitor(trace, tc)
    certified = bool(violation.details["certified_passed"])
    return SuiteResult(
        "monitors",
        dual.passed and violation.passed and certified,
        T,
        dual.worst_slack,
        f"max ||y|| {dual.details['max_dual_norm']:.6g} vs E {tc.E:.6g}",
    )


def all_suites(seed: int | None = None) -> list[Callable[[], SuiteResult]]:
    seed = settings.verify_seed if seed is None else seed
    return [
        verify_window_sums,
        lambda: verify_bregman_identity(np.random.default_rng(seed)),
        lambda: verify_prox(np.random.default_rng(seed + 1)),
        lambda: verify_knapsack_grid(np.random.default_rng(seed + 2)),
        lambda: verify_knapsack_penalty(np.random.default_rng(seed + 3)),
        lambda: verify_formulas(np.random.default_rng(seed + 4)),
        lambda: verify_monitors(seed),
    ]


def run_verification(seed: int | None = None) -> list[SuiteResult]:
    results = []
    for suite in all_suites(seed):
        result = suite()
        logger.info("verify %s: %s", result.name, result.status)
        results.append(result)
    return results


def format_table(results: list[SuiteResult]) -> str:
    header = f"{'suite':<22}{'status':<8}{'checked':>9}  {'worst':>12}  detail"
    rows = [
        f"{r.name:<22}{r.status:<8}{r.checked:>9}  {r.worst:>12.4e}  {r.detail}".rstrip() for r in results
    ]
    return "\n".join([header, *rows])
