"""
Theorem-level constants and bounds, runtime monitors, and numerical checks of
the window-sum and attraction inequalities.

Monitors never raise: they return a MonitorReport so a sweep always produces
its full pass/fail matrix.
"""

import dataclasses
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from app.errors import InvalidInputError
from app.models.bregman import BregmanGenerator
from app.models.constraints import ConstraintMap
from app.models.costs import CostFunction
from app.models.problem import AssumptionConstants, ProblemSpec
from app.models.state import step_rate
from app.models.trace import RunTrace
from app.models.vector import RealVector
from app.services.oracle import HindsightCosts
from app.settings import settings

logger = logging.getLogger(__name__)

MAX_REPORTED_BREACHES = 20


@dataclass(frozen=True, eq=False)
class TheoremConstants:
    """chi and E together with the constants they were computed from."""

    chi: float
    E: float
    consts: AssumptionConstants
    sigma_psi: float
    L_psi: float
    sigma_phi: float
    L_phi: float
    always_feasible: bool = False

    @classmethod
    def from_spec(cls, spec: ProblemSpec) -> "TheoremConstants":
        chi = compute_chi(spec.consts, spec.psi, spec.phi)
        return cls(
            chi=chi,
            E=compute_E(chi, spec.consts, spec.phi),
            consts=spec.consts,
            sigma_psi=spec.psi.sigma,
            L_psi=spec.psi.L,
            sigma_phi=spec.phi.sigma,
            L_phi=spec.phi.L,
        )

    @classmethod
    def reduced(cls, spec: ProblemSpec) -> "TheoremConstants":
        """Constants of the always-feasible setting: the duals stay at 0, so E = 0 and G_* = 0."""
        consts = dataclasses.replace(spec.consts, G_star=0.0)
        return cls(
            chi=compute_chi(consts, spec.psi, spec.phi),
            E=0.0,
            consts=consts,
            sigma_psi=spec.psi.sigma,
            L_psi=spec.psi.L,
            sigma_phi=spec.phi.sigma,
            L_phi=spec.phi.L,
            always_feasible=True,
        )


@dataclass
class MonitorReport:
    """Outcome of one runtime check.

    `worst_slack` is min over checked points of (bound - observed); negative
    means a breach. `breaches` lists the first offending round indices.
    """

    name: str
    passed: bool
    worst_slack: float
    breach_count: int = 0
    breaches: list[int] = field(default_factory=list)
    details: dict[str, float | int | bool | str | None] = field(default_factory=dict)
    extrapolated: bool = False
    gating: bool = True

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "worst_slack": self.worst_slack,
            "breach_count": self.breach_count,
            "breaches": self.breaches,
            "details": self.details,
            "baseline_extrapolated": self.extrapolated,
            "gating": self.gating,
        }


def compute_chi(c: AssumptionConstants, psi: BregmanGenerator, phi: BregmanGenerator) -> float:
    """chi = 6 G_*^2 / sigma_phi + 3 F_* D + L_psi D^2 / 2."""
    return 6.0 * c.G_star**2 / phi.sigma + 3.0 * c.F_star * c.D + psi.L * c.D**2 / 2.0


def compute_E(chi: float, c: AssumptionConstants, phi: BregmanGenerator) -> float:
    """E = sqrt((L_phi / sigma_phi)(2 chi / eta)^2 + (2 / sigma_phi) chi)."""
    if chi < 0:
        raise InvalidInputError(f"chi must be nonnegative, got {chi}")
    if not c.eta > 0:
        raise InvalidInputError(f"eta must be positive, got {c.eta}")
    return math.sqrt(phi.L / phi.sigma * (2.0 * chi / c.eta) ** 2 + 2.0 / phi.sigma * chi)


def squared_euclidean_E(chi: float, eta: float) -> float:
    """E for psi = phi = ||.||^2 (sigma = L = 2): sqrt(4 chi^2 / eta^2 + chi)."""
    return math.sqrt(4.0 * chi**2 / eta**2 + chi)


def rate_sum(T: int, epsilon: float, alpha: float = 1.0) -> float:
    """sum_{t=1}^T alpha t^(-epsilon), summed literally."""
    return alpha * math.fsum(step_rate(t, epsilon) for t in range(1, T + 1))


def rate_sum_integral_bound(T: int, epsilon: float) -> float:
    """1 + T^(1-epsilon) / (1 - epsilon), the integral upper bound of rate_sum."""
    return 1.0 + T ** (1.0 - epsilon) / (1.0 - epsilon)


def regret_bound_for_rates(rates: Sequence[float], tc: TheoremConstants) -> float:
    """(1/rho_T)(L_psi D^2/2 + L_phi E^2/2) + (2 F_*^2/sigma_psi + 2 G_*^2/sigma_phi) sum rho_t."""
    if len(rates) == 0:
        raise InvalidInputError("regret bound needs at least one rate")
    c = tc.consts
    head = (tc.L_psi * c.D**2 / 2.0 + tc.L_phi * tc.E**2 / 2.0) / rates[-1]
    tail = (2.0 * c.F_star**2 / tc.sigma_psi + 2.0 * c.G_star**2 / tc.sigma_phi) * math.fsum(rates)
    return head + tail


def regret_bound(T: int, epsilon: float, tc: TheoremConstants) -> float:
    if T < 1:
        raise InvalidInputError(f"horizon must be >= 1, got {T}")
    return regret_bound_for_rates([step_rate(t, epsilon) for t in range(1, T + 1)], tc)


def violation_bound_for_rate(rho: float, tc: TheoremConstants) -> float:
    """G + L_phi E / (2 rho)."""
    return tc.consts.G + tc.L_phi * tc.E / (2.0 * rho)


def violation_bound(T: int, epsilon: float, tc: TheoremConstants) -> float:
    return violation_bound_for_rate(step_rate(T, epsilon), tc)


def squared_euclidean_regret_bound(
    T: int, epsilon: float, D: float, E: float, F_star: float, G_star: float
) -> float:
    """(1/rho_T)(D^2 + E^2) + (F_*^2 + G_*^2) sum rho_t, for sigma = L = 2."""
    return (D**2 + E**2) / step_rate(T, epsilon) + (F_star**2 + G_star**2) * rate_sum(T, epsilon)


def _report(
    name: str,
    slack: NDArray[np.float64],
    rounds: NDArray[np.int64],
    tolerance: float,
    extrapolated: bool = False,
    **details,
) -> MonitorReport:
    failing = rounds[slack < -tolerance]
    report = MonitorReport(
        name=name,
        passed=failing.size == 0,
        worst_slack=float(slack.min()) if slack.size else math.inf,
        breach_count=int(failing.size),
        breaches=[int(t) for t in failing[:MAX_REPORTED_BREACHES]],
        details=details,
        extrapolated=extrapolated,
    )
    if not report.passed:
        logger.warning("%s monitor: %d breaches, worst slack %.3e", name, report.breach_count, report.worst_slack)
    return report


def _extrapolated(trace: RunTrace) -> bool:
    # Bounds are licensed for rho_t = t^(-eps), which starts at 1.
    return bool(trace.algorithm not in ("adaptive", "static_averaged") or trace.rhos[0] != 1.0)


def proposition1_monitor(
    trace: RunTrace,
    tc: TheoremConstants,
    epsilon: float | None = None,
    tolerance: float | None = None,
) -> MonitorReport:
    """V(T) <= G + L_phi ||y_T|| / (2 rho_T) at every prefix T.

    rho_T is T^(-epsilon) when epsilon is given, else the recorded rate. The
    report also carries the margin against G + L_phi ||y_T|| / rho_T, the form
    the dual recursion certifies directly.
    """
    tolerance = settings.bound_tolerance if tolerance is None else tolerance
    rounds = np.arange(1, trace.T + 1)
    if epsilon is None:
        rhos = trace.rhos
    else:
        rhos = np.array([step_rate(int(t), epsilon) for t in rounds])
    dual_term = tc.L_phi * trace.dual_norms / rhos
    stated = tc.consts.G + dual_term / 2.0 - trace.violation_series
    certified = tc.consts.G + dual_term - trace.violation_series
    return _report(
        "proposition1",
        stated,
        rounds,
        tolerance,
        _extrapolated(trace),
        certified_worst_slack=float(certified.min()),
        certified_passed=bool(np.all(certified >= -tolerance)),
    )


def dual_bound_monitor(trace: RunTrace, tc: TheoremConstants, tolerance: float | None = None) -> MonitorReport:
    """max_t ||y_t|| <= E."""
    tolerance = settings.bound_tolerance if tolerance is None else tolerance
    norms = trace.dual_norms
    argmax = int(np.argmax(norms))
    return _report(
        "dual_bound",
        tc.E - norms,
        np.arange(1, trace.T + 1),
        tolerance,
        _extrapolated(trace),
        max_dual_norm=float(norms[argmax]),
        argmax_t=argmax + 1,
        E=tc.E,
    )


def violation_bound_monitor(trace: RunTrace, tc: TheoremConstants, tolerance: float | None = None) -> MonitorReport:
    """V(t) <= G + L_phi E / (2 rho_t) at every round."""
    tolerance = settings.bound_tolerance if tolerance is None else tolerance
    bounds = tc.consts.G + tc.L_phi * tc.E / (2.0 * trace.rhos)
    slack = bounds - trace.violation_series
    certified = tc.consts.G + tc.L_phi * tc.E / trace.rhos - trace.violation_series
    return _report(
        "violation_bound",
        slack,
        np.arange(1, trace.T + 1),
        tolerance,
        _extrapolated(trace),
        final_bound=float(bounds[-1]),
        certified_worst_slack=float(certified.min()),
    )


def bound_curves(
    trace: RunTrace, tc: TheoremConstants, ts: Sequence[int]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Regret and violation bounds at rounds ts under the trace's own rates."""
    ts = np.asarray(ts, dtype=np.int64)
    c = tc.consts
    head_const = tc.L_psi * c.D**2 / 2.0 + tc.L_phi * tc.E**2 / 2.0
    tail_const = 2.0 * c.F_star**2 / tc.sigma_psi + 2.0 * c.G_star**2 / tc.sigma_phi
    rate_prefix = np.cumsum(trace.rhos)
    rho_t = trace.rhos[ts - 1]
    regret = head_const / rho_t + tail_const * rate_prefix[ts - 1]
    violation = c.G + tc.L_phi * tc.E / (2.0 * rho_t)
    return regret, violation


def regret_bound_monitor(
    trace: RunTrace,
    tc: TheoremConstants,
    curves: Sequence[HindsightCosts],
    tolerance: float | None = None,
) -> MonitorReport:
    """R(t) against X_t <= the regret bound at every checkpoint t."""
    tolerance = settings.bound_tolerance if tolerance is None else tolerance
    ts = np.array([point.t for point in curves], dtype=np.int64)
    regrets = np.array([trace.cum_cost[point.t - 1] - point.cost_T for point in curves])
    bounds, _ = bound_curves(trace, tc, ts)
    return _report(
        "regret_bound",
        bounds - regrets,
        ts,
        tolerance,
        _extrapolated(trace),
        final_regret=float(regrets[-1]),
        final_bound=float(bounds[-1]),
    )


def attraction_monitor(
    trace: RunTrace,
    tc: TheoremConstants,
    phi: BregmanGenerator,
    epsilon: float,
    samples: int = 1000,
    tolerance: float | None = None,
) -> MonitorReport:
    """B_phi(0, y_{t+k}) - B_phi(0, y_t) <= chi - eta sum_{i in S} rho_i ||y_t|| for k <= ceil(t^eps).

    Checked on up to `samples` evenly spaced t whose window S fits in the trace.
    """
    tolerance = settings.bound_tolerance if tolerance is None else tolerance
    origin = np.zeros(trace.m)
    phi_origin = phi.value(origin)
    divergence = np.array([phi_origin - phi.value(y) + float(np.dot(y, phi.gradient(y))) for y in trace.ys])
    rate_prefix = np.concatenate(([0.0], np.cumsum(trace.rhos)))
    eligible = [t for t in range(1, trace.T + 1) if t + math.ceil(t**epsilon) <= trace.T]
    if not eligible:
        return MonitorReport("attraction", True, math.inf, details={"checked": 0}, gating=False)
    stride = max(1, len(eligible) // samples)
    checked = eligible[::stride]
    slack = []
    for t in checked:
        width = math.ceil(t**epsilon)
        window_rates = rate_prefix[t + width] - rate_prefix[t - 1]
        rhs = tc.chi - tc.consts.eta * window_rates * trace.dual_norms[t - 1]
        lhs = divergence[t : t + width].max() - divergence[t - 1]
        slack.append(rhs - lhs)
    report = _report(
        "attraction",
        np.array(slack),
        np.array(checked, dtype=np.int64),
        tolerance,
        _extrapolated(trace),
        checked=len(checked),
    )
    report.gating = False
    return report


def lemma5_window(t: int, epsilon: float) -> range:
    """S = {t, ..., t + ceil(t^epsilon)}."""
    return range(t, t + math.ceil(t**epsilon) + 1)


def lemma5_check(t: int, epsilon: float) -> tuple[float, float, bool]:
    """Literal window sums of rho_i and rho_i^2 over S.

    Passes when log 2 <= sum rho <= 3 and sum rho^2 <= 3.
    """
    rates = [step_rate(i, epsilon) for i in lemma5_window(t, epsilon)]
    sum_rho = math.fsum(rates)
    sum_rho_sq = math.fsum(r * r for r in rates)
    return sum_rho, sum_rho_sq, math.log(2.0) <= sum_rho <= 3.0 and sum_rho_sq <= 3.0


@dataclass
class WindowSweep:
    epsilon: float
    checked: int
    failures: list[int]
    min_sum: float
    max_sum: float
    max_sum_sq: float

    @property
    def passed(self) -> bool:
        return not self.failures


def lemma5_sweep(ts: Sequence[int], epsilons: Sequence[float]) -> list[WindowSweep]:
    """Window sums for many t at once via prefix sums of rho_i and rho_i^2."""
    ts = np.asarray(sorted(set(int(t) for t in ts)), dtype=np.int64)
    if ts.size == 0 or ts[0] < 1:
        raise InvalidInputError("window sweep needs round indices >= 1")
    results = []
    for epsilon in epsilons:
        widths = np.array([math.ceil(int(t) ** epsilon) for t in ts], dtype=np.int64)
        last = int((ts + widths).max())
        indices = np.arange(1, last + 1, dtype=np.float64)
        rates = indices ** (-epsilon) if epsilon > 0 else np.ones_like(indices)
        prefix = np.concatenate(([0.0], np.cumsum(rates)))
        prefix_sq = np.concatenate(([0.0], np.cumsum(rates * rates)))
        sums = prefix[ts + widths] - prefix[ts - 1]
        sums_sq = prefix_sq[ts + widths] - prefix_sq[ts - 1]
        ok = (sums >= math.log(2.0)) & (sums <= 3.0) & (sums_sq <= 3.0)
        results.append(
            WindowSweep(
                epsilon=float(epsilon),
                checked=int(ts.size),
                failures=[int(t) for t in ts[~ok]],
                min_sum=float(sums.min()),
                max_sum=float(sums.max()),
                max_sum_sq=float(sums_sq.max()),
            )
        )
    return results


def default_window_grid() -> list[int]:
    """t in {1..10^4} plus 30 log-spaced points up to 10^6."""
    dense = list(range(1, 10_001))
    sparse = np.unique(np.round(np.logspace(4, 6, 30)).astype(np.int64)).tolist()
    return sorted(set(dense) | set(sparse))


def loglog_slope(ts: Sequence[float], values: Sequence[float]) -> float | None:
    """Least-squares slope of log(value) against log(t) over the positive values."""
    ts = np.asarray(ts, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    keep = (values > 0) & (ts > 0)
    if keep.sum() < 2:
        return None
    slope, _ = np.polyfit(np.log(ts[keep]), np.log(values[keep]), 1)
    return float(slope)


def nonincreasing_after(values: Sequence[float], burn_in: int = 0, wiggle: float = 0.05) -> bool:
    """True when no value beyond burn_in exceeds the running minimum by more than `wiggle` (relative)."""
    running = math.inf
    for value in list(values)[burn_in:]:
        if value > running * (1.0 + wiggle) + 1e-15:
            return False
        running = min(running, value)
    return True


@dataclass
class Corollary2Report:
    Ts: list[int]
    optimality_gaps: list[float]
    feasibility_gaps: list[float]
    optimality_exponent: float | None
    feasibility_exponent: float | None
    alpha: float
    epsilon: float

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def corollary2_report(
    samples: Sequence[tuple[int, RealVector]],
    f: CostFunction,
    f_star: float,
    constraints: ConstraintMap,
    b: RealVector,
    alpha: float,
    epsilon: float,
) -> Corollary2Report:
    """Gaps f(x_bar_T) - f* and ||[g(x_bar_T) + b]^+|| over a T-grid, with fitted decay exponents.

    Exponents are fitted to the absolute gaps; None when fewer than two are nonzero.
    """
    Ts = [int(T) for T, _ in samples]
    optimality = [f.value(x_bar) - f_star for _, x_bar in samples]
    feasibility = [
        float(np.linalg.norm(np.maximum(constraints.value(x_bar) + b, 0.0))) for _, x_bar in samples
    ]
    return Corollary2Report(
        Ts=Ts,
        optimality_gaps=optimality,
        feasibility_gaps=feasibility,
        optimality_exponent=loglog_slope(Ts, [abs(g) for g in optimality]),
        feasibility_exponent=loglog_slope(Ts, feasibility),
        alpha=alpha,
        epsilon=epsilon,
    )
