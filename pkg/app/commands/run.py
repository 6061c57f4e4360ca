"""
`run` command: one simulation, its monitors, and its artifacts.

Produces:
- trace.csv (one row per round)
- summary.json (final regret, violation, bounds, monitors, constants, b_T,
  hindsight costs and, for the adaptive method, the fixed-rate baseline)
- plot.dat and plot.gp (gnuplot data and script)
"""

import logging
from dataclasses import dataclass

from app.commands import EXIT_BREACH, EXIT_ERROR, EXIT_OK
from app.errors import InvalidInputError, OcoError
from app.models.problem import ProblemSpec
from app.models.run_config import RunConfig
from app.models.trace import RunTrace
from app.services.engines import run, run_fixed_rate, run_ogd, run_static_averaged
from app.services.export import (
    BaselineSummary,
    HindsightSummary,
    RunSummary,
    SweepRow,
    constants_summary,
    monitor_status,
    render_plot_data,
    render_plot_script,
    render_summary,
    render_trace_csv,
    write_artifacts,
)
from app.services.metrics import (
    MonitorReport,
    TheoremConstants,
    attraction_monitor,
    bound_curves,
    dual_bound_monitor,
    loglog_slope,
    proposition1_monitor,
    regret_bound_monitor,
    violation_bound_monitor,
)
from app.services.oracle import HindsightCosts, hindsight_costs_at, hindsight_curves
from app.services.scenarios import ScenarioStream, StaticStream, build_scenario

logger = logging.getLogger(__name__)

# Trend slopes are fitted over checkpoints in the last 90% of the horizon.
TREND_START_FRACTION = 0.1


@dataclass
class RunOutcome:
    """Everything a run produced, rendered and ready for a collector to write."""

    config: RunConfig
    files: dict[str, str]
    summary: RunSummary
    sweep_row: SweepRow

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.summary.status == "pass" else EXIT_BREACH


# ============================================
# Simulation
# ============================================


def _fresh_stream(config: RunConfig) -> ScenarioStream:
    return build_scenario(config.scenario.name, config.scenario.n, config.scenario.seed)


def simulate(config: RunConfig, stream: ScenarioStream) -> RunTrace:
    """Play the configured algorithm against the stream for T rounds."""
    spec = stream.spec
    match config.algorithm:
        case "adaptive":
            return run(spec, stream, config.epsilon, config.T)
        case "fixed_rate":
            return run_fixed_rate(spec, stream, config.T)
        case "ogd":
            return run_ogd(spec, stream, config.T)
        case "static_averaged":
            if not isinstance(stream, StaticStream):
                raise InvalidInputError("static_averaged needs a static scenario such as static_lp")
            _, trace = run_static_averaged(spec, stream.cost, stream.b, config.alpha, config.epsilon, config.T)
            return trace
    raise InvalidInputError(f"unknown algorithm {config.algorithm!r}")


def evaluate_monitors(
    spec: ProblemSpec,
    trace: RunTrace,
    tc: TheoremConstants,
    curves: list[HindsightCosts],
    epsilon: float,
) -> list[MonitorReport]:
    reports = [
        proposition1_monitor(trace, tc),
        dual_bound_monitor(trace, tc),
        violation_bound_monitor(trace, tc),
        regret_bound_monitor(trace, tc, curves),
    ]
    if trace.algorithm in ("adaptive", "static_averaged"):
        reports.append(attraction_monitor(trace, tc, spec.phi, epsilon))
    return reports


def _baseline(config: RunConfig) -> tuple[BaselineSummary, float]:
    stream = _fresh_stream(config)
    trace = run_fixed_rate(stream.spec, stream, config.T)
    costs = hindsight_costs_at(stream.spec, trace)
    summary = BaselineSummary(
        rho=float(trace.rhos[0]),
        final_regret=float(trace.cum_cost[-1]) - costs.cost_T,
        final_violation=float(trace.violation_series[-1]),
        max_dual_norm=float(trace.dual_norms.max()),
        hindsight_X_T=costs.cost_T,
    )
    return summary, costs.cost_T


def _trend_slopes(trace: RunTrace, curves: list[HindsightCosts]) -> tuple[float | None, float | None]:
    start = TREND_START_FRACTION * trace.T
    points = [p for p in curves if p.t >= start]
    ts = [p.t for p in points]
    violations = [float(trace.violation_series[t - 1]) for t in ts]
    regrets = [max(float(trace.cum_cost[p.t - 1]) - p.cost_T, 1.0) for p in points]
    return loglog_slope(ts, violations), loglog_slope(ts, regrets)


def execute_run(config: RunConfig) -> RunOutcome:
    """Simulate, evaluate and render one configuration; writes nothing."""
    stream = _fresh_stream(config)
    spec = stream.spec
    trace = simulate(config, stream)
    curves = hindsight_curves(spec, trace, config.checkpoint_every)
    tc = TheoremConstants.from_spec(spec)
    reports = evaluate_monitors(spec, trace, tc, curves, config.epsilon)
    status = monitor_status(reports)

    final = curves[-1]
    regret_bounds, violation_bounds = bound_curves(trace, tc, [p.t for p in curves])
    baseline, baseline_cost = _baseline(config) if config.algorithm == "adaptive" else (None, None)
    final_regret = float(trace.cum_cost[-1]) - final.cost_T

    summary = RunSummary(
        scenario=config.scenario.name,
        n=config.scenario.n,
        seed=config.scenario.seed,
        algorithm=config.algorithm,
        epsilon=config.epsilon,
        alpha=config.alpha,
        T=config.T,
        final_regret=final_regret,
        final_violation=float(trace.violation_series[-1]),
        max_dual_norm=float(trace.dual_norms.max()),
        regret_bound=float(regret_bounds[-1]),
        violation_bound=float(violation_bounds[-1]),
        constants=constants_summary(tc),
        b_T=[float(v) for v in final.b_T],
        hindsight=HindsightSummary(
            X_min=final.cost_min,
            X_T=final.cost_T,
            X_max=final.cost_max,
            ordered=all(p.ordered for p in curves),
            baseline_X_T=baseline_cost,
        ),
        monitors=[r.to_dict() for r in reports],
        baseline=baseline,
        f_star=getattr(stream, "f_star", None),
        assumption_breaches=list(trace.assumption_breaches),
        status=status,
    )
    violation_slope, regret_slope = _trend_slopes(trace, curves)
    row = SweepRow(
        epsilon=config.epsilon,
        final_regret=final_regret,
        final_violation=summary.final_violation,
        max_dual_norm=summary.max_dual_norm,
        regret_bound=summary.regret_bound,
        violation_bound=summary.violation_bound,
        E=tc.E,
        violation_slope=violation_slope,
        regret_slope=regret_slope,
        monitors=status,
    )
    title = f"{config.scenario.name} {config.algorithm} eps={config.epsilon:g} T={config.T}"
    files = {
        "trace.csv": render_trace_csv(trace, curves),
        "summary.json": render_summary(summary),
        "plot.dat": render_plot_data(trace, curves, list(regret_bounds), list(violation_bounds)),
        "plot.gp": render_plot_script(title),
    }
    logger.info(
        "Run %s/%s eps=%g T=%d: regret=%.6g violation=%.6g status=%s",
        config.scenario.name, config.algorithm, config.epsilon, config.T,
        final_regret, summary.final_violation, status,
    )
    return RunOutcome(config=config, files=files, summary=summary, sweep_row=row)


# ============================================
# Command
# ============================================


def cmd_run(config: RunConfig) -> int:
    """Run one configuration and write its artifacts to config.output_dir."""
    try:
        outcome = execute_run(config)
        write_artifacts(config.output_dir, outcome.files)
    except (OcoError, OSError):
        logger.error("run failed", exc_info=True)
        return EXIT_ERROR
    if outcome.exit_code == EXIT_BREACH:
        logger.warning("monitor breach; see %s", config.output_dir / "summary.json")
    return outcome.exit_code
