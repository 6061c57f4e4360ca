"""
Round-by-round engines: the adaptive primal-dual method, online gradient
descent, the constant-rate baseline and the static averaged mode.

At iteration t the engine computes x_{t+1} from (x_t, y_t, f'_t(x_t)), plays
it, then learns f_{t+1} and b_{t+1} and performs the dual update with
g(x_{t+1}) + b_{t+1}. Both updates use rho_t.
"""

import logging
from collections.abc import Callable

import numpy as np

from app.errors import InvalidInputError
from app.models.costs import CostFunction
from app.models.problem import ProblemSpec
from app.models.state import AdaptiveRate, AlgoState, FixedRate, RateSchedule, RoundFeedback, step_rate
from app.models.trace import RunTrace, TraceRecorder
from app.models.vector import RealVector
from app.services.projection import project
from app.services.prox import ProxConfig, dual_step, primal_step
from app.services.scenarios import ScenarioStream, StaticStream

logger = logging.getLogger(__name__)

Feedback = RoundFeedback | Callable[[RealVector], RoundFeedback]

__all__ = [
    "step_rate",
    "initial_action",
    "initial_state",
    "advance",
    "run",
    "run_with_schedule",
    "run_ogd",
    "run_fixed_rate",
    "run_static_averaged",
]


def initial_action(spec: ProblemSpec) -> RealVector:
    """x_1: the declared initial point, else the projection of the origin onto C."""
    if spec.initial_point is not None:
        return spec.initial_point.copy()
    return project(spec.action_set, np.zeros(spec.n))


def initial_state(spec: ProblemSpec, schedule: RateSchedule) -> AlgoState:
    """t = 1 with y_1 = 0 and f'_1 = 0."""
    return AlgoState(
        t=1,
        x=initial_action(spec),
        y=np.zeros(spec.m),
        rho=schedule.rate(1),
        last_f_grad=np.zeros(spec.n),
    )


def advance(
    spec: ProblemSpec,
    state: AlgoState,
    feedback: Feedback,
    schedule: RateSchedule,
    cfg: ProxConfig | None = None,
) -> AlgoState:
    """One iteration: state at t -> state at t + 1.

    `feedback` is the round-(t+1) data, or a callable that plays x_{t+1} and
    returns it (a stream's `play`).
    """
    x_next = primal_step(spec, state.x, state.y, state.last_f_grad, state.rho, cfg)
    revealed = feedback(x_next) if callable(feedback) else feedback
    slack = spec.constraints.value(x_next) + revealed.b
    y_next = dual_step(spec, state.y, slack, state.rho, cfg)
    return AlgoState(
        t=state.t + 1,
        x=x_next,
        y=y_next,
        rho=schedule.rate(state.t + 1),
        last_f_grad=revealed.f_grad,
    )


def run(
    spec: ProblemSpec,
    stream: ScenarioStream,
    epsilon: float,
    T: int,
    cfg: ProxConfig | None = None,
) -> RunTrace:
    """Adaptive primal-dual method with rho_t = t^(-epsilon); no horizon needed."""
    return run_with_schedule(spec, stream, AdaptiveRate(epsilon), T, cfg, algorithm="adaptive")


def run_fixed_rate(
    spec: ProblemSpec,
    stream: ScenarioStream,
    T: int,
    cfg: ProxConfig | None = None,
) -> RunTrace:
    """Constant-rate baseline: rho = 1/sqrt(T) every round, so T is fixed up front."""
    return run_with_schedule(spec, stream, FixedRate.for_horizon(T), T, cfg, algorithm="fixed_rate")


def run_static_averaged(
    spec: ProblemSpec,
    f: CostFunction,
    b: RealVector,
    alpha: float,
    epsilon: float,
    T: int,
    cfg: ProxConfig | None = None,
) -> tuple[RealVector, RunTrace]:
    """Primal-dual method on a constant problem with rho_t = alpha t^(-epsilon).

    Returns the primal average x_bar_T and the trace.
    """
    stream = StaticStream(spec, f, b)
    trace = run_with_schedule(
        spec, stream, AdaptiveRate(epsilon, alpha), T, cfg, algorithm="static_averaged"
    )
    return trace.average(), trace


def run_with_schedule(
    spec: ProblemSpec,
    stream: ScenarioStream,
    schedule: RateSchedule,
    T: int,
    cfg: ProxConfig | None = None,
    algorithm: str = "adaptive",
) -> RunTrace:
    if T < 1:
        raise InvalidInputError(f"horizon must be >= 1, got {T}")
    cfg = cfg or ProxConfig.from_settings()
    epsilon = getattr(schedule, "epsilon", None)
    logger.info(
        "Starting %s run: scenario=%s T=%d schedule=%s epsilon=%s",
        algorithm, stream.name, T, schedule.label, epsilon,
    )
    recorder = TraceRecorder(algorithm, epsilon, stream.name)
    state = initial_state(spec, schedule)
    revealed = stream.play(state.x)
    recorder.record(state, revealed, spec.constraints.value(state.x))

    played: list[RoundFeedback] = []

    def observe(x: RealVector) -> RoundFeedback:
        played.append(stream.play(x))
        return played[-1]

    for _ in range(T - 1):
        state = advance(spec, state, observe, schedule, cfg)
        recorder.record(state, played.pop(), spec.constraints.value(state.x))

    trace = recorder.build(stream.assumption_breaches)
    logger.info(
        "Finished %s run: final cost=%.6g violation=%.6g max dual=%.6g",
        algorithm, trace.cum_cost[-1], trace.violation_series[-1], trace.dual_norms.max(),
    )
    return trace


def run_ogd(
    spec: ProblemSpec,
    stream: ScenarioStream,
    T: int,
    schedule: RateSchedule | None = None,
    zero_first_gradient: bool = False,
) -> RunTrace:
    """Projected online gradient descent on C: x_{t+1} = P_C(x_t - alpha_t f'_t(x_t)).

    The default schedule is alpha_t = 1/sqrt(t). With `zero_first_gradient`
    the first step uses f'_1 = 0 like the primal-dual method does.
    """
    if T < 1:
        raise InvalidInputError(f"horizon must be >= 1, got {T}")
    schedule = schedule or AdaptiveRate(0.5)
    logger.info("Starting ogd run: scenario=%s T=%d", stream.name, T)
    recorder = TraceRecorder("ogd", getattr(schedule, "epsilon", None), stream.name)
    y = np.zeros(spec.m)
    x = initial_action(spec)
    revealed = stream.play(x)
    grad = np.zeros(spec.n) if zero_first_gradient else revealed.f_grad
    recorder.record(AlgoState(1, x, y, schedule.rate(1), grad), revealed, spec.constraints.value(x))
    for t in range(1, T):
        x = project(spec.action_set, x - schedule.rate(t) * grad)
        revealed = stream.play(x)
        grad = revealed.f_grad
        recorder.record(
            AlgoState(t + 1, x, y, schedule.rate(t + 1), grad), revealed, spec.constraints.value(x)
        )
    return recorder.build(stream.assumption_breaches)
