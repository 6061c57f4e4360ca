"""Tests for the primal-dual engine, online gradient descent and the averaged static mode."""

import dataclasses
import math

import numpy as np
import pytest

from app.errors import InvalidInputError
from app.models.action_set import EuclideanBall
from app.models.bregman import HalfSquaredEuclidean
from app.models.constraints import AffineConstraints
from app.models.costs import QuadraticCost
from app.models.problem import AssumptionConstants, ProblemSpec
from app.models.state import AdaptiveRate, RoundFeedback
from app.services.engines import (
    advance,
    initial_state,
    run,
    run_fixed_rate,
    run_ogd,
    run_static_averaged,
)
from app.services.metrics import TheoremConstants, violation_bound_monitor
from app.services.oracle import hindsight_costs_at
from app.services.prng import Prng
from app.services.scenarios import (
    StaticStream,
    all_feasible_scenario,
    datacenter_scenario,
    static_lp_scenario,
)


def one_dim_lp():
    """min x s.t. x >= 0.5 on [0, 1]."""
    return static_lp_scenario(1, 0, cost=[1.0], a=[1.0], b=0.5)


def ball_spec() -> ProblemSpec:
    """Unit disc, constraint x_1 - 5 <= 0 never active."""
    consts = AssumptionConstants(D=2.0, F_star=2.0, G_star=6.0, G=6.0, eta=3.0, slater_point=np.zeros(2))
    return ProblemSpec(
        EuclideanBall(np.zeros(2), 1.0),
        AffineConstraints(np.array([[1.0, 0.0]]), np.array([-5.0])),
        HalfSquaredEuclidean(),
        HalfSquaredEuclidean(),
        consts,
        initial_point=np.array([0.6, 0.8]),
    )


class TestAdvance:

    def test_first_step_stays_put(self):
        """The first step from the box corner stays put while the dual grows."""
        stream, _ = one_dim_lp()
        state = initial_state(stream.spec, AdaptiveRate(0.5))
        feedback = RoundFeedback(f_value=0.0, f_grad=np.array([1.0]), b=np.array([0.5]))
        nxt = advance(stream.spec, state, feedback, AdaptiveRate(0.5))
        assert nxt.t == 2
        assert nxt.x.tolist() == state.x.tolist()
        # slack g(x_2) + b_2 = 0.5 at rate 1
        assert nxt.y.tolist() == [0.5]
        assert nxt.rho == pytest.approx(2**-0.5)
        assert nxt.last_f_grad.tolist() == [1.0]

    def test_accepts_a_play_callable(self):
        """Test run with a plain callable for feedback."""
        stream, _ = one_dim_lp()
        state = initial_state(stream.spec, AdaptiveRate(0.0))
        stream.play(state.x)
        nxt = advance(stream.spec, state, stream.play, AdaptiveRate(0.0))
        assert stream.round == 2
        assert nxt.y.tolist() == [0.5]


class TestRun:
    """The adaptive primal-dual method."""

    def test_datacenter_three_rounds_by_hand(self):
        """Test three datacenter rounds against hand-computed iterates."""
        prng = Prng(42)
        u = [prng.u01() for _ in range(8)]
        a = np.array([0.5 + u[0], 0.5 + u[1]])
        total = math.fsum(a)
        half = 0.5 * total

        stream = datacenter_scenario(2, 42)
        trace = run(stream.spec, stream, 0.0, 3)

        assert stream.a.tolist() == a.tolist()
        assert trace.xs.tolist() == [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]
        assert trace.bs[:, 0].tolist() == [half, half, half]
        assert trace.f_values.tolist() == [0.0, 0.0, u[6]]
        assert trace.ys[0, 0] == 0.0
        assert trace.ys[1, 0] == half
        assert trace.ys[2, 0] == pytest.approx(half + (half - a[0]), rel=1e-15)

    def test_static_lp_cycle(self):
        """Test the constant-rate cycle on the one-variable LP."""
        stream, f_star = one_dim_lp()
        trace = run(stream.spec, stream, 0.0, 16)
        assert f_star == 0.5
        assert trace.xs[:, 0].tolist() == [0, 0, 0, 0, 0.5, 1, 1, 0.5, 0, 0, 0.5, 1, 1, 0.5, 0, 0]
        assert trace.ys[:10, 0].tolist() == [0, 0.5, 1, 1.5, 1.5, 1, 0.5, 0.5, 1, 1.5]

    @pytest.mark.parametrize("T, expected", [(100, 0.48), (1000, 0.498), (10_000, 0.4998)])
    def test_static_lp_average(self, T, expected):
        """Averaged iterate on the one-variable LP."""
        stream, _ = one_dim_lp()
        trace = run(stream.spec, stream, 0.0, T)
        assert trace.average().tolist() == [expected]

    def test_horizon_one(self):
        """Test a single round."""
        stream = datacenter_scenario(3, 1)
        trace = run(stream.spec, stream, 0.5, 1)
        assert trace.T == 1
        assert trace.xs.tolist() == [[0.0, 0.0, 0.0]]
        assert trace.ys.tolist() == [[0.0]]

    def test_deterministic(self):
        """Same seed, same trace."""
        traces = []
        for _ in range(2):
            stream = datacenter_scenario(5, 11)
            traces.append(run(stream.spec, stream, 0.25, 300))
        first, second = traces
        assert np.array_equal(first.xs, second.xs)
        assert np.array_equal(first.ys, second.ys)
        assert np.array_equal(first.f_values, second.f_values)

    def test_iterates_stay_feasible(self):
        """Every iterate lies in the action set."""
        stream = datacenter_scenario(4, 3)
        trace = run(stream.spec, stream, 0.5, 500)
        assert np.all(trace.xs >= 0.0) and np.all(trace.xs <= 1.0)
        assert np.all(trace.ys >= 0.0)

    def test_records_rates(self):
        """Test recorded rates follow t^(-epsilon)."""
        stream = datacenter_scenario(2, 5)
        trace = run(stream.spec, stream, 0.5, 4)
        assert trace.rhos.tolist() == pytest.approx([1.0, 2**-0.5, 3**-0.5, 0.5])

    def test_rejects_empty_horizon(self):
        """Test T = 0 is rejected."""
        stream = datacenter_scenario(2, 5)
        with pytest.raises(InvalidInputError):
            run(stream.spec, stream, 0.5, 0)

    def test_exhausted_stream(self):
        """Test playing past the stream horizon."""
        stream, _ = one_dim_lp()
        stream.horizon = 3
        with pytest.raises(InvalidInputError):
            run(stream.spec, stream, 0.5, 4)

    @pytest.mark.parametrize("epsilon", [0.0, 0.5, 0.9])
    def test_matches_ogd_when_constraints_never_bind(self, epsilon):
        """Without active constraints the method reduces to projected OGD."""
        first = all_feasible_scenario(6, 8)
        second = all_feasible_scenario(6, 8)
        primal_dual = run(first.spec, first, epsilon, 2000)
        ogd = run_ogd(second.spec, second, 2000, schedule=AdaptiveRate(epsilon), zero_first_gradient=True)
        assert np.array_equal(primal_dual.xs, ogd.xs)
        assert not np.any(primal_dual.ys)


class TestRunOgd:

    def _stream(self, slope: float) -> StaticStream:
        base, _ = one_dim_lp()
        spec = dataclasses.replace(base.spec, initial_point=np.array([1.0]))
        return StaticStream(spec, QuadraticCost.linear(np.array([slope])), np.array([0.0]))

    def test_zero_gradient_stays_at_start(self):
        """Test OGD with zero gradients."""
        stream = self._stream(0.0)
        trace = run_ogd(stream.spec, stream, 20)
        assert trace.xs[:, 0].tolist() == [1.0] * 20

    def test_unit_slope(self):
        """Test OGD on a unit slope."""
        stream = self._stream(1.0)
        trace = run_ogd(stream.spec, stream, 10)
        expected = [1.0]
        for t in range(1, 10):
            expected.append(max(0.0, expected[-1] - 1.0 / math.sqrt(t)))
        assert trace.xs[:, 0].tolist() == pytest.approx(expected, abs=1e-15)

    def test_dual_is_zero(self):
        """OGD records zero duals."""
        stream = self._stream(1.0)
        trace = run_ogd(stream.spec, stream, 10)
        assert not np.any(trace.ys)


class TestFixedRate:

    def test_rate_is_one_over_root_horizon(self):
        """Test the baseline rate is 1/sqrt(T)."""
        stream = datacenter_scenario(3, 2)
        trace = run_fixed_rate(stream.spec, stream, 4)
        assert trace.rhos.tolist() == [0.5, 0.5, 0.5, 0.5]
        assert trace.algorithm == "fixed_rate"

    def test_golden_values_at_seed_42(self, golden):
        """Final violation and regret at T=10000 are reproducible and pinned."""
        stream = datacenter_scenario(10, 42)
        trace = run_fixed_rate(stream.spec, stream, 10_000)
        again = datacenter_scenario(10, 42)
        assert np.array_equal(run_fixed_rate(again.spec, again, 10_000).xs, trace.xs)
        costs = hindsight_costs_at(stream.spec, trace)
        final_violation = float(trace.violation_series[-1])
        final_regret = float(trace.cum_cost[-1] - costs.cost_T)
        assert final_violation >= 0.0
        assert math.isfinite(final_regret)
        golden.check("fixed_rate.datacenter_n10_seed42_T10000.violation", final_violation)
        golden.check("fixed_rate.datacenter_n10_seed42_T10000.regret", final_regret)

    def test_baseline_and_adaptive_share_the_stream(self):
        """Both methods stay within their violation bound on the same arrivals."""
        results = []
        for play in (
            lambda s: run_fixed_rate(s.spec, s, 5000),
            lambda s: run(s.spec, s, 0.5, 5000),
        ):
            stream = datacenter_scenario(10, 42)
            trace = play(stream)
            report = violation_bound_monitor(trace, TheoremConstants.from_spec(stream.spec))
            assert report.passed
            assert report.breach_count == 0
            results.append(trace)
        fixed, adaptive = results
        assert fixed.bs[0] == pytest.approx(adaptive.bs[0])
        assert fixed.algorithm == "fixed_rate"
        assert adaptive.algorithm == "adaptive"


class TestStaticAveraged:

    def test_horizon_one_returns_start(self):
        """Test a one-round static run."""
        spec = ball_spec()
        x_bar, trace = run_static_averaged(spec, QuadraticCost(np.zeros(2), q=2.0), np.zeros(1), 1.0, 0.0, 1)
        assert x_bar.tolist() == [0.6, 0.8]
        assert trace.T == 1

    def test_average_approaches_minimizer(self):
        """Averaged iterate approaches the unconstrained minimizer."""
        T = 10_000
        x_bar, trace = run_static_averaged(ball_spec(), QuadraticCost(np.zeros(2), q=2.0), np.zeros(1), 1.0, 0.0, T)
        assert np.linalg.norm(x_bar) <= 2.0 / T + 1e-9
        assert not np.any(trace.ys)
        assert trace.algorithm == "static_averaged"

    def test_alpha_scales_rates(self):
        """Test alpha scales every rate."""
        stream, _ = one_dim_lp()
        _, trace = run_static_averaged(stream.spec, stream.cost, stream.b, 0.5, 0.5, 4)
        assert trace.rhos.tolist() == pytest.approx([0.5, 0.5 * 2**-0.5, 0.5 * 3**-0.5, 0.25])
