"""Tests for the hindsight machinery and the regret and violation evaluators."""

import numpy as np
import pytest

from app.errors import InvalidInputError
from app.models.action_set import Box
from app.models.constraints import AffineConstraints
from app.models.costs import QuadraticCost
from app.services.engines import run
from app.services.oracle import (
    FeasibleSetSpec,
    checkpoints,
    feasible_sets,
    hindsight_cost,
    hindsight_costs_at,
    hindsight_curves,
    perturbation_stats,
    regret,
    select_b_T,
    select_shift,
    shift_condition,
    violation,
    violation_norm,
)
from app.services.scenarios import datacenter_scenario, static_lp_scenario


class TestPerturbationStats:

    def test_constant(self, make_trace):
        """Test stats of a constant perturbation."""
        stats = perturbation_stats(make_trace([[1.0], [1.0], [1.0]]))
        assert stats.underline_b.tolist() == [1.0]
        assert stats.bar_b.tolist() == [1.0]

    def test_mean_and_max(self, make_trace):
        """Test mean and componentwise extremes."""
        stats = perturbation_stats(make_trace([[0.0, 2.0], [2.0, 0.0]]))
        assert stats.underline_b.tolist() == [1.0, 1.0]
        assert stats.bar_b.tolist() == [2.0, 2.0]


class TestSelectShift:
    """Smallest certified w with sum_t <y_t, b_{t+1} - w> <= 0."""

    def test_two_round_hand_case(self):
        """Test the shift on a two-round hand case."""
        w = select_shift(np.array([[1.0], [3.0]]), np.array([[2.0], [6.0]]), np.array([1.0]), np.array([6.0]))
        assert w.tolist() == [5.0]
        assert 1.0 * (2.0 - w[0]) + 3.0 * (6.0 - w[0]) <= 0.0

    def test_constant_perturbation(self, make_trace):
        """A constant perturbation is its own shift."""
        trace = make_trace([[0.7]] * 5, ys=[[0.0], [1.0], [2.0], [0.5], [0.0]])
        assert select_b_T(trace).tolist() == [0.7]

    def test_zero_duals_give_the_mean(self, make_trace):
        """With zero duals the shift is the mean."""
        trace = make_trace([[0.0], [1.0], [5.0]])
        assert select_b_T(trace).tolist() == [2.0]
        assert shift_condition(trace, np.array([2.0])) == 0.0

    def test_clamped_into_range(self):
        """The shift stays within the observed range."""
        w = select_shift(np.array([[1.0], [1.0]]), np.array([[0.0], [0.0]]), np.array([0.5]), np.array([3.0]))
        assert w.tolist() == [0.5]

    def test_condition_holds_on_runs(self):
        """Test the shift condition on real runs."""
        stream = datacenter_scenario(5, 3)
        trace = run(stream.spec, stream, 0.5, 3000)
        w = select_b_T(trace)
        stats = perturbation_stats(trace)
        assert stats.underline_b[0] <= w[0] <= stats.bar_b[0]
        assert shift_condition(trace, w) <= 0.0

    def test_shape_mismatch(self):
        """Test mismatched shapes."""
        with pytest.raises(InvalidInputError):
            select_shift(np.zeros((2, 1)), np.zeros((3, 1)), np.zeros(1), np.ones(1))


class TestHindsightCost:

    def _cover(self, demand: float) -> FeasibleSetSpec:
        return FeasibleSetSpec(Box.unit(2), AffineConstraints.covering(np.ones(2)), np.array([demand]))

    def test_knapsack_example(self):
        """Test the knapsack oracle on a worked example."""
        value, x = hindsight_cost(QuadraticCost.linear(np.array([1.0, 2.0])), self._cover(1.5))
        assert value == 2.0
        assert x.tolist() == [1.0, 0.5]

    def test_penalty_agrees_with_knapsack(self):
        """Penalty solver matches the exact knapsack."""
        objective = QuadraticCost.linear(np.array([1.0, 2.0]))
        value, x = hindsight_cost(objective, self._cover(1.5), method="penalty")
        assert value == pytest.approx(2.0, abs=1e-6)
        assert self._cover(1.5).contains(x)

    @pytest.mark.parametrize("seed", range(5))
    def test_penalty_agrees_on_random_covers(self, seed):
        """Test both solvers on random covers."""
        rng = np.random.default_rng(seed)
        n = 2 + seed
        weights = rng.uniform(0.5, 1.5, n)
        fs = FeasibleSetSpec(Box.unit(n), AffineConstraints.covering(weights), np.array([0.4 * weights.sum()]))
        objective = QuadraticCost.linear(rng.uniform(0.0, 1.0, n))
        exact, _ = hindsight_cost(objective, fs, method="knapsack")
        generic, _ = hindsight_cost(objective, fs, method="penalty")
        assert generic == pytest.approx(exact, abs=1e-6)

    def test_slack_set_gives_unconstrained_minimum(self):
        """A slack cover gives the unconstrained minimum."""
        n = 3
        fs = FeasibleSetSpec(Box(-np.ones(n), np.ones(n)), AffineConstraints(np.ones((1, n)), np.array([-10.0])), np.zeros(1))
        value, x = hindsight_cost(QuadraticCost(np.zeros(n), q=2.0), fs)
        assert value == pytest.approx(0.0, abs=1e-12)
        assert x == pytest.approx(np.zeros(n), abs=1e-9)

    def test_quadratic_objective_with_active_cover(self):
        """Test a quadratic objective against an active cover."""
        # min ||x||^2 s.t. x_1 + x_2 >= 1 on [0, 1]^2 -> x = (1/2, 1/2)
        value, x = hindsight_cost(QuadraticCost(np.zeros(2), q=2.0), self._cover(1.0))
        assert value == pytest.approx(0.5, abs=1e-6)
        assert x == pytest.approx([0.5, 0.5], abs=1e-4)

    def test_knapsack_requested_for_quadratic(self):
        """The knapsack solver rejects quadratic objectives."""
        with pytest.raises(InvalidInputError):
            hindsight_cost(QuadraticCost(np.zeros(2), q=1.0), self._cover(1.0), method="knapsack")

    def test_unknown_method(self):
        """Test an unknown solver name."""
        with pytest.raises(InvalidInputError):
            hindsight_cost(QuadraticCost.linear(np.ones(2)), self._cover(1.0), method="simplex")


class TestViolation:

    @pytest.mark.parametrize(
        "slack, expected",
        [((-1.0, -2.0), 0.0), ((3.0, -4.0), 3.0), ((3.0, 4.0), 5.0)],
    )
    def test_positive_part_norm(self, slack, expected):
        """Only positive slack counts."""
        assert violation_norm(np.array(slack)) == expected

    def test_trace_violation_is_last_series_value(self):
        """Test the trace violation equals the last series entry."""
        stream = datacenter_scenario(3, 2)
        trace = run(stream.spec, stream, 0.5, 200)
        assert violation(trace) == trace.violation_series[-1]


class TestRegret:

    def test_horizon_one_at_the_minimizer(self):
        """Test zero regret at the minimizer."""
        stream, _ = static_lp_scenario(1, 0, cost=[1.0], a=[1.0], b=0.0)
        trace = run(stream.spec, stream, 0.5, 1)
        fs = feasible_sets(stream.spec, trace)["T"]
        assert regret(trace, fs) == 0.0

    def test_hindsight_sets_are_ordered(self):
        """Test costs over the three sets are ordered."""
        stream = datacenter_scenario(4, 6)
        trace = run(stream.spec, stream, 0.5, 2000)
        costs = hindsight_costs_at(stream.spec, trace)
        assert costs.ordered
        assert costs.cost_min >= costs.cost_T - 1e-8
        assert costs.cost_T >= costs.cost_max - 1e-8

    def test_regret_matches_cumulative_cost_minus_hindsight(self):
        """Regret is cumulative cost minus the hindsight cost."""
        stream = datacenter_scenario(4, 6)
        trace = run(stream.spec, stream, 0.5, 1000)
        costs = hindsight_costs_at(stream.spec, trace)
        fs = feasible_sets(stream.spec, trace)["T"]
        assert regret(trace, fs) == pytest.approx(trace.cum_cost[-1] - costs.cost_T, abs=1e-9)

    def test_golden_regret_at_seed_42(self, golden):
        """Regret against X_T for datacenter n=10, T=1000, epsilon=0.5 stays pinned."""
        stream = datacenter_scenario(10, 42)
        trace = run(stream.spec, stream, 0.5, 1000)
        value = regret(trace, feasible_sets(stream.spec, trace)["T"])
        assert value == pytest.approx(trace.cum_cost[-1] - hindsight_costs_at(stream.spec, trace).cost_T, abs=1e-9)
        golden.check("adaptive.datacenter_n10_seed42_T1000_eps0.5.regret", float(value))


class TestCheckpoints:

    def test_multiples_end_at_horizon(self):
        """Checkpoints end at the horizon."""
        assert checkpoints(10, 4) == [4, 8, 10]
        assert checkpoints(8, 4) == [4, 8]
        assert checkpoints(3, 5) == [3]

    def test_rejects_zero_interval(self):
        """Test a zero checkpoint interval."""
        with pytest.raises(InvalidInputError):
            checkpoints(10, 0)

    def test_curves_follow_checkpoints(self):
        """Test one curve point per checkpoint."""
        stream = datacenter_scenario(3, 1)
        trace = run(stream.spec, stream, 0.25, 450)
        curves = hindsight_curves(stream.spec, trace, 100)
        assert [p.t for p in curves] == [100, 200, 300, 400, 450]
        assert curves[-1].cost_T == pytest.approx(hindsight_costs_at(stream.spec, trace).cost_T, abs=1e-12)
        assert all(p.ordered for p in curves)
