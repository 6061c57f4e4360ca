"""Tests for the primal and dual proximal steps."""

import numpy as np
import pytest

from app.errors import ConvergenceError, InvalidInputError
from app.models.action_set import Box, EuclideanBall
from app.models.bregman import HalfSquaredEuclidean, WeightedQuadratic
from app.models.constraints import AffineConstraints, GeneralConstraints
from app.models.problem import AssumptionConstants, ProblemSpec
from app.services.prox import (
    ProxConfig,
    dual_step,
    dual_step_iterative,
    primal_gradient_mapping,
    primal_step,
    primal_step_iterative,
)

TIGHT = ProxConfig(inner_tol=1e-12, inner_max_iters=10000)


def interval_spec(phi=None) -> ProblemSpec:
    """C = [0, 1], g(x) = -x."""
    consts = AssumptionConstants(D=1.0, F_star=2.0, G_star=1.0, G=1.0, eta=0.5, slater_point=np.ones(1))
    return ProblemSpec(
        Box.unit(1),
        AffineConstraints.covering(np.ones(1)),
        HalfSquaredEuclidean(),
        phi or HalfSquaredEuclidean(),
        consts,
    )


def disc_spec() -> ProblemSpec:
    """Unit disc with the convex constraint ||x||^2 - 1/2 <= 0."""
    consts = AssumptionConstants(D=2.0, F_star=1.0, G_star=1.0, G=1.0, eta=0.25, slater_point=np.zeros(2))
    constraints = GeneralConstraints(
        value_fn=lambda x: np.array([x @ x - 0.5]),
        jacobian_fn=lambda x: (2.0 * x).reshape(1, -1),
        dims=(1, 2),
        smoothness=np.array([2.0]),
    )
    return ProblemSpec(EuclideanBall(np.zeros(2), 1.0), constraints, HalfSquaredEuclidean(), HalfSquaredEuclidean(), consts)


class TestPrimalStep:
    """argmin over C of the linearised Lagrangian plus the Bregman proximity term."""

    def test_closed_form_example(self):
        """Test the closed-form primal step."""
        x_next = primal_step(interval_spec(), np.array([0.95]), np.array([3.0]), np.array([2.0]), 0.1)
        assert x_next.tolist() == [1.0]

    @pytest.mark.parametrize("rho", [0.01, 1.0, 50.0])
    def test_zero_gradient_keeps_x(self, rho):
        """Zero gradient leaves x in place."""
        x = np.array([0.4])
        assert primal_step(interval_spec(), x, np.zeros(1), np.zeros(1), rho).tolist() == [0.4]

    def test_iterative_matches_closed_form(self):
        """Iterative primal step matches the closed form."""
        spec = interval_spec()
        for x, y, f_grad, rho in [(0.2, 0.5, -1.0, 0.3), (0.95, 3.0, 2.0, 0.1), (0.0, 0.0, 5.0, 2.0)]:
            args = (np.array([x]), np.array([y]), np.array([f_grad]), rho)
            assert primal_step_iterative(spec, *args, cfg=TIGHT) == pytest.approx(primal_step(spec, *args), abs=1e-10)

    def test_general_constraints_use_the_iterative_solver(self):
        """Test callable constraints take the iterative path."""
        spec = disc_spec()
        x, y, f_grad, rho = np.array([0.5, 0.5]), np.array([1.0]), np.array([-1.0, 0.0]), 0.5
        x_next = primal_step(spec, x, y, f_grad, rho, TIGHT)
        assert spec.action_set.contains(x_next, tol=1e-9)
        assert primal_gradient_mapping(spec, x, y, f_grad, rho, x_next) <= 1e-9

    def test_iteration_cap(self):
        """Test the inner iteration cap."""
        cfg = ProxConfig(inner_tol=1e-15, inner_max_iters=1)
        with pytest.raises(ConvergenceError) as exc:
            primal_step_iterative(disc_spec(), np.array([0.5, 0.5]), np.array([1.0]), np.array([-1.0, 0.0]), 0.5, cfg)
        assert exc.value.residual > 0

    def test_rejects_nonpositive_rate(self):
        """Test a nonpositive rate."""
        with pytest.raises(InvalidInputError):
            primal_step(interval_spec(), np.array([0.5]), np.zeros(1), np.zeros(1), 0.0)


class TestDualStep:
    """argmax over the orthant of the slack term minus the Bregman proximity term."""

    def _spec(self, m: int, phi=None) -> ProblemSpec:
        consts = AssumptionConstants(D=1.0, F_star=1.0, G_star=1.0, G=1.0, eta=0.5, slater_point=np.ones(1))
        return ProblemSpec(
            Box.unit(1),
            AffineConstraints(-np.ones((m, 1)), np.zeros(m)),
            HalfSquaredEuclidean(),
            phi or HalfSquaredEuclidean(),
            consts,
        )

    def test_projects_onto_orthant(self):
        """Dual step projects onto the nonnegative orthant."""
        assert dual_step(self._spec(2), np.zeros(2), np.array([1.0, -2.0]), 1.0).tolist() == [1.0, 0.0]

    def test_half_step(self):
        """Test a half-rate dual step."""
        assert dual_step(self._spec(1), np.array([2.0]), np.array([-1.0]), 0.5).tolist() == [1.5]

    def test_zero_slack_keeps_y(self):
        """Zero slack leaves y in place."""
        y = np.array([0.3, 1.7])
        assert dual_step(self._spec(2), y, np.zeros(2), 0.8).tolist() == [0.3, 1.7]

    def test_weighted_generator_divides_by_weights(self):
        """Test the weighted dual step."""
        spec = self._spec(2, WeightedQuadratic(np.array([2.0, 4.0])))
        assert dual_step(spec, np.array([1.0, 1.0]), np.array([1.0, -8.0]), 1.0).tolist() == [1.5, 0.0]

    @pytest.mark.parametrize("phi", [HalfSquaredEuclidean(), WeightedQuadratic(np.array([0.5, 2.0]))])
    def test_iterative_matches_closed_form(self, phi):
        """Iterative dual step matches the closed form."""
        spec = self._spec(2, phi)
        y, slack = np.array([0.5, 2.0]), np.array([0.7, -3.0])
        assert dual_step_iterative(phi, y, slack, 0.4, TIGHT) == pytest.approx(dual_step(spec, y, slack, 0.4), abs=1e-10)
