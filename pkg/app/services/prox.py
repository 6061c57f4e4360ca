"""
Primal and dual proximal subproblems of the primal-dual engine.

Both are solved in closed form when the geometry allows it (affine constraints
with a half squared Euclidean primal generator; quadratic dual generators) and
by projected gradient on the strongly convex subproblem otherwise.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from app.errors import ConvergenceError, InvalidInputError
from app.models.bregman import BregmanGenerator, HalfSquaredEuclidean, WeightedQuadratic
from app.models.constraints import AffineConstraints
from app.models.costs import CostFunction
from app.models.problem import ProblemSpec
from app.models.vector import RealVector
from app.services.bregman import bregman_divergence
from app.services.projection import project, project_nonneg
from app.settings import settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProxConfig:
    """Inner solver tolerance (gradient-mapping norm) and iteration cap."""

    inner_tol: float = 1e-10
    inner_max_iters: int = 10000

    def __post_init__(self):
        if not self.inner_tol > 0:
            raise InvalidInputError("inner_tol must be positive")
        if self.inner_max_iters < 1:
            raise InvalidInputError("inner_max_iters must be >= 1")

    @classmethod
    def from_settings(cls) -> "ProxConfig":
        return cls(inner_tol=settings.prox_inner_tol, inner_max_iters=settings.prox_inner_max_iters)


def primal_step(
    spec: ProblemSpec,
    x: RealVector,
    y: RealVector,
    f_grad: RealVector,
    rho: float,
    cfg: ProxConfig | None = None,
) -> RealVector:
    """argmin_{u in C} <f_grad, u> + <y, g(u)> + (1/rho) B_psi(u, x).

    The perturbation does not enter: the primal update never sees b_t.
    """
    if not rho > 0:
        raise InvalidInputError(f"step size must be positive, got {rho}")
    if isinstance(spec.constraints, AffineConstraints) and isinstance(spec.psi, HalfSquaredEuclidean):
        return project(spec.action_set, x - rho * (f_grad + spec.constraints.A.T @ y))
    return primal_step_iterative(spec, x, y, f_grad, rho, cfg)


def _primal_gradient(spec: ProblemSpec, x, y, f_grad, rho) -> Callable[[RealVector], RealVector]:
    psi_x = spec.psi.gradient(x)

    def grad(u: RealVector) -> RealVector:
        return f_grad + spec.constraints.jacobian(u).T @ y + (spec.psi.gradient(u) - psi_x) / rho

    return grad


def _primal_smoothness(spec: ProblemSpec, y: RealVector, rho: float) -> float:
    return spec.psi.L / rho + spec.constraints.weighted_gradient_lipschitz(y)


def primal_gradient_mapping(
    spec: ProblemSpec,
    x: RealVector,
    y: RealVector,
    f_grad: RealVector,
    rho: float,
    u: RealVector,
) -> float:
    """Norm of the projected-gradient mapping of the primal subproblem at u."""
    lipschitz = _primal_smoothness(spec, y, rho)
    grad = _primal_gradient(spec, x, y, f_grad, rho)(u)
    return lipschitz * float(np.linalg.norm(u - project(spec.action_set, u - grad / lipschitz)))


def primal_step_iterative(
    spec: ProblemSpec,
    x: RealVector,
    y: RealVector,
    f_grad: RealVector,
    rho: float,
    cfg: ProxConfig | None = None,
) -> RealVector:
    """Projected gradient with step 1/L_sub, started at x."""
    if not rho > 0:
        raise InvalidInputError(f"step size must be positive, got {rho}")
    cfg = cfg or ProxConfig.from_settings()
    lipschitz = _primal_smoothness(spec, y, rho)
    grad = _primal_gradient(spec, x, y, f_grad, rho)
    u = np.array(x, dtype=np.float64, copy=True)
    mapping = float("inf")
    for iteration in range(cfg.inner_max_iters):
        u_next = project(spec.action_set, u - grad(u) / lipschitz)
        mapping = lipschitz * float(np.linalg.norm(u - u_next))
        if mapping <= cfg.inner_tol:
            logger.debug("primal subproblem solved in %d iterations", iteration)
            return u
        u = u_next
    raise ConvergenceError("primal subproblem did not converge", mapping)


def dual_step(
    spec: ProblemSpec,
    y: RealVector,
    slack: RealVector,
    rho: float,
    cfg: ProxConfig | None = None,
) -> RealVector:
    """argmax_{v >= 0} <v, slack> - (1/rho) B_phi(v, y), with slack = g(x_{t+1}) + b_{t+1}."""
    if not rho > 0:
        raise InvalidInputError(f"step size must be positive, got {rho}")
    if isinstance(spec.phi, HalfSquaredEuclidean):
        return project_nonneg(y + rho * slack)
    if isinstance(spec.phi, WeightedQuadratic):
        # Separable: each coordinate is a clipped 1-d quadratic.
        return project_nonneg(y + rho * slack / spec.phi.weights)
    return dual_step_iterative(spec.phi, y, slack, rho, cfg or ProxConfig.from_settings())


def dual_step_iterative(
    phi: BregmanGenerator,
    y: RealVector,
    slack: RealVector,
    rho: float,
    cfg: ProxConfig,
) -> RealVector:
    lipschitz = phi.L / rho
    phi_y = phi.gradient(y)
    v = np.array(y, dtype=np.float64, copy=True)
    mapping = float("inf")
    for _ in range(cfg.inner_max_iters):
        # Minimise -<v, slack> + (1/rho) B_phi(v, y) over the orthant.
        grad = -slack + (phi.gradient(v) - phi_y) / rho
        v_next = project_nonneg(v - grad / lipschitz)
        mapping = lipschitz * float(np.linalg.norm(v - v_next))
        if mapping <= cfg.inner_tol:
            return v
        v = v_next
    raise ConvergenceError("dual subproblem did not converge", mapping)


def proximal_descent_slack(
    gen: BregmanGenerator,
    objective: Callable[[RealVector], float],
    x: RealVector,
    x_plus: RealVector,
    z: RealVector,
    rho: float,
) -> float:
    """RHS - LHS of the one-step proximal-method inequality.

    For x_plus = argmin_{u in C} phi(u) + (1/rho) B(u, x) and any z in C:
    phi(x_plus) - phi(z) <= (1/rho)(B(z, x) - B(z, x_plus) - B(x_plus, x)).
    Nonnegative up to solver accuracy.
    """
    rhs = (
        bregman_divergence(gen, z, x)
        - bregman_divergence(gen, z, x_plus)
        - bregman_divergence(gen, x_plus, x)
    ) / rho
    return rhs - (objective(x_plus) - objective(z))


def proximal_gradient_slack(
    gen: BregmanGenerator,
    cost: CostFunction,
    penalty: Callable[[RealVector], float],
    x: RealVector,
    x_plus: RealVector,
    z: RealVector,
    rho: float,
) -> float:
    """RHS - LHS of the one-step proximal-gradient inequality.

    For x_plus = argmin_{u in C} <f'(x), u> + theta(u) + (1/rho) B(u, x):
    f(x) - f(z) + theta(x_plus) - theta(z)
        <= (1/rho)(B(z, x) - B(z, x_plus)) + (2 rho / sigma) ||f'(x)||^2.
    """
    grad = cost.gradient(x)
    rhs = (bregman_divergence(gen, z, x) - bregman_divergence(gen, z, x_plus)) / rho
    rhs += 2.0 * rho / gen.sigma * float(np.dot(grad, grad))
    lhs = cost.value(x) - cost.value(z) + penalty(x_plus) - penalty(z)
    return rhs - lhs
