# Perturbed OCO Simulator - domain types
# Models package
from app.models.action_set import ActionSet, Box, EuclideanBall, Simplex
from app.models.bregman import BregmanGenerator, HalfSquaredEuclidean, WeightedQuadratic, squared_euclidean
from app.models.constraints import AffineConstraints, ConstraintMap, GeneralConstraints
from app.models.costs import CallableCost, CostFunction, CostSum, QuadraticCost, total_cost
from app.models.problem import AssumptionConstants, ProblemSpec
from app.models.run_config import RunConfig, ScenarioConfig
from app.models.state import (
    AdaptiveRate,
    AlgoState,
    FixedRate,
    RateSchedule,
    RoundFeedback,
    step_rate,
)
from app.models.trace import RunTrace, TraceRecorder
from app.models.vector import RealVector, as_matrix, as_vector

__all__ = [
    "ActionSet",
    "Box",
    "EuclideanBall",
    "Simplex",
    "BregmanGenerator",
    "HalfSquaredEuclidean",
    "WeightedQuadratic",
    "squared_euclidean",
    "ConstraintMap",
    "AffineConstraints",
    "GeneralConstraints",
    "CostFunction",
    "QuadraticCost",
    "CallableCost",
    "CostSum",
    "total_cost",
    "AssumptionConstants",
    "ProblemSpec",
    "RunConfig",
    "ScenarioConfig",
    "AlgoState",
    "RoundFeedback",
    "RateSchedule",
    "AdaptiveRate",
    "FixedRate",
    "step_rate",
    "RunTrace",
    "TraceRecorder",
    "RealVector",
    "as_vector",
    "as_matrix",
]
