"""
Exact fractional covering knapsack:

    min <c, x>  s.t.  <a, x> >= demand,  lo <= x <= hi,  a >= 0.

Greedy by cost per unit of coverage; exact for this LP.
"""

import logging
from dataclasses import dataclass

import numpy as np

from app.errors import InfeasibleError, InvalidInputError
from app.models.vector import RealVector, as_vector

logger = logging.getLogger(__name__)

COVER_TOL = 1e-12


@dataclass
class KnapsackSolution:
    value: float
    x: RealVector


def solve_covering_knapsack(
    cost: RealVector,
    weights: RealVector,
    demand: float,
    lo: RealVector,
    hi: RealVector,
) -> KnapsackSolution:
    cost = as_vector(cost, name="knapsack cost")
    n = cost.shape[0]
    weights = as_vector(weights, dim=n, name="knapsack weights")
    lo = as_vector(lo, dim=n, name="knapsack lo")
    hi = as_vector(hi, dim=n, name="knapsack hi")
    if np.any(weights < 0):
        raise InvalidInputError("covering weights must be nonnegative")

    # Coordinates with negative cost pay for themselves.
    x = np.where(cost < 0, hi, lo).astype(np.float64)
    remaining = demand - float(np.dot(weights, x))

    if remaining > 0:
        candidates = [i for i in range(n) if cost[i] >= 0 and weights[i] > 0]
        # Stable sort keeps index order on equal ratios.
        candidates.sort(key=lambda i: cost[i] / weights[i])
        for i in candidates:
            capacity = (hi[i] - x[i]) * weights[i]
            if capacity >= remaining:
                x[i] = min(hi[i], x[i] + remaining / weights[i])
                remaining = 0.0
                break
            x[i] = hi[i]
            remaining -= capacity

    if remaining > COVER_TOL * max(1.0, abs(demand)):
        raise InfeasibleError(f"covering demand {demand} exceeds capacity by {remaining:.3e}")

    value = float(np.dot(cost, x))
    logger.debug("covering knapsack: demand=%s value=%s", demand, value)
    return KnapsackSolution(value=value, x=x)
