"""
Euclidean projections onto action sets and the nonnegative orthant.
"""

import numpy as np

from app.errors import InvalidInputError
from app.models.action_set import ActionSet, Box, EuclideanBall, Simplex
from app.models.vector import RealVector, as_vector


def project(action_set: ActionSet, p: RealVector) -> RealVector:
    """argmin_{u in set} ||u - p||."""
    p = as_vector(p, dim=action_set.dimension, name="point")
    if isinstance(action_set, Box):
        return np.clip(p, action_set.lo, action_set.hi)
    if isinstance(action_set, EuclideanBall):
        return _project_ball(action_set, p)
    if isinstance(action_set, Simplex):
        return _project_simplex(p, action_set.scale)
    raise InvalidInputError(f"no projection for action set kind {action_set.kind!r}")


def project_nonneg(p: RealVector) -> RealVector:
    """[p]^+ componentwise."""
    return np.maximum(as_vector(p, name="point"), 0.0)


def _project_ball(ball: EuclideanBall, p: RealVector) -> RealVector:
    offset = p - ball.center
    dist = float(np.linalg.norm(offset))
    if dist <= ball.radius:
        return p.copy()
    return ball.center + offset * (ball.radius / dist)


def _project_simplex(p: RealVector, scale: float) -> RealVector:
    # Sort-based threshold: keep the largest coordinates shifted by theta.
    n = p.shape[0]
    u = np.sort(p)[::-1]
    cssv = np.cumsum(u) - scale
    ks = np.arange(1, n + 1)
    k = ks[u - cssv / ks > 0][-1]
    theta = cssv[k - 1] / k
    return np.maximum(p - theta, 0.0)
