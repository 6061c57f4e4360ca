"""
Bregman divergence machinery.
"""

import numpy as np

from app.models.bregman import BregmanGenerator
from app.models.vector import RealVector, as_vector, same_dimension


def _divergence(gen: BregmanGenerator, a: RealVector, b: RealVector) -> float:
    return gen.value(a) - gen.value(b) - float(np.dot(a - b, gen.gradient(b)))


def bregman_divergence(gen: BregmanGenerator, a: RealVector, b: RealVector) -> float:
    """B(a, b) = psi(a) - psi(b) - <a - b, grad psi(b)>, clipped at 0 against rounding."""
    a = as_vector(a, name="a")
    b = as_vector(b, name="b")
    same_dimension(a, b)
    return max(0.0, _divergence(gen, a, b))


def three_point_residual(gen: BregmanGenerator, a: RealVector, b: RealVector, c: RealVector) -> float:
    """B(c,a) + B(a,b) - B(c,b) - <grad psi(b) - grad psi(a), c - a>; zero up to rounding."""
    a = as_vector(a, name="a")
    b = as_vector(b, name="b")
    c = as_vector(c, name="c")
    same_dimension(a, b, c)
    cross = float(np.dot(gen.gradient(b) - gen.gradient(a), c - a))
    return _divergence(gen, c, a) + _divergence(gen, a, b) - _divergence(gen, c, b) - cross


def gradient_check(gen: BregmanGenerator, x: RealVector, h: float = 1e-6) -> float:
    """Largest central-difference error of the generator gradient, relative to 1 + |grad|."""
    x = as_vector(x, name="x")
    grad = gen.gradient(x)
    worst = 0.0
    for i in range(x.shape[0]):
        step = np.zeros_like(x)
        step[i] = h
        estimate = (gen.value(x + step) - gen.value(x - step)) / (2.0 * h)
        worst = max(worst, abs(estimate - grad[i]) / (1.0 + abs(grad[i])))
    return worst
