"""
Exceptions raised by the simulator services.
"""


class OcoError(Exception):
    """Base exception for simulator operations."""
    pass


class InvalidInputError(OcoError, ValueError):
    """Raised when an operation's preconditions do not hold."""
    pass


class ConvergenceError(OcoError):
    """Raised when an iterative solver stops before meeting its tolerance."""

    def __init__(self, message: str, residual: float, residuals: dict[str, float] | None = None):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual
        self.residuals = residuals or {}


class InfeasibleError(OcoError):
    """Raised when a feasible set is empty."""
    pass
