"""
Real vectors are float64 numpy arrays; this module validates them at the boundaries.
"""

from typing import Any

import numpy as np
from numpy.typing import NDArray

from app.errors import InvalidInputError

RealVector = NDArray[np.float64]


def as_vector(value: Any, dim: int | None = None, name: str = "vector") -> RealVector:
    """Convert to a finite 1-d float64 array, optionally checking its dimension."""
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    if dim is not None and arr.shape[0] != dim:
        raise InvalidInputError(f"{name} has dimension {arr.shape[0]}, expected {dim}")
    return arr


def as_matrix(value: Any, shape: tuple[int, int] | None = None, name: str = "matrix") -> NDArray[np.float64]:
    """Convert to a finite 2-d float64 array."""
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    if shape is not None and arr.shape != shape:
        raise InvalidInputError(f"{name} has shape {arr.shape}, expected {shape}")
    return arr


def same_dimension(*vectors: RealVector) -> int:
    """Return the shared dimension or raise on mismatch."""
    dims = {v.shape[0] for v in vectors}
    if len(dims) != 1:
        raise InvalidInputError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()
