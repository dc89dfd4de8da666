"""Simplex projections (validated wrappers over the numeric kernels)."""

import numpy as np

from .._kernels import project_simplex as _proj
from .._kernels import project_simplex_floor as _proj_floor


def project_simplex(y):
    """The unique l2-nearest probability vector to y."""
    y = np.asarray(y, dtype=np.float64)
    if not np.all(np.isfinite(y)):
        raise ValueError("cannot project a non-finite vector")
    return _proj(y, 1.0)


def project_truncated_simplex(y, floor):
    """l2 projection onto {x: x_k >= floor, sum x = 1}."""
    y = np.asarray(y, dtype=np.float64)
    if not np.all(np.isfinite(y)):
        raise ValueError("cannot project a non-finite vector")
    if floor < 0:
        raise ValueError("floor must be nonnegative")
    if floor * y.size > 1.0 + 1e-12:
        raise ValueError(f"floor {floor} infeasible for dimension {y.size}")
    return _proj_floor(y, floor, 1.0)
