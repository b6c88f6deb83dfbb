"""Input validation helpers shared by the estimator and metrics."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import GridMismatchError, InvalidArgumentError
from .functional import FunctionalData, FunctionalSample, Grid, make_grid


def resolve_functional(X, grid=None, name="X"):
    """Return ``(values, grid)`` for functional input.

    ``X`` may be a :class:`FunctionalData`, a sequence of
    :class:`FunctionalSample`, or a 2-D array; raw arrays are placed on
    ``grid`` or, when that is ``None``, on the uniform grid over ``[0, 1]``.
    """
    if isinstance(X, FunctionalSample):
        X = FunctionalData(X.grid, X.values[None, :])
    elif isinstance(X, (list, tuple)) and X and isinstance(X[0], FunctionalSample):
        X = FunctionalData.from_samples(X)
    if isinstance(X, FunctionalData):
        if grid is not None and X.grid != grid:
            raise GridMismatchError(f"{name} lives on {X.grid}, expected {grid}")
        return np.asarray(X.values), X.grid
    values = np.asarray(X)
    if values.ndim != 2:
        raise InvalidArgumentError(f"{name} must be 2-D (n_samples, n_grid_points)")
    if grid is None:
        if values.shape[1] < 2:
            raise InvalidArgumentError(
                f"{name} has {values.shape[1]} feature(s); a functional input needs "
                "at least 2 grid points"
            )
        grid = make_grid(0.0, 1.0, values.shape[1])
    elif values.shape[1] != grid.size:
        raise GridMismatchError(
            f"{name} has {values.shape[1]} columns but the grid has {grid.size} points"
        )
    return values, grid


def check_grid(grid, name):
    if grid is not None and not isinstance(grid, Grid):
        raise InvalidArgumentError(f"{name} must be a Grid or None")
    return grid


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise InvalidArgumentError(f"{name} must be a positive real, got {value!r}")
    return float(value)


def check_degree(p):
    if isinstance(p, bool) or not isinstance(p, numbers.Integral) or p < 0:
        raise InvalidArgumentError(f"degree must be a non-negative integer, got {p!r}")
    return int(p)
