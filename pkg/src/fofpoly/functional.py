"""Grids, quadrature and polynomial-feature inner products.

Functions live on a uniform grid over an interval and are integrated with the
composite trapezoid rule.  For the degree-``p`` polynomial feature map

    chi(x) = (1, x, x (x) x, ..., x^{(x) p})

the inner product of two feature vectors collapses to a scalar polynomial in
the L2 inner product of the inputs,

    <chi(x1), chi(x2)> = sum_{l=0}^{p} <x1, x2>^l,

so Gram matrices never require materializing the l-fold tensor products.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence, Union

import numpy as np

from .exceptions import GridMismatchError, InvalidArgumentError

__all__ = [
    "Grid",
    "FunctionalSample",
    "FunctionalData",
    "FeatureGram",
    "make_grid",
    "l2_inner",
    "l2_norm",
    "feature_inner",
    "gram_matrix",
    "inner_products",
    "polynomial_kernel",
    "feature_gram",
    "cosine_basis",
    "read_csv",
    "write_csv",
]


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Grid:
    """Quadrature grid on ``[lo, hi]``.

    Use :func:`make_grid` to build the trapezoidal grid; the constructor only
    validates a user-supplied one.
    """

    lo: float
    hi: float
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = _frozen(self.points)
        weights = _frozen(self.weights)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        lo, hi = float(self.lo), float(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if not lo < hi:
            raise InvalidArgumentError(f"grid needs lo < hi, got [{lo}, {hi}]")
        if points.ndim != 1 or points.size < 2:
            raise InvalidArgumentError("grid needs at least two points")
        if weights.shape != points.shape:
            raise InvalidArgumentError("points and weights must have the same length")
        if np.any(np.diff(points) <= 0):
            raise InvalidArgumentError("grid points must be strictly increasing")
        if points[0] < lo or points[-1] > hi:
            raise InvalidArgumentError("grid points must lie within [lo, hi]")
        if np.any(weights <= 0):
            raise InvalidArgumentError("quadrature weights must be positive")
        if abs(weights.sum() - (hi - lo)) > 1e-12 * (hi - lo):
            raise InvalidArgumentError("quadrature weights must sum to hi - lo")

    def __len__(self) -> int:
        return self.points.size

    @property
    def size(self) -> int:
        return self.points.size

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Grid):
            return NotImplemented
        return (
            self.lo == other.lo
            and self.hi == other.hi
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.weights, other.weights)
        )

    def __hash__(self) -> int:
        return hash((self.lo, self.hi, self.points.size))

    def __repr__(self) -> str:
        return f"Grid(lo={self.lo}, hi={self.hi}, m={self.size})"

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "m": self.size}


def make_grid(lo: float, hi: float, m: int) -> Grid:
    """Equispaced grid with composite trapezoid weights.

    Examples
    --------
    >>> make_grid(0.0, 1.0, 3).weights
    array([0.25, 0.5 , 0.25])
    """
    if int(m) != m or m < 2:
        raise InvalidArgumentError(f"grid size must be an integer >= 2, got {m}")
    if not lo < hi:
        raise InvalidArgumentError(f"grid needs lo < hi, got [{lo}, {hi}]")
    m = int(m)
    points = np.linspace(lo, hi, m)
    h = (hi - lo) / (m - 1)
    weights = np.full(m, h)
    weights[0] = weights[-1] = h / 2
    # absorb the linspace/round-off drift so the weights sum to hi - lo
    weights *= (hi - lo) / weights.sum()
    return Grid(lo, hi, points, weights)


@dataclass(frozen=True, eq=False)
class FunctionalSample:
    """One discretized function: values on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 1 or values.size != self.grid.size:
            raise InvalidArgumentError(
                f"expected {self.grid.size} values on the grid, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("functional sample contains non-finite values")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class FunctionalData:
    """A stack of functions sharing one grid, stored as an ``(n, m)`` array."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(np.atleast_2d(self.values))
        if values.ndim != 2 or values.shape[1] != self.grid.size:
            raise InvalidArgumentError(
                f"expected shape (n, {self.grid.size}), got {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("functional data contains non-finite values")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_samples(cls, samples: Sequence[FunctionalSample]) -> "FunctionalData":
        samples = list(samples)
        if not samples:
            raise InvalidArgumentError("need at least one sample")
        grid = samples[0].grid
        for s in samples[1:]:
            if s.grid != grid:
                raise GridMismatchError("all samples must share one grid")
        return cls(grid, np.stack([s.values for s in samples]))

    def __len__(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, i):
        if isinstance(i, (int, np.integer)):
            return FunctionalSample(self.grid, self.values[i])
        return FunctionalData(self.grid, self.values[i])

    def __iter__(self) -> Iterator[FunctionalSample]:
        for i in range(len(self)):
            yield self[i]

    def norms2(self) -> np.ndarray:
        """Squared L2 norm of every row."""
        return (self.values**2) @ self.grid.weights


SampleSet = Union[FunctionalData, Sequence[FunctionalSample]]


def _as_data(samples: SampleSet) -> FunctionalData:
    if isinstance(samples, FunctionalData):
        return samples
    return FunctionalData.from_samples(samples)


def _check_same_grid(f: FunctionalSample, g: FunctionalSample) -> None:
    if f.grid != g.grid:
        raise GridMismatchError(f"samples live on different grids: {f.grid} vs {g.grid}")


def l2_inner(f: FunctionalSample, g: FunctionalSample) -> float:
    """Trapezoidal L2 inner product of two samples on the same grid."""
    _check_same_grid(f, g)
    return float(np.sum(f.grid.weights * f.values * g.values))


def l2_norm(f: FunctionalSample) -> float:
    return float(np.sqrt(l2_inner(f, f)))


def polynomial_kernel(inner, p: int):
    """Evaluate ``sum_{l=0}^p inner**l`` elementwise (Horner form, 0**0 = 1)."""
    if int(p) != p or p < 0:
        raise InvalidArgumentError(f"degree must be a non-negative integer, got {p}")
    inner = np.asarray(inner, dtype=float)
    out = np.ones_like(inner)
    for _ in range(int(p)):
        out = out * inner + 1.0
    return out


def inner_products(A: np.ndarray, B: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Matrix of trapezoidal inner products between the rows of ``A`` and ``B``."""
    return (A * weights) @ B.T


def feature_gram(A: np.ndarray, B: np.ndarray, weights: np.ndarray, p: int) -> np.ndarray:
    """Cross Gram ``K[i, j] = <chi(A_i), chi(B_j)>`` for row-stacked samples."""
    return polynomial_kernel(inner_products(A, B, weights), p)


def feature_inner(x1: FunctionalSample, x2: FunctionalSample, p: int) -> float:
    """Inner product of the degree-``p`` polynomial features of two samples."""
    return float(polynomial_kernel(l2_inner(x1, x2), p))


@dataclass(frozen=True, eq=False)
class FeatureGram:
    """Symmetric ``n x n`` Gram matrix of polynomial features."""

    degree: int
    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def min_eigenvalue_ratio(self) -> float:
        """Smallest eigenvalue divided by the largest one."""
        ev = np.linalg.eigvalsh(self.entries)
        return float(ev[0] / ev[-1])


def gram_matrix(samples: SampleSet, p: int) -> FeatureGram:
    """Feature Gram matrix of a sample set, symmetrized after assembly."""
    data = _as_data(samples)
    if len(data) == 0:
        raise InvalidArgumentError("gram_matrix needs at least one sample")
    M = feature_gram(data.values, data.values, data.grid.weights, p)
    M = 0.5 * (M + M.T)
    M.setflags(write=False)
    return FeatureGram(int(p), M)


def cosine_basis(grid: Grid, K: int, start: int = 1) -> np.ndarray:
    """Rows ``sqrt(2/L) cos(k pi (s - lo) / L)`` for ``k = start .. start+K-1``.

    ``k = 0`` is the normalized constant ``1/sqrt(L)``.  On a trapezoid grid
    with ``m`` points the rows are exactly orthonormal for ``k < m - 1``.
    """
    L = grid.hi - grid.lo
    k = np.arange(start, start + K)
    u = (grid.points - grid.lo) / L
    E = np.sqrt(2.0 / L) * np.cos(np.pi * np.outer(k, u))
    if start == 0:
        E[0] = 1.0 / np.sqrt(L)
    return E


def write_csv(data: FunctionalData, path) -> Path:
    """Write grid points as the first row, then one row per sample."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([repr(float(x)) for x in data.grid.points])
        for row in data.values:
            writer.writerow([repr(float(x)) for x in row])
    return path


def read_csv(path) -> FunctionalData:
    """Inverse of :func:`write_csv`; the grid must be equispaced."""
    with Path(path).open(newline="") as fh:
        rows = [list(map(float, r)) for r in csv.reader(fh) if r]
    if not rows:
        raise InvalidArgumentError(f"{path}: empty functional CSV")
    points = np.array(rows[0])
    grid = make_grid(points[0], points[-1], points.size)
    if not np.allclose(grid.points, points, rtol=0, atol=1e-12 * (grid.hi - grid.lo)):
        raise InvalidArgumentError(f"{path}: grid points are not equispaced")
    values = np.array(rows[1:]) if len(rows) > 1 else np.empty((0, points.size))
    if values.shape[0] == 0:
        raise InvalidArgumentError(f"{path}: no samples")
    return FunctionalData(grid, values)
