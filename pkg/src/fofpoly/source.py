"""Index functions for source conditions.

An index function is continuous, non-decreasing and vanishes at zero.  The
Hölder family ``t -> t**r`` (``r > 0``) is the common case; a tabulated,
piecewise-linear function covers everything else.
"""

from __future__ import annotations

import numpy as np

from .exceptions import InvalidArgumentError

__all__ = ["IndexFunction", "Holder", "Tabulated", "index_function_from_spec"]


class IndexFunction:
    """Base class; subclasses implement ``__call__`` on arrays."""

    def __call__(self, t):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


class Holder(IndexFunction):
    """``phi(t) = t**r`` with ``r > 0``."""

    def __init__(self, r: float):
        r = float(r)
        if not r > 0 or not np.isfinite(r):
            raise InvalidArgumentError(
                f"holder exponent must be positive (phi(0) = 0 is required), got {r}"
            )
        self.r = r

    def __call__(self, t):
        return np.power(np.asarray(t, dtype=float), self.r)

    def inverse(self, y):
        return np.power(np.asarray(y, dtype=float), 1.0 / self.r)

    def __repr__(self) -> str:
        return f"Holder(r={self.r:g})"

    def to_dict(self) -> dict:
        return {"kind": "holder", "r": self.r}


class Tabulated(IndexFunction):
    """Piecewise-linear index function through ``(x_k, y_k)``; constant beyond."""

    def __init__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise InvalidArgumentError("tabulated index function needs matching 1-D x, y")
        if x[0] != 0.0 or y[0] != 0.0:
            raise InvalidArgumentError("tabulated index function must start at (0, 0)")
        if np.any(np.diff(x) <= 0):
            raise InvalidArgumentError("tabulated x values must be strictly increasing")
        if np.any(np.diff(y) < 0):
            raise InvalidArgumentError("index function must be non-decreasing")
        if not y[-1] > 0:
            raise InvalidArgumentError("index function must not vanish identically")
        self.x, self.y = x, y

    def __call__(self, t):
        return np.interp(np.asarray(t, dtype=float), self.x, self.y)

    def __repr__(self) -> str:
        return f"Tabulated({self.x.size} knots)"

    def to_dict(self) -> dict:
        return {"kind": "table", "x": self.x.tolist(), "y": self.y.tolist()}


def index_function_from_spec(spec) -> IndexFunction:
    """Build from a config mapping ``{"kind": "holder", "r": 1}`` or ``{"kind": "table", ...}``."""
    if isinstance(spec, IndexFunction):
        return spec
    kind = spec.get("kind", "holder")
    if kind == "holder":
        return Holder(spec.get("r", 1.0))
    if kind == "table":
        return Tabulated(spec["x"], spec["y"])
    raise InvalidArgumentError(f"unknown index function kind {kind!r}")
