"""Error functionals, effective dimension, theoretical parameter choice and rate fits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import bisect

from .estimator import SpectralPolyRegressor
from .exceptions import GridMismatchError, InvalidArgumentError, OutOfRangeError
from .source import index_function_from_spec
from .synth import OracleModel, ProcessSpec, TargetSpec, clean_response, draw_processes

__all__ = [
    "ErrorReport",
    "RateReport",
    "estimation_error",
    "prediction_error",
    "oracle_basis_error",
    "effective_dimension",
    "theoretical_lambda",
    "psi",
    "theoretical_rate",
    "rate_fit",
]


@dataclass
class ErrorReport:
    s: float
    value: float
    method: str
    n_test: Optional[int] = None
    stderr: Optional[float] = None

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def _check_compatible(est: SpectralPolyRegressor, oracle: OracleModel):
    if est.degree != oracle.degree:
        raise InvalidArgumentError(
            f"estimate has degree {est.degree}, oracle has degree {oracle.degree}"
        )
    if est.x_grid_ != oracle.grid:
        raise GridMismatchError("estimate and oracle use different input grids")
    if est.scalar_response_:
        raise InvalidArgumentError("functional-response estimate required")


def estimation_error(est: SpectralPolyRegressor, oracle: OracleModel,
                     target: TargetSpec) -> ErrorReport:
    """Exact ``||beta_hat - beta*||`` through Gram algebra.

    Expands ``||b_hat||^2 - 2 <b_hat, b*> + ||b*||^2``; the cross term pairs the
    training features with the oracle eigenfunctions.
    """
    _check_compatible(est, oracle)
    w2 = est.y_grid_.weights
    B = target.response_functions(oracle, est.y_grid_)          # (modes, m2)
    P = oracle.project(est.X_fit_, modes=target.n_modes)         # (n, modes)
    n = est.n_train_
    cross = np.sum((P.T @ (est.dual_ * w2)) * B) / n
    total = est.norm() ** 2 - 2.0 * cross + np.sum(B**2 * w2)
    return ErrorReport(0.0, float(np.sqrt(max(total, 0.0))), "gram-exact")


def oracle_basis_error(est: SpectralPolyRegressor, oracle: OracleModel,
                       target: TargetSpec, s: float = 0.0) -> ErrorReport:
    """``||Gamma_N^s (beta_hat - beta*)||`` after projecting onto the oracle span.

    Exact for estimates whose features lie in the oracle span; components
    outside it are dropped.
    """
    _check_compatible(est, oracle)
    w2 = est.y_grid_.weights
    coef = oracle.project(est.X_fit_).T @ est.dual_ / est.n_train_   # c_m(t)
    coef[: target.n_modes] -= target.response_functions(oracle, est.y_grid_)
    energy = (coef**2) @ w2
    value = np.sum(oracle.eigenvalues ** (2.0 * s) * energy)
    return ErrorReport(float(s), float(np.sqrt(value)), "gram-exact")


def prediction_error(est: SpectralPolyRegressor, oracle: OracleModel, target: TargetSpec,
                     spec: ProcessSpec, n_test: int = 500, seed=0) -> ErrorReport:
    """Held-out Monte Carlo estimate of ``||(A*A)^{1/2} (beta_hat - beta*)||``."""
    if int(n_test) != n_test or n_test < 100:
        raise InvalidArgumentError("prediction error needs n_test >= 100")
    _check_compatible(est, oracle)
    X = draw_processes(spec, oracle.grid, n_test, seed)
    diff = est.predict(X) - clean_response(oracle, target, X, est.y_grid_)
    sq = (diff**2) @ est.y_grid_.weights
    mean = float(np.mean(sq))
    value = np.sqrt(mean)
    # delta method for the sqrt of a sample mean
    stderr = float(np.std(sq, ddof=1) / np.sqrt(n_test) / (2 * value)) if value > 0 else 0.0
    return ErrorReport(0.5, float(value), "holdout-MC", int(n_test), stderr)


def effective_dimension(eigenvalues, lam: float) -> float:
    """``N(lam) = sum_m mu_m / (mu_m + lam)``."""
    if not lam > 0:
        raise InvalidArgumentError(f"lambda must be positive, got {lam}")
    mu = np.asarray(eigenvalues, dtype=float)
    if np.any(mu < 0):
        raise InvalidArgumentError("eigenvalues must be non-negative")
    return float(np.sum(mu / (mu + lam)))


def psi(x, phi, b: float):
    """``psi(x) = phi(x) x^{1/2 + 1/(2b)}``."""
    phi = index_function_from_spec(phi)
    x = np.asarray(x, dtype=float)
    return phi(x) * x ** (0.5 + 0.5 / b)


def theoretical_lambda(n: int, phi, b: float, lo: float = 1e-12, hi: float = 1.0) -> float:
    """Solve ``psi(lam) = n^{-1/2}`` by bisection on ``[lo, hi]``."""
    if int(n) != n or n < 1:
        raise InvalidArgumentError("n must be a positive integer")
    if not b > 1:
        raise InvalidArgumentError("decay exponent b must exceed 1")
    phi = index_function_from_spec(phi)
    target = float(n) ** -0.5

    def f(x):
        return float(psi(x, phi, b)) - target

    if f(hi) < 0:
        raise OutOfRangeError(f"psi({hi}) < n^(-1/2): n = {n} is too small")
    if f(hi) == 0:
        return hi
    if f(lo) > 0:
        raise OutOfRangeError(f"psi({lo}) > n^(-1/2): n = {n} is too large")
    return float(bisect(f, lo, hi, xtol=1e-300, rtol=1e-13, maxiter=2000))


def theoretical_rate(b: float, r: float, s: float) -> float:
    """Exponent of ``n`` in the Hölder rate: ``-b(r+s) / (1 + b + 2rb)``."""
    if not b > 1 or not r > 0 or not 0 <= s <= 0.5:
        raise InvalidArgumentError(f"need b > 1, r > 0, 0 <= s <= 1/2; got {b}, {r}, {s}")
    return -b * (r + s) / (1.0 + b + 2.0 * r * b)


@dataclass
class RateReport:
    n_values: list
    means: list
    stds: list
    fitted_slope: float
    intercept: float
    residuals: list
    theoretical_slope: Optional[float] = None
    replicates: Optional[int] = None
    extra: dict = field(default_factory=dict)

    @property
    def slope_gap(self) -> Optional[float]:
        if self.theoretical_slope is None:
            return None
        return abs(self.fitted_slope - self.theoretical_slope)

    def to_dict(self) -> dict:
        out = {
            "n_values": self.n_values,
            "means": self.means,
            "stds": self.stds,
            "fitted_slope": self.fitted_slope,
            "intercept": self.intercept,
            "residuals": self.residuals,
            "theoretical_slope": self.theoretical_slope,
            "replicates": self.replicates,
        }
        out.update(self.extra)
        return out


def rate_fit(points: Sequence, theoretical_slope: Optional[float] = None,
             replicates: Optional[int] = None) -> RateReport:
    """Least-squares slope of ``log(error)`` against ``log(n)``.

    ``points`` holds ``(n, mean_error)`` or ``(n, mean_error, std)`` tuples.
    """
    pts = [tuple(p) for p in points]
    if len(pts) < 4:
        raise InvalidArgumentError("rate_fit needs at least 4 points")
    pts.sort(key=lambda p: p[0])
    ns = np.array([p[0] for p in pts], dtype=float)
    errs = np.array([p[1] for p in pts], dtype=float)
    stds = [float(p[2]) if len(p) > 2 else float("nan") for p in pts]
    if np.any(ns <= 0) or np.any(errs <= 0) or not np.all(np.isfinite(errs)):
        raise InvalidArgumentError("sample sizes and errors must be positive and finite")
    x, y = np.log(ns), np.log(errs)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return RateReport(
        n_values=[int(n) if float(n).is_integer() else float(n) for n in ns],
        means=errs.tolist(),
        stds=stds,
        fitted_slope=float(slope),
        intercept=float(intercept),
        residuals=resid.tolist(),
        theoretical_slope=None if theoretical_slope is None else float(theoretical_slope),
        replicates=replicates,
    )
