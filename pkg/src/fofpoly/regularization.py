"""Spectral regularization families.

A family is a map ``sigma -> g_lam(sigma)`` approximating ``1/sigma`` together
with its residual ``r_lam(sigma) = 1 - sigma * g_lam(sigma)``.  Three families
are provided:

* ``tikhonov``: ``g = 1 / (sigma + lam)``, qualification 1.
* ``cutoff`` (spectral cut-off): ``g = 1/sigma`` for ``sigma >= lam``, else 0;
  infinite qualification.
* ``landweber``: ``g = sum_{i=0}^{t-1} (1 - sigma)^i`` with ``t = ceil(1/lam)``
  and unit step size, so spectra must be pre-scaled into ``[0, 1]``;
  arbitrarily high qualification.

:func:`check_family` measures the constants of the defining inequalities on
finite grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, InvalidArgumentError

__all__ = [
    "RegularizationFamily",
    "FamilyCheckReport",
    "get_family",
    "FAMILY_NAMES",
    "landweber_steps",
    "g_apply",
    "residual",
    "check_family",
    "standard_grids",
]

_ALIASES = {
    "tikhonov": "tikhonov",
    "cutoff": "spectral-cutoff",
    "spectral-cutoff": "spectral-cutoff",
    "spectral_cutoff": "spectral-cutoff",
    "landweber": "landweber",
}

#: Names accepted in configuration files.
FAMILY_NAMES = ("tikhonov", "cutoff", "landweber")


@dataclass(frozen=True)
class RegularizationFamily:
    """Descriptor of a regularization family and its declared constants."""

    kind: str
    declared_A: float = 1.0
    declared_B: float = 2.0
    declared_D: float = 1.0
    qualification: float = math.inf

    def __post_init__(self):
        if self.kind not in ("tikhonov", "spectral-cutoff", "landweber"):
            raise InvalidArgumentError(f"unknown regularization family {self.kind!r}")
        if not self.qualification > 0:
            raise InvalidArgumentError("qualification must be positive")

    @property
    def name(self) -> str:
        """Short configuration name (``tikhonov``, ``cutoff``, ``landweber``)."""
        return "cutoff" if self.kind == "spectral-cutoff" else self.kind

    @property
    def requires_unit_spectrum(self) -> bool:
        return self.kind == "landweber"

    def g(self, lam, sigma):
        return g_apply(self, lam, sigma)

    def r(self, lam, sigma):
        return residual(self, lam, sigma)


def get_family(name) -> RegularizationFamily:
    """Look up a family by configuration name."""
    if isinstance(name, RegularizationFamily):
        return name
    try:
        kind = _ALIASES[str(name).lower()]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown regularization family {name!r}; expected one of {FAMILY_NAMES}"
        ) from None
    qualification = 1.0 if kind == "tikhonov" else math.inf
    return RegularizationFamily(kind, qualification=qualification)


def landweber_steps(lam: float) -> int:
    """Iteration count ``t = ceil(1/lam)`` (guarded against 1/lam round-up)."""
    if not lam > 0:
        raise InvalidArgumentError(f"lambda must be positive, got {lam}")
    return max(1, math.ceil(1.0 / lam * (1.0 - 1e-12)))


def _validate(family: RegularizationFamily, lam, sigma) -> np.ndarray:
    if not np.isscalar(lam) or not lam > 0:
        raise InvalidArgumentError(f"lambda must be a positive scalar, got {lam!r}")
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma < 0) or not np.all(np.isfinite(sigma)):
        raise InvalidArgumentError("spectral values must be finite and non-negative")
    if family.kind == "landweber" and np.any(sigma > 1.0):
        raise DomainError("landweber needs spectral values in [0, 1]; pre-scale the operator")
    return sigma


def g_apply(family: RegularizationFamily, lam: float, sigma):
    """Evaluate ``g_lam(sigma)``; vectorized over ``sigma``.

    Examples
    --------
    >>> g_apply(get_family("tikhonov"), 0.5, 0.5)
    1.0
    >>> g_apply(get_family("landweber"), 0.25, 0.5)
    1.875
    """
    family = get_family(family)
    sig = _validate(family, lam, sigma)
    if family.kind == "tikhonov":
        out = 1.0 / (sig + lam)
    elif family.kind == "spectral-cutoff":
        out = np.zeros_like(sig)
        above = sig >= lam
        out[above] = 1.0 / sig[above]
    else:
        t = landweber_steps(lam)
        out = np.full_like(sig, float(t))
        pos = sig > 1e-12
        s = sig[pos]
        # (1 - (1 - s)^t) / s without cancellation for small s
        with np.errstate(divide="ignore"):
            out[pos] = -np.expm1(t * np.log1p(-s)) / s
    return out if out.ndim else float(out)


def residual(family: RegularizationFamily, lam: float, sigma):
    """Residual ``r_lam(sigma) = 1 - sigma g_lam(sigma)``.

    For Landweber this is ``(1 - sigma)^t`` evaluated directly.
    """
    family = get_family(family)
    sig = _validate(family, lam, sigma)
    if family.kind == "landweber":
        out = (1.0 - sig) ** landweber_steps(lam)
    elif family.kind == "tikhonov":
        out = lam / (sig + lam)
    else:
        out = np.where(sig >= lam, 0.0, 1.0)
    out = np.asarray(out, dtype=float)
    return out if out.ndim else float(out)


@dataclass
class FamilyCheckReport:
    """Measured constants of a family on finite grids."""

    family: str
    measured_A: float
    measured_B_times_lambda_sup: float
    measured_D: float
    qualification_pass: dict
    qualification_constant: dict
    sigma_grid: np.ndarray = field(repr=False)
    lambda_grid: np.ndarray = field(repr=False)
    threshold: float = 10.0

    def satisfies(self, A: float = 1.0, B: float = 2.0, D: float = 1.0, tol: float = 1e-12) -> bool:
        return (
            self.measured_A <= A + tol
            and self.measured_B_times_lambda_sup <= B + tol
            and self.measured_D <= D + tol
        )

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "measured_A": self.measured_A,
            "measured_B": self.measured_B_times_lambda_sup,
            "measured_D": self.measured_D,
            "qualification_pass": {str(k): v for k, v in self.qualification_pass.items()},
            "qualification_constant": {
                str(k): v for k, v in self.qualification_constant.items()
            },
            "threshold": self.threshold,
            "sigma_grid": {"min": float(self.sigma_grid.min()),
                           "max": float(self.sigma_grid.max()),
                           "size": int(self.sigma_grid.size)},
            "lambda_grid": {"min": float(self.lambda_grid.min()),
                            "max": float(self.lambda_grid.max()),
                            "size": int(self.lambda_grid.size)},
        }


def standard_grids(n_sigma: int = 200, n_lambda: int = 20):
    """Log-spaced test grids: sigma in [1e-6, 1], lambda in [1e-4, 1]."""
    return np.logspace(-6, 0, n_sigma), np.logspace(-4, 0, n_lambda)


def check_family(
    family,
    sigma_grid=None,
    lambda_grid=None,
    exponents=(1, 2, 4),
    eta: float = 1.0,
    threshold: float = 10.0,
) -> FamilyCheckReport:
    """Measure ``sup sigma|g|``, ``sup lambda|g|``, ``sup |r|`` and qualification.

    Exponent ``q`` passes when ``sup_sigma |r_lam(sigma)| sigma^q / lam^q``
    stays below ``threshold`` for every ``lam`` in the grid.
    """
    family = get_family(family)
    default_sigma, default_lambda = standard_grids()
    sig = np.asarray(default_sigma if sigma_grid is None else sigma_grid, dtype=float)
    lams = np.asarray(default_lambda if lambda_grid is None else lambda_grid, dtype=float)
    for name, grid in (("sigma", sig), ("lambda", lams)):
        if grid.size == 0:
            raise InvalidArgumentError(f"{name} grid is empty")
        if np.any(grid <= 0) or np.any(grid > eta):
            raise InvalidArgumentError(f"{name} grid values must lie in (0, {eta}]")

    A = B = D = 0.0
    ratios = {q: 0.0 for q in exponents}
    for lam in lams:
        g = np.asarray(g_apply(family, float(lam), sig))
        r = np.abs(np.asarray(residual(family, float(lam), sig)))
        A = max(A, float(np.max(sig * np.abs(g))))
        B = max(B, float(lam * np.max(np.abs(g))))
        D = max(D, float(np.max(r)))
        for q in exponents:
            ratios[q] = max(ratios[q], float(np.max(r * (sig / lam) ** q)))
    return FamilyCheckReport(
        family=family.name,
        measured_A=A,
        measured_B_times_lambda_sup=B,
        measured_D=D,
        qualification_pass={q: ratios[q] <= threshold for q in exponents},
        qualification_constant=ratios,
        sigma_grid=sig,
        lambda_grid=lams,
        threshold=threshold,
    )
