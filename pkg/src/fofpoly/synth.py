"""Synthetic data with a known target.

* Inputs are truncated cosine expansions with bounded (uniform) coefficients,
  so ``||X||^2 <= kappa`` holds for every draw.
* The population feature covariance is replaced by a large-sample oracle: the
  eigendecomposition of ``(1/N) M~`` for ``N`` independent inputs.  Its
  eigenfunctions ``phi_m = (N mu_m)^{-1/2} sum_w V_wm chi(X~_w)`` are exact
  orthonormal elements of the feature space, so targets built from them
  satisfy the source condition exactly and every error norm has a closed form.
* Targets are ``beta* = sum_{m,k} phi(mu_m) v_mk (e_k (x) phi_m)`` with
  ``||v|| = R``; responses add noise ``sum_k eta_k e_k`` with
  ``E||eps||^2 = sigma^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateOracleError, InvalidArgumentError
from .functional import FunctionalData, FunctionalSample, Grid, cosine_basis, feature_gram
from .source import IndexFunction, index_function_from_spec

__all__ = [
    "ProcessSpec",
    "NoiseSpec",
    "OracleModel",
    "TargetSpec",
    "draw_process",
    "draw_processes",
    "build_oracle",
    "fit_decay",
    "make_target",
    "clean_response",
    "draw_noise",
    "gen_dataset",
    "source_coefficients",
]


@dataclass(frozen=True)
class ProcessSpec:
    """Bounded input process ``X = sum_k xi_k c k^{-a/2} e_k``.

    ``xi_k`` are i.i.d. uniform on ``[-sqrt 3, sqrt 3]`` and ``c`` is chosen on
    the grid so that ``||X||^2 <= kappa`` for every draw.
    """

    K: int = 100
    a: float = 2.0
    kappa: float = 100.0

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise InvalidArgumentError("K must be a positive integer")
        if not self.a > 0:
            raise InvalidArgumentError("decay exponent a must be positive")
        if not self.kappa > 0:
            raise InvalidArgumentError("kappa must be positive")

    def amplitudes(self, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
        """Basis rows ``e_k`` on ``grid`` and per-mode amplitudes ``c k^{-a/2}``."""
        E = cosine_basis(grid, self.K)
        decay = np.arange(1, self.K + 1) ** (-self.a / 2)
        # |xi_k| <= sqrt 3, so ||X||^2 <= 3 sum_jk |G_jk| d_j d_k with G the
        # discrete Gram of the basis (identity on fine grids)
        G = (E * grid.weights) @ E.T
        bound = 3.0 * np.sum(np.abs(G) * np.outer(decay, decay))
        c = np.sqrt(self.kappa / bound)
        return E, c * decay


def draw_processes(spec: ProcessSpec, grid: Grid, n: int, seed) -> FunctionalData:
    """``n`` independent input functions; fully determined by ``seed``."""
    if int(n) != n or n < 1:
        raise InvalidArgumentError("n must be a positive integer")
    rng = np.random.default_rng(seed)
    E, amp = spec.amplitudes(grid)
    xi = rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), size=(int(n), spec.K))
    return FunctionalData(grid, (xi * amp) @ E)


def draw_process(spec: ProcessSpec, grid: Grid, seed) -> FunctionalSample:
    return draw_processes(spec, grid, 1, seed)[0]


def fit_decay(eigenvalues, lo: int = 3, hi: int = 50) -> float:
    """Negative log-log slope of ``mu_m`` over ``m in [lo, min(hi, rank/2)]``."""
    mu = np.asarray(eigenvalues, dtype=float)
    top = min(hi, mu.size // 2)
    if top - lo + 1 < 2:
        raise DegenerateOracleError(
            f"need at least {2 * (lo + 1)} modes to fit the decay, have {mu.size}",
            rank=mu.size,
        )
    m = np.arange(lo, top + 1)
    slope = np.polyfit(np.log(m), np.log(mu[m - 1]), 1)[0]
    return float(-slope)


@dataclass(frozen=True, eq=False)
class OracleModel:
    """Large-sample surrogate of the feature covariance.

    Attributes
    ----------
    inputs : FunctionalData
        Oracle inputs ``X~_1..X~_N``.
    degree : int
    eigenvalues : ndarray
        Retained ``mu_m`` (descending, above ``1e-12 mu_1``).
    eigenvectors : ndarray of shape (N, rank)
    decay : float
        Fitted exponent ``b_hat``.
    """

    inputs: FunctionalData
    degree: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    decay: float
    gram: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return len(self.inputs)

    @property
    def rank(self) -> int:
        return self.eigenvalues.size

    @property
    def grid(self) -> Grid:
        return self.inputs.grid

    @property
    def weights(self) -> np.ndarray:
        """``W[w, m]`` with ``phi_m = sum_w W[w, m] chi(X~_w)``."""
        return self.eigenvectors / np.sqrt(self.N * self.eigenvalues)

    def project(self, X: np.ndarray, modes=None) -> np.ndarray:
        """``P[i, m] = <chi(X_i), phi_m>`` for row-stacked inputs ``X``."""
        W = self.weights if modes is None else self.weights[:, :modes]
        K = feature_gram(np.asarray(X), self.inputs.values, self.grid.weights, self.degree)
        return K @ W

    def eigenfunction_gram(self, modes=None) -> np.ndarray:
        """``<phi_m, phi_m'>`` computed through the oracle Gram (should be I)."""
        W = self.weights if modes is None else self.weights[:, :modes]
        return W.T @ self.gram @ W


def build_oracle(spec: ProcessSpec, grid: Grid, N: int, p: int, seed,
                 allow_degenerate: bool = False) -> OracleModel:
    """Draw ``N`` inputs and eigendecompose their scaled feature Gram.

    Raises :class:`DegenerateOracleError` when fewer than 5 modes survive the
    ``1e-12 mu_1`` cut, unless ``allow_degenerate`` is set.  The decay is
    reported as ``nan`` whenever fewer than 8 modes survive.
    """
    if int(N) != N or N < 100:
        raise InvalidArgumentError("the oracle needs N >= 100 samples")
    X = draw_processes(spec, grid, N, seed)
    M = feature_gram(X.values, X.values, grid.weights, p)
    M = 0.5 * (M + M.T)
    d, V = np.linalg.eigh(M / N)
    d, V = d[::-1], V[:, ::-1]
    keep = d >= 1e-12 * d[0]
    d, V = d[keep].copy(), V[:, keep].copy()
    if d.size < 5:
        if not allow_degenerate:
            raise DegenerateOracleError(
                f"oracle rank {d.size} < 5 (degree {p}); the spectrum is degenerate",
                rank=int(d.size),
            )
        decay = float("nan")
    elif d.size < 8:
        # too few modes for the [3, rank/2] window
        decay = float("nan")
    else:
        decay = fit_decay(d)
    for a in (d, V, M):
        a.setflags(write=False)
    return OracleModel(X, int(p), d, V, decay, M)


@dataclass(frozen=True, eq=False)
class NoiseSpec:
    """White-ish noise ``sum_{k=1}^{K} eta_k e_k`` with ``eta_k ~ N(0, sigma2/K)``."""

    sigma2: float = 1.0
    K: int = 25

    def __post_init__(self):
        if self.sigma2 < 0:
            raise InvalidArgumentError("noise energy sigma2 must be non-negative")
        if int(self.K) != self.K or self.K < 1:
            raise InvalidArgumentError("noise basis size K must be a positive integer")


@dataclass(frozen=True, eq=False)
class TargetSpec:
    """Target ``beta*`` in the oracle eigenbasis.

    ``coefficients[m, k]`` holds ``v_{m+1, k+1}``; the response-side basis is
    ``e_k = sqrt 2 cos(k pi t)``.
    """

    phi: IndexFunction
    R: float
    coefficients: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.coefficients.shape[0]

    @property
    def n_basis(self) -> int:
        return self.coefficients.shape[1]

    def beta_coefficients(self, oracle: OracleModel) -> np.ndarray:
        """``phi(mu_m) v_mk``: coordinates of ``beta*`` on ``e_k (x) phi_m``."""
        mu = oracle.eigenvalues[: self.n_modes]
        return self.phi(mu)[:, None] * self.coefficients

    def response_functions(self, oracle: OracleModel, grid_S2: Grid) -> np.ndarray:
        """``b_m(t) = sum_k phi(mu_m) v_mk e_k(t)``, shape ``(n_modes, m2)``."""
        E = cosine_basis(grid_S2, self.n_basis)
        return self.beta_coefficients(oracle) @ E

    def norm(self, oracle: OracleModel, grid_S2: Grid) -> float:
        """``||beta*||`` via quadrature of the ``b_m`` (eigenfunctions are orthonormal)."""
        B = self.response_functions(oracle, grid_S2)
        return float(np.sqrt(np.sum(B**2 * grid_S2.weights)))


def make_target(oracle: OracleModel, phi, R: float, n_modes: int, seed=None,
                n_basis: int = 3, coefficients=None) -> TargetSpec:
    """Draw ``v`` uniformly on modes ``m <= n_modes``, ``k <= n_basis``; rescale to ``||v|| = R``.

    Pass ``coefficients`` (shape ``(n_modes, n_basis)``) to fix ``v`` instead;
    it is used as given and must satisfy ``||v|| <= R``.
    """
    phi = index_function_from_spec(phi)
    if not R > 0:
        raise InvalidArgumentError("radius R must be positive")
    if coefficients is not None:
        v = np.array(coefficients, dtype=float, ndmin=2)
        if np.linalg.norm(v) > R * (1 + 1e-12):
            raise InvalidArgumentError("||v|| exceeds the radius R")
    else:
        if int(n_modes) != n_modes or n_modes < 1:
            raise InvalidArgumentError("n_modes must be a positive integer")
        rng = np.random.default_rng(seed)
        v = rng.uniform(-1.0, 1.0, size=(int(n_modes), int(n_basis)))
        v *= R / np.linalg.norm(v)
    if v.shape[0] > oracle.rank:
        raise InvalidArgumentError(
            f"target uses {v.shape[0]} modes but the oracle has rank {oracle.rank}"
        )
    v.setflags(write=False)
    return TargetSpec(phi, float(R), v)


def clean_response(oracle: OracleModel, target: TargetSpec, X, grid_S2: Grid) -> np.ndarray:
    """``<beta*(t, .), chi(X_i)>`` for every row of ``X``; shape ``(n, m2)``."""
    Xv = X.values if isinstance(X, FunctionalData) else np.asarray(X)
    P = oracle.project(Xv, modes=target.n_modes)
    return P @ target.response_functions(oracle, grid_S2)


def draw_noise(noise: NoiseSpec, grid_S2: Grid, n: int, rng) -> np.ndarray:
    E = cosine_basis(grid_S2, noise.K)
    eta = rng.normal(0.0, np.sqrt(noise.sigma2 / noise.K), size=(int(n), noise.K))
    return eta @ E


def gen_dataset(oracle: OracleModel, target: TargetSpec, spec: ProcessSpec,
                noise: NoiseSpec, n: int, grid_S2: Grid, seed):
    """Fresh training pairs ``(X_i, Y_i)`` from the model with target ``beta*``.

    Returns ``(inputs, responses)`` as :class:`FunctionalData`.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    x_seed, noise_seed = ss.spawn(2)
    X = draw_processes(spec, oracle.grid, n, x_seed)
    Y = clean_response(oracle, target, X, grid_S2)
    if noise.sigma2 > 0:
        Y = Y + draw_noise(noise, grid_S2, n, np.random.default_rng(noise_seed))
    return X, FunctionalData(grid_S2, Y)


def source_coefficients(oracle: OracleModel, target: TargetSpec, grid_S2: Grid) -> np.ndarray:
    """Recover ``v`` from ``beta*`` by projection and division by ``phi(mu_m)``.

    ``beta*`` is first rewritten in the oracle-sample representation
    ``sum_w chi(X~_w) (x) a_w(t)``; its coordinates on ``e_k (x) phi_m`` are then
    computed with the oracle Gram and quadrature, independently of the
    closed-form coefficients.
    """
    nm = target.n_modes
    W = oracle.weights[:, :nm]
    A = W @ target.response_functions(oracle, grid_S2)        # a_w(t)
    feat = oracle.gram @ W                                     # <chi~_w, phi_m>
    E = cosine_basis(grid_S2, target.n_basis)
    coords = feat.T @ (A * grid_S2.weights) @ E.T              # <beta*, e_k (x) phi_m>
    return coords / target.phi(oracle.eigenvalues[:nm])[:, None]
