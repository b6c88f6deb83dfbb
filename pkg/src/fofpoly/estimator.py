"""Spectral-regularized function-on-function polynomial regression.

The estimator solves the regularized empirical normal equation
``beta = g_lam([A*A]_n) [A*Y]_n`` without discretizing the (huge) space of
slope kernels.  The reduction:

* ``[A*A]_n`` acts as ``I_{L2(S2)} (x) Gamma_n`` with
  ``Gamma_n = (1/n) sum_i chi_i (x) chi_i``, so
  ``g_lam([A*A]_n) = I (x) g_lam(Gamma_n)``;
* on the span of the training features, ``Gamma_n`` acts on coefficient
  vectors as ``(1/n) M`` where ``M`` is the feature Gram matrix, hence with
  ``(1/n) M = U D U^T`` we get ``g_lam(Gamma_n) chi_j = sum_i C_ij chi_i`` for
  ``C = U g_lam(D) U^T``;
* ``[A*Y]_n = (1/n) sum_j Y_j (x) chi_j``.

Together, ``beta_hat = (1/n) sum_{i,j} C_ij Y_j (x) chi_i`` and a new input
``x`` is mapped to ``(1/n) sum_{i,j} k_i C_ij Y_j`` with
``k_i = <chi(x), chi(X_i)>``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .exceptions import InvalidArgumentError, NumericError, ResourceLimitError
from .functional import FunctionalData, FunctionalSample, Grid, feature_gram
from .regularization import RegularizationFamily, g_apply, get_family
from .validation import check_degree, check_grid, check_positive, resolve_functional

__all__ = [
    "EigenSystem",
    "SpectralPolyRegressor",
    "PolyRegEstimate",
    "spectral_coefficients",
    "fit",
    "predict",
]


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Eigendecomposition ``(1/n) M = U diag(d) U^T`` with ``d`` descending.

    Negative eigenvalues and those below the numerical rank tolerance
    ``n * eps * d_1`` are clamped to zero.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_gram(cls, M: np.ndarray) -> "EigenSystem":
        M = np.asarray(M, dtype=float)
        n = M.shape[0]
        if n == 0:
            raise InvalidArgumentError("cannot decompose an empty Gram matrix")
        A = 0.5 * (M + M.T) / n
        try:
            d, U = np.linalg.eigh(A)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"eigensolver failed: {exc}") from exc
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(U))):
            raise NumericError("eigensolver returned non-finite values")
        d = d[::-1].copy()
        U = U[:, ::-1].copy()
        tol = n * np.finfo(float).eps * max(d[0], 0.0)
        d[d <= tol] = 0.0
        d.setflags(write=False)
        U.setflags(write=False)
        return cls(d, U)

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.eigenvalues))

    def smallest_positive(self) -> float:
        pos = self.eigenvalues[self.eigenvalues > 0]
        return float(pos[-1]) if pos.size else 0.0

    def reconstruct(self) -> np.ndarray:
        U, d = self.eigenvectors, self.eigenvalues
        return (U * d) @ U.T


def spectral_coefficients(eig: EigenSystem, family, lam: float):
    """Coefficient matrix ``C = U g_lam(D) U^T`` and the spectral scale used.

    Landweber needs spectra in ``[0, 1]``: the eigenvalues are divided by
    ``eta = max(d_1, 1)`` and ``g`` is rescaled by ``1/eta`` afterwards.
    """
    family = get_family(family)
    lam = check_positive(lam, "lambda")
    d = eig.eigenvalues
    scale = 1.0
    if family.requires_unit_spectrum:
        scale = max(float(d[0]), 1.0)
        gd = np.asarray(g_apply(family, lam, np.minimum(d / scale, 1.0))) / scale
    else:
        gd = np.asarray(g_apply(family, lam, d))
    U = eig.eigenvectors
    C = (U * gd) @ U.T
    C = 0.5 * (C + C.T)
    return C, scale


def _is_functional(obj) -> bool:
    return isinstance(obj, (FunctionalData, FunctionalSample)) or (
        isinstance(obj, (list, tuple)) and len(obj) > 0 and isinstance(obj[0], FunctionalSample)
    )


def _grid_for(values, grid, name):
    """Grid for validated array input; the default is uniform on ``[0, 1]``."""
    _, grid = resolve_functional(values, grid, name)
    return grid


class SpectralPolyRegressor(RegressorMixin, BaseEstimator):
    """Function-on-function polynomial regression with spectral regularization.

    Parameters
    ----------
    degree : int, default=1
        Polynomial degree ``p`` of the model; ``p = 0`` fits the intercept only.
    alpha : float, default=0.1
        Regularization parameter ``lambda``.  For Landweber the number of
        iterations is ``ceil(1/alpha)``.
    family : {'tikhonov', 'cutoff', 'landweber'} or RegularizationFamily
        Spectral filter applied to the empirical covariance of the features.
    x_grid, y_grid : Grid, optional
        Grids of the input and response functions.  Default to the grid of a
        :class:`FunctionalData` argument, or to the uniform grid on ``[0, 1]``
        matching the number of columns.

    Attributes
    ----------
    gram_ : ndarray of shape (n, n)
        Feature Gram matrix of the training inputs.
    eig_ : EigenSystem
        Decomposition of ``gram_ / n``.
    coef_ : ndarray of shape (n, n)
        Coefficient matrix ``C``.
    dual_ : ndarray of shape (n, m2)
        Response combinations ``a_i = sum_j C_ij Y_j``.
    scale_ : float
        Spectral scale applied before filtering (1 unless Landweber).

    Examples
    --------
    >>> import numpy as np
    >>> from fofpoly import SpectralPolyRegressor
    >>> rng = np.random.default_rng(0)
    >>> X, Y = rng.normal(size=(20, 11)), rng.normal(size=(20, 7))
    >>> est = SpectralPolyRegressor(degree=2, alpha=0.1).fit(X, Y)
    >>> est.predict(X[:3]).shape
    (3, 7)
    """

    def __init__(self, degree=1, alpha=0.1, family="tikhonov", x_grid=None, y_grid=None):
        self.degree = degree
        self.alpha = alpha
        self.family = family
        self.x_grid = x_grid
        self.y_grid = y_grid

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.target_tags.multi_output = True
        return tags

    def fit(self, X, y):
        p = check_degree(self.degree)
        lam = check_positive(self.alpha, "alpha")
        family = get_family(self.family)
        x_grid, y_grid = check_grid(self.x_grid, "x_grid"), check_grid(self.y_grid, "y_grid")
        if _is_functional(X):
            X, x_grid = resolve_functional(X, x_grid, "X")
        if _is_functional(y):
            y, y_grid = resolve_functional(y, y_grid, "Y")
        # array checks first, so malformed input gets the usual scikit-learn errors
        Xv, Yv = validate_data(self, X, y, multi_output=True, y_numeric=True)
        x_grid = _grid_for(Xv, x_grid, "X")
        Yv = np.asarray(Yv, dtype=float)
        self.ravel_output_ = Yv.ndim == 1
        if Yv.ndim == 1 or (Yv.shape[1] == 1 and y_grid is None):
            # scalar response: a one-point rule with unit weight
            y_grid, y_weights, scalar = None, np.ones(1), True
        else:
            y_grid = _grid_for(Yv, y_grid, "Y")
            y_weights, scalar = y_grid.weights, False
        Yv = Yv.reshape(Xv.shape[0], -1)

        M = feature_gram(Xv, Xv, x_grid.weights, p)
        M = 0.5 * (M + M.T)
        self.gram_ = M
        self.eig_ = EigenSystem.from_gram(M)
        self.family_ = family
        self.x_grid_ = x_grid
        self.y_grid_ = y_grid
        self.y_weights_ = y_weights
        self.scalar_response_ = scalar
        self.X_fit_ = np.array(Xv, dtype=float)
        self.Y_fit_ = Yv
        self._set_coefficients(lam)
        return self

    def _set_coefficients(self, lam):
        self.coef_, self.scale_ = spectral_coefficients(self.eig_, self.family_, lam)
        self.dual_ = self.coef_ @ self.Y_fit_
        self.lambda_ = lam

    @property
    def n_train_(self) -> int:
        return self.X_fit_.shape[0]

    def with_alpha(self, alpha) -> "SpectralPolyRegressor":
        """Refit at another ``alpha`` reusing the stored eigendecomposition."""
        check_is_fitted(self, "eig_")
        new = type(self)(**{**self.get_params(), "alpha": alpha})
        for attr in ("gram_", "eig_", "family_", "x_grid_", "y_grid_", "y_weights_",
                     "scalar_response_", "ravel_output_", "X_fit_", "Y_fit_", "n_features_in_"):
            setattr(new, attr, getattr(self, attr))
        new._set_coefficients(check_positive(alpha, "alpha"))
        return new

    def feature_kernel(self, X) -> np.ndarray:
        """``K[w, i] = <chi(X_w), chi(X_i)>`` against the training inputs."""
        check_is_fitted(self, "eig_")
        if _is_functional(X):
            X, _ = resolve_functional(X, self.x_grid_, "X")
        Xv = validate_data(self, X, reset=False)
        _grid_for(Xv, self.x_grid_, "X")
        return feature_gram(Xv, self.X_fit_, self.x_grid_.weights, self.degree)

    def predict(self, X):
        """Predicted response functions, shape ``(n_new, m2)``."""
        K = self.feature_kernel(X)
        out = K @ self.dual_ / self.n_train_
        return out[:, 0] if self.ravel_output_ else out

    def predict_training(self) -> np.ndarray:
        """Fitted responses ``(1/n) M C Y`` on the training inputs."""
        check_is_fitted(self, "eig_")
        return self.gram_ @ self.dual_ / self.n_train_

    def component_norms(self) -> np.ndarray:
        """L2 norms of ``beta_hat_l`` for ``l = 0..p`` via Gram algebra."""
        check_is_fitted(self, "eig_")
        G = self.X_fit_ * self.x_grid_.weights @ self.X_fit_.T
        H = (self.dual_ * self.y_weights_) @ self.dual_.T
        n = self.n_train_
        return np.sqrt(np.maximum(
            [np.sum(G**l * H) / n**2 for l in range(self.degree + 1)], 0.0
        ))

    def norm(self) -> float:
        """``||beta_hat||`` in the product L2 space."""
        check_is_fitted(self, "eig_")
        H = (self.dual_ * self.y_weights_) @ self.dual_.T
        return float(np.sqrt(max(np.sum(self.gram_ * H), 0.0)) / self.n_train_)

    def beta_component(self, l: int, tensor_budget: int = 10**7) -> np.ndarray:
        """Materialize ``beta_hat_l(t, s_1..s_l)`` on the tensor grid.

        Returns an array of shape ``(m2, m1, ..., m1)`` with ``l`` trailing axes.
        """
        check_is_fitted(self, "eig_")
        if int(l) != l or not 0 <= l <= self.degree:
            raise InvalidArgumentError(f"component index must be in [0, {self.degree}]")
        l = int(l)
        m1, m2 = self.X_fit_.shape[1], self.dual_.shape[1]
        size = m1**l * m2
        if size > tensor_budget:
            raise ResourceLimitError(
                f"component {l} needs {size} entries, budget is {tensor_budget}"
            )
        out = np.zeros((m2,) + (m1,) * l)
        for x, a in zip(self.X_fit_, self.dual_):
            term = a
            for _ in range(l):
                term = np.multiply.outer(term, x)
            out += term
        return out / self.n_train_


#: The fitted estimator doubles as the estimate record.
PolyRegEstimate = SpectralPolyRegressor


def fit(X, Y, p: int, lam: float, family) -> SpectralPolyRegressor:
    """Functional-style wrapper around :meth:`SpectralPolyRegressor.fit`."""
    x_grid = X.grid if isinstance(X, FunctionalData) else None
    y_grid = Y.grid if isinstance(Y, FunctionalData) else None
    if isinstance(family, RegularizationFamily):
        family = family.name
    return SpectralPolyRegressor(
        degree=p, alpha=lam, family=family, x_grid=x_grid, y_grid=y_grid
    ).fit(X, Y)


def predict(est: SpectralPolyRegressor, x_new: FunctionalSample) -> FunctionalSample:
    """Predict one response function for one input function."""
    if not isinstance(x_new, FunctionalSample):
        raise InvalidArgumentError("x_new must be a FunctionalSample")
    values = est.predict(x_new)
    if est.scalar_response_:
        raise InvalidArgumentError("the estimate was fitted on scalar responses")
    grid: Grid = est.y_grid_
    return FunctionalSample(grid, values[0])
