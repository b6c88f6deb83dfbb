"""Direct tensor-grid discretizations used as independent oracles.

Nothing here goes through the Gram reduction: features are materialized on
the ``l``-fold product grid, the regularized normal equation is assembled as
one dense matrix over ``S2-grid x feature-grid`` unknowns, and integrals are
plain weighted sums.  Sizes grow like ``m^p``, so keep grids tiny.
"""

from __future__ import annotations

import numpy as np

from .exceptions import ResourceLimitError
from .functional import Grid

__all__ = [
    "tensor_power",
    "tensor_weights",
    "feature_vectors",
    "feature_weights",
    "brute_feature_inner",
    "direct_tikhonov",
    "split_components",
    "components_inner",
    "components_norm",
    "brute_predict",
    "estimate_components",
    "target_components",
]


def tensor_power(x: np.ndarray, l: int) -> np.ndarray:
    """Flattened ``x (x) ... (x) x`` (``l`` factors); ``l = 0`` gives ``[1]``."""
    out = np.ones(1)
    for _ in range(l):
        out = np.multiply.outer(out, x).ravel()
    return out


def tensor_weights(w: np.ndarray, l: int) -> np.ndarray:
    return tensor_power(w, l)


def feature_vectors(X: np.ndarray, p: int, limit: int = 2_000_000) -> np.ndarray:
    """Rows ``chi(X_i)`` concatenated over ``l = 0..p``; shape ``(n, sum_l m^l)``."""
    m = X.shape[1]
    dim = sum(m**l for l in range(p + 1))
    if dim * X.shape[0] > limit:
        raise ResourceLimitError(f"feature tensor of size {dim} x {X.shape[0]} is too large")
    return np.stack([np.concatenate([tensor_power(x, l) for l in range(p + 1)]) for x in X])


def feature_weights(w: np.ndarray, p: int) -> np.ndarray:
    return np.concatenate([tensor_weights(w, l) for l in range(p + 1)])


def brute_feature_inner(x1: np.ndarray, x2: np.ndarray, w: np.ndarray, p: int) -> float:
    """``<chi(x1), chi(x2)>`` by summing over every product-grid point."""
    total = 0.0
    for l in range(p + 1):
        total += float(np.sum(tensor_weights(w, l) * tensor_power(x1, l) * tensor_power(x2, l)))
    return total


def direct_tikhonov(X: np.ndarray, Y: np.ndarray, x_grid: Grid, y_grid: Grid, p: int,
                    lam: float) -> np.ndarray:
    """Solve ``([A*A]_n + lam I) beta = [A*Y]_n`` on the full tensor-grid basis.

    Unknowns are the values ``beta_l(t, s_1..s_l)`` at all grid nodes, ordered
    as ``(t, feature-node)``.  The empirical operator maps
    ``beta -> (1/n) sum_i B_i^* B_i beta`` where ``B_i`` integrates against the
    materialized features of ``X_i``; it is assembled densely, including the
    identity factor on the ``S2`` grid.  Returns ``beta`` of shape ``(m2, D)``.
    """
    n = X.shape[0]
    Phi = feature_vectors(X, p)                     # (n, D)
    wf = feature_weights(x_grid.weights, p)         # (D,)
    D = Phi.shape[1]
    m2 = y_grid.size
    if (m2 * D) ** 2 > 5e7:
        raise ResourceLimitError(f"direct system of size {m2 * D} is too large")
    # B_i beta (t) = sum_u wf_u Phi_iu beta(t, u); B_i^* g (t, u) = g(t) Phi_iu
    G = (Phi.T @ (Phi * wf)) / n                    # (D, D): feature-space operator
    op = np.kron(np.eye(m2), G) + lam * np.eye(m2 * D)
    rhs = (Y.T @ Phi) / n                           # (m2, D)
    beta = np.linalg.solve(op, rhs.ravel())
    return beta.reshape(m2, D)


def split_components(beta: np.ndarray, m1: int, p: int) -> list:
    """Cut a ``(m2, D)`` array into ``beta_l`` of shape ``(m2, m1, ..., m1)``."""
    out, start = [], 0
    for l in range(p + 1):
        size = m1**l
        out.append(beta[:, start:start + size].reshape((beta.shape[0],) + (m1,) * l))
        start += size
    return out


def components_inner(a: list, b: list, x_grid: Grid, y_grid: Grid) -> float:
    total = 0.0
    for l, (al, bl) in enumerate(zip(a, b)):
        w = np.multiply.outer(y_grid.weights, tensor_weights(x_grid.weights, l))
        total += float(np.sum(w.ravel() * al.ravel() * bl.ravel()))
    return total


def components_norm(a: list, x_grid: Grid, y_grid: Grid) -> float:
    return float(np.sqrt(max(components_inner(a, a, x_grid, y_grid), 0.0)))


def brute_predict(components: list, x_new: np.ndarray, x_grid: Grid) -> np.ndarray:
    """``sum_l int beta_l(t, s_1..s_l) prod_k x(s_k) ds`` by tensor quadrature."""
    out = 0.0
    for l, bl in enumerate(components):
        kernel = tensor_weights(x_grid.weights, l) * tensor_power(x_new, l)
        out = out + bl.reshape(bl.shape[0], -1) @ kernel
    return out


def estimate_components(est) -> list:
    """All ``beta_hat_l`` of a fitted estimator, materialized on the tensor grid."""
    return [est.beta_component(l) for l in range(est.degree + 1)]


def target_components(oracle, target, y_grid: Grid) -> list:
    """``beta*_l(t, s..) = sum_m b_m(t) phi_m,l(s..)`` on the tensor grid."""
    W = oracle.weights[:, : target.n_modes]
    B = target.response_functions(oracle, y_grid)
    A = W @ B                                       # a_w(t)
    X = oracle.inputs.values
    m1 = X.shape[1]
    comps = []
    for l in range(oracle.degree + 1):
        feats = np.stack([tensor_power(x, l) for x in X])          # (N, m1^l)
        comps.append((A.T @ feats).reshape((B.shape[1],) + (m1,) * l))
    return comps
