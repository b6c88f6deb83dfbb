"""Lower-bound construction: separated hypotheses with a bounded KL budget.

Hypotheses are indexed by binary words ``theta`` of length ``M``.  On the
spectral slice ``mu_{M+1} .. mu_{2M}`` of the feature covariance,

    g_theta = sum_k eps theta_k M^{-1/2} (1 (x) phi_{k+M}) / (phi(mu_{k+M}) mu_{k+M}^s)
    f_theta = phi(A*A) g_theta,

so ``f_theta`` has coordinate ``eps theta_k M^{-1/2} mu_{k+M}^{-s}`` on mode
``k + M``.  Word pairs at Hamming distance ``H`` are separated by
``(eps^2 / M) H`` in the ``s``-norm, and under Gaussian white noise the KL
divergence between the induced data laws is
``(n / 2 sigma^2) || (A*A)^{1/2} (f_i - f_j) ||^2``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    ConstructionBugError,
    EpsilonTooLargeError,
    InvalidArgumentError,
    SearchFailureError,
)
from .metrics import theoretical_lambda
from .source import IndexFunction, index_function_from_spec

__all__ = [
    "Codebook",
    "HypothesisFamily",
    "vg_codebook",
    "hamming_matrix",
    "power_spectrum",
    "max_admissible_epsilon",
    "hypothesis_family",
    "separation_check",
    "kl_divergence",
    "kl_matrix",
    "tsybakov_bound",
    "ProofParameters",
    "proof_parameters",
    "lower_bound_report",
]


@dataclass(frozen=True, eq=False)
class Codebook:
    """Binary words with pairwise Hamming distance above ``M/8``; row 0 is all-zero."""

    M: int
    words: np.ndarray

    @property
    def N(self) -> int:
        """Number of words minus one (the hypotheses besides ``theta_0``)."""
        return self.words.shape[0] - 1

    @property
    def target_count(self) -> int:
        return math.ceil(2 ** (self.M / 8))

    def min_distance(self) -> int:
        H = hamming_matrix(self.words)
        np.fill_diagonal(H, self.M + 1)
        return int(H.min())


def hamming_matrix(words: np.ndarray) -> np.ndarray:
    """All pairwise Hamming distances of 0/1 rows."""
    W = np.asarray(words, dtype=np.int64)
    return W @ (1 - W).T + (1 - W) @ W.T


def vg_codebook(M: int, seed=0, max_draws: int = 10**6, max_words=None) -> Codebook:
    """Greedy Varshamov-Gilbert codebook.

    For ``M <= 16`` every word of ``{0,1}^M`` is visited in lexicographic order
    (starting at the all-zero word) and kept when it is farther than ``M/8``
    from all kept words.  Larger ``M`` draws up to ``max_draws`` random words
    and stops at ``max_words`` (default: the target ``ceil(2^{M/8})``).
    """
    if int(M) != M or M < 8:
        raise InvalidArgumentError("codebook length M must be an integer >= 8")
    if M > 64:
        raise InvalidArgumentError("codebooks are supported up to M = 64")
    if M <= 16:
        seed = 0                        # the exhaustive search ignores the seed
    return _search(int(M), int(seed), int(max_draws),
                   None if max_words is None else int(max_words))


@functools.lru_cache(maxsize=32)
def _search(M: int, seed: int, max_draws: int, max_words) -> Codebook:
    need = math.ceil(2 ** (M / 8))
    thresh = M / 8
    if M <= 16:
        candidates = np.arange(1, 2**M, dtype=np.uint64)
        cap = 2**M if max_words is None else int(max_words)
    else:
        rng = np.random.default_rng(seed)
        candidates = rng.integers(0, 2**M - 1, size=int(max_draws), dtype=np.uint64,
                                  endpoint=True)
        cap = need if max_words is None else int(max_words)
    # words packed into uint64: Hamming distance = popcount of the XOR
    kept = np.zeros(min(cap, candidates.size + 1), dtype=np.uint64)
    count = 1
    for w in candidates:
        if count >= cap:
            break
        if np.min(np.bitwise_count(kept[:count] ^ w)) > thresh:
            kept[count] = w
            count += 1
    shifts = np.arange(M - 1, -1, -1, dtype=np.uint64)
    words = ((kept[:count, None] >> shifts) & np.uint64(1)).astype(np.int8)
    if words.shape[0] < need:
        raise SearchFailureError(
            f"codebook search reached {words.shape[0]} words, needed {need}",
            achieved=int(words.shape[0]),
            target=need,
        )
    words.setflags(write=False)
    return Codebook(M, words)


def power_spectrum(m_max: int, b: float, b0: float = 1.0) -> np.ndarray:
    """``mu_m = b0 m^{-b}`` for ``m = 1..m_max``."""
    return b0 * np.arange(1, int(m_max) + 1, dtype=float) ** (-float(b))


def _slice(spectrum, M):
    mu = np.asarray(spectrum, dtype=float)
    if mu.size < 2 * M:
        raise InvalidArgumentError(f"spectrum must provide mu_m for m <= {2 * M}")
    return mu[M: 2 * M].copy()


def max_admissible_epsilon(spectrum, phi, R: float, M: int, s: float) -> float:
    """Largest ``eps`` with ``||g_theta|| <= R`` for every word (all-ones worst case)."""
    phi = index_function_from_spec(phi)
    mu = _slice(spectrum, M)
    return float(R / np.sqrt(np.sum(1.0 / (M * phi(mu) ** 2 * mu ** (2 * s)))))


@dataclass(frozen=True, eq=False)
class HypothesisFamily:
    """Coordinates of ``f_theta`` (and ``g_theta``) on modes ``M+1 .. 2M``."""

    epsilon: float
    s: float
    M: int
    mu: np.ndarray
    phi: IndexFunction
    R: float
    codebook: Codebook
    f_coefficients: np.ndarray
    g_coefficients: np.ndarray

    @property
    def size(self) -> int:
        return self.f_coefficients.shape[0]

    def g_norms(self) -> np.ndarray:
        return np.sqrt(np.sum(self.g_coefficients**2, axis=1))

    def s_norms(self) -> np.ndarray:
        """``||(A*A)^s f_theta||`` per member."""
        return np.sqrt(np.sum(self.f_coefficients**2 * self.mu ** (2 * self.s), axis=1))


def hypothesis_family(spectrum, phi, R: float, epsilon: float, M: int, s: float,
                      codebook: Codebook) -> HypothesisFamily:
    """Build ``f_theta`` for every codebook word; reject if any ``||g_theta|| > R``."""
    phi = index_function_from_spec(phi)
    if not 0 <= s <= 0.5:
        raise InvalidArgumentError("s must lie in [0, 1/2]")
    if not epsilon > 0:
        raise InvalidArgumentError("epsilon must be positive")
    if codebook.M != M:
        raise InvalidArgumentError(f"codebook has length {codebook.M}, expected {M}")
    mu = _slice(spectrum, M)
    theta = codebook.words.astype(float)
    base = epsilon / np.sqrt(M)
    f = theta * base * mu ** (-s)
    g = f / phi(mu)
    g_norm2 = np.sum(g**2, axis=1)
    if np.max(g_norm2) > R**2 * (1 + 1e-12):
        # the heaviest word decides; scale eps down to match it
        eps_max = epsilon * R / np.sqrt(np.max(g_norm2))
        raise EpsilonTooLargeError(
            f"||g_theta|| = {np.sqrt(np.max(g_norm2)):.6g} exceeds R = {R}; "
            f"largest admissible epsilon for this codebook is {eps_max:.6g}",
            max_epsilon=float(eps_max),
        )
    for a in (f, g, mu):
        a.setflags(write=False)
    return HypothesisFamily(float(epsilon), float(s), int(M), mu, phi, float(R),
                            codebook, f, g)


def _pairwise_sq(coeffs: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """``sum_k weights_k (c_ik - c_jk)^2`` for all pairs."""
    n = coeffs.shape[0]
    D = np.zeros((n, n))
    for i in range(n - 1):
        diff = coeffs[i + 1:] - coeffs[i]
        D[i, i + 1:] = (diff**2) @ weights
    return D + D.T


@dataclass
class SeparationReport:
    min_separation: float
    threshold: float
    max_identity_error: float
    n_pairs: int

    @property
    def passed(self) -> bool:
        return self.min_separation >= self.threshold


def separation_check(family: HypothesisFamily, codebook: Codebook = None) -> SeparationReport:
    """Check ``||(A*A)^s (f_i - f_j)||^2 >= eps^2 / 8`` for all pairs ``i != j``.

    The squared separations are computed from the coordinates and compared with
    the closed form ``(eps^2 / M) H(theta_i, theta_j)``.
    """
    codebook = family.codebook if codebook is None else codebook
    D = _pairwise_sq(family.f_coefficients, family.mu ** (2 * family.s))
    H = hamming_matrix(codebook.words)
    expected = family.epsilon**2 / family.M * H
    iu = np.triu_indices(family.size, k=1)
    scale = family.epsilon**2
    identity_err = float(np.max(np.abs(D[iu] - expected[iu])) / scale) if iu[0].size else 0.0
    thresh = family.epsilon**2 / 8
    min_sep = float(np.min(D[iu])) if iu[0].size else float("inf")
    # exact Hamming arithmetic decides the inequality; float D is the cross-check
    exact_min = float(np.min(expected[iu])) if iu[0].size else float("inf")
    if exact_min < thresh or min_sep < thresh * (1 - 1e-12):
        raise ConstructionBugError(
            f"separation {min(min_sep, exact_min):.6g} below eps^2/8 = {thresh:.6g}"
        )
    return SeparationReport(min_sep, thresh, identity_err, int(iu[0].size))


def kl_matrix(family: HypothesisFamily, n: int, sigma2: float) -> np.ndarray:
    """All pairwise KL divergences ``(n / 2 sigma^2) ||(A*A)^{1/2}(f_i - f_j)||^2``."""
    if not sigma2 > 0:
        raise InvalidArgumentError("noise variance sigma2 must be positive")
    return n / (2.0 * sigma2) * _pairwise_sq(family.f_coefficients, family.mu)


def kl_divergence(family: HypothesisFamily, i: int, j: int, n: int, sigma2: float) -> float:
    """KL divergence between the data laws of members ``i`` and ``j``."""
    if not sigma2 > 0:
        raise InvalidArgumentError("noise variance sigma2 must be positive")
    for idx in (i, j):
        if not 0 <= idx < family.size:
            raise InvalidArgumentError(f"member index {idx} out of range")
    diff = family.f_coefficients[i] - family.f_coefficients[j]
    return float(n / (2.0 * sigma2) * np.sum(diff**2 * family.mu))


def tsybakov_bound(N: int, u: float) -> float:
    """``sqrt(N)/(1 + sqrt(N)) (1 - 2u - sqrt(2u / log N))``."""
    if not 0 < u < 1 / 8:
        raise InvalidArgumentError("u must lie in (0, 1/8)")
    if not N > 2:
        raise InvalidArgumentError("N must exceed 2")
    rN = math.sqrt(N)
    return rN / (1 + rN) * (1 - 2 * u - math.sqrt(2 * u / math.log(N)))


@dataclass
class ProofParameters:
    """Constants of the lower-bound argument for one ``(M, b, s)``."""

    n: int
    lam: float
    M: int
    c1: float
    c0_tilde: float
    c0: float
    epsilon: float
    a: float


def proof_parameters(M: int, b: float, s: float, phi, R: float, sigma2: float,
                     u: float, b0: float = 1.0, b1: float = 1.0) -> ProofParameters:
    """Sample size and ``eps`` for which the proof's recipe yields length ``M``.

    With ``lam* = psi^{-1}(n^{-1/2})`` the recipe sets
    ``M = floor((b0 / lam*)^{1/b} / 2)`` and ``eps = c0 R h(lam*)`` with
    ``h(x) = phi(x) x^s``, ``c0 = sqrt(u) c0~`` and ``c0~`` the largest value
    with ``8 c1 c0~^2 R^2 / log 2 <= 1`` (capped so that ``c0 <= 1``).
    """
    phi = index_function_from_spec(phi)
    if not 0 < u < 1 / 8:
        raise InvalidArgumentError("u must lie in (0, 1/8)")
    # smallest n whose lam* sits at the top of the bracket for M
    lam_top = b0 * (2.0 * M) ** (-b)
    psi_top = float(phi(lam_top)) * lam_top ** (0.5 + 0.5 / b)
    n = math.ceil(psi_top ** -2)
    lam = theoretical_lambda(n, phi, b)
    M_rec = math.floor(0.5 * (b0 / lam) ** (1.0 / b))
    if M_rec != M:
        raise ConstructionBugError(f"recipe gives M = {M_rec} at n = {n}, expected {M}")
    e = b * (1 - 2 * s) + 1
    c1 = 4**e * b1 ** (1 - 2 * s) / (2 * sigma2 * b0 ** (e / b))
    c0_tilde = min(math.sqrt(math.log(2) / (8 * c1 * R**2)), 1 / math.sqrt(u))
    c0 = math.sqrt(u) * c0_tilde
    epsilon = c0 * R * float(phi(lam)) * lam**s
    a = u * c0_tilde * R / (4 * math.sqrt(2))
    return ProofParameters(n, lam, M, c1, c0_tilde, c0, epsilon, a)


def lower_bound_report(M: int, b: float = 2.0, s: float = 0.0, phi=None, R: float = 1.0,
                       sigma2: float = 1.0, u: float = 0.1, b0: float = 1.0,
                       b1: float = 1.0, seed=0) -> dict:
    """Run the full construction for one ``M`` and summarize it."""
    phi = index_function_from_spec({"kind": "holder", "r": 1.0} if phi is None else phi)
    params = proof_parameters(M, b, s, phi, R, sigma2, u, b0, b1)
    code = vg_codebook(M, seed=seed)
    spectrum = power_spectrum(2 * M, b, b0)
    fam = hypothesis_family(spectrum, phi, R, params.epsilon, M, s, code)
    sep = separation_check(fam, code)
    KL = kl_matrix(fam, params.n, sigma2)
    logN = math.log(code.N)
    max_kl = float(KL.max())
    mean_kl0 = float(KL[0, 1:].mean())
    return {
        "M": M,
        "N": code.N,
        "b": b,
        "s": s,
        "u": u,
        "R": R,
        "sigma2": sigma2,
        "n": params.n,
        "lambda": params.lam,
        "epsilon": params.epsilon,
        "c1": params.c1,
        "c0_tilde": params.c0_tilde,
        "c0": params.c0,
        "a": params.a,
        "max_g_norm": float(fam.g_norms().max()),
        "min_separation": sep.min_separation,
        "separation_threshold": sep.threshold,
        "separation_identity_error": sep.max_identity_error,
        "max_kl": max_kl,
        "mean_kl_to_zero": mean_kl0,
        "max_kl_over_log_N": max_kl / logN,
        "kl_budget_ok": max_kl <= u * logN,
        "tsybakov_bound": tsybakov_bound(code.N, u),
    }
