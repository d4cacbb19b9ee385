"""Wishart-family distributions, the Gaussian likelihood and ST-prior draws.

Parametrization used throughout the package: ``W_p(delta, D)`` has density

    pi(S) ∝ |S|^((delta - 2) / 2) exp(-tr(S D) / 2),

which is the textbook Wishart with ``n = delta + p - 1`` degrees of freedom
and scale matrix ``inv(D)``.  ``IW_p(delta, D)`` is the law of ``inv(S)`` for
``S ~ W_p(delta, D)``, so ``E[T] = D / (delta - 2)``.  Every density, sampler
and moment below goes through :func:`dof`.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numba
import numpy as np

from .errors import DimensionMismatch, DomainError, NotInPG
from .pdcomp import in_pattern, pd_complete_hastie
from .spd import _tri_inv, cholesky, inverse_spd, log_det, trace_product

LOG_2PI = math.log(2.0 * math.pi)
LOG_PI = math.log(math.pi)


def dof(delta, p):
    """Textbook degrees of freedom for shape parameter ``delta`` in dimension ``p``."""
    return delta + p - 1


class _WishartFamily:
    delta: float
    D: np.ndarray

    def __post_init__(self):
        D = np.array(self.D, dtype=float)
        if D.ndim == 0:
            D = D.reshape(1, 1)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise DimensionMismatch(f"D must be square, got shape {D.shape}")
        if not self.delta >= 1.0:
            raise DomainError(f"delta must be >= 1, got {self.delta}")
        cholesky(D)
        D.setflags(write=False)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "delta", float(self.delta))

    @property
    def p(self):
        return self.D.shape[0]

    @property
    def dof(self):
        return dof(self.delta, self.p)

    @cached_property
    def log_norm(self):
        return log_wishart_norm(self)


@dataclass(frozen=True, eq=False)
class WishartParams(_WishartFamily):
    delta: float
    D: np.ndarray

    def log_pdf(self, S):
        return log_pdf_wishart(S, self)

    def sample(self, rng):
        return sample_wishart(self, rng)


@dataclass(frozen=True, eq=False)
class InvWishartParams(_WishartFamily):
    delta: float
    D: np.ndarray

    def log_pdf(self, T):
        return log_pdf_inv_wishart(T, self)

    def sample(self, rng):
        return sample_inv_wishart(self, rng)


@dataclass(frozen=True)
class SufficientStats:
    """Observation count ``m`` and scatter matrix ``sxx = x.T @ x``."""

    m: int
    sxx: np.ndarray

    @classmethod
    def from_data(cls, x):
        x = np.asarray(x, dtype=float)
        if x.ndim != 2:
            raise DimensionMismatch("data must be an m x p matrix")
        return cls(x.shape[0], x.T @ x)

    @classmethod
    def empty(cls, p):
        """No observations: the likelihood is identically one."""
        return cls(0, np.zeros((p, p)))

    @property
    def p(self):
        return self.sxx.shape[0]


def log_multigamma(p, a):
    """``log Gamma_p(a)``; defined for ``a > (p - 1) / 2``."""
    if not a > (p - 1) / 2.0:
        raise DomainError(f"log_multigamma needs a > {(p - 1) / 2}, got {a}")
    return 0.25 * p * (p - 1) * LOG_PI + sum(math.lgamma(a - 0.5 * j) for j in range(p))


def log_wishart_norm(params):
    """``log I_p(delta, D)``, the log normalizer shared by the W and IW densities."""
    p = params.p
    n = params.dof
    return 0.5 * n * p * math.log(2.0) + log_multigamma(p, 0.5 * n) - 0.5 * n * log_det(params.D)


@numba.njit(cache=True)
def _fill_bartlett(chi2, normals):
    p = chi2.shape[0]
    A = np.zeros((p, p))
    t = 0
    for i in range(p):
        A[i, i] = np.sqrt(chi2[i])
        for j in range(i):
            A[i, j] = normals[t]
            t += 1
    return A


def _bartlett_factor(n, p, rng):
    """Lower-triangular ``A`` with ``A[j, j]^2 ~ chi2(n - j)`` (0-based) and N(0, 1) below."""
    chi2 = 2.0 * rng.standard_gamma(0.5 * (n - np.arange(p)))
    normals = rng.standard_normal(p * (p - 1) // 2)
    return _fill_bartlett(chi2, normals)


def sample_wishart(params, rng):
    """Bartlett draw: ``S = (L A)(L A)^T`` with ``inv(D) = L L^T``."""
    p = params.p
    L = cholesky(inverse_spd(params.D))
    LA = L @ _bartlett_factor(params.dof, p, rng)
    S = LA @ LA.T
    return 0.5 * (S + S.T)


def _inv_wishart_from_chol(C, n, rng):
    # D = C C^T; the Bartlett draw S = C^{-T} A A^T C^{-1} inverts to
    # T = (C A^{-T})(C A^{-T})^T.
    CA = C @ _tri_inv(_bartlett_factor(n, C.shape[0], rng)).T
    T = CA @ CA.T
    return 0.5 * (T + T.T)


def log_pdf_wishart(S, params):
    return (
        0.5 * (params.delta - 2.0) * log_det(S)
        - 0.5 * trace_product(S, params.D)
        - params.log_norm
    )


def sample_inv_wishart(params, rng):
    """``inv(S)`` for ``S ~ W(delta, D)``, drawn without forming ``S``."""
    return _inv_wishart_from_chol(cholesky(params.D), params.dof, rng)


def log_pdf_inv_wishart(T, params):
    # The normalizer depends on D; it must stay in whenever D varies between
    # the two sides of a ratio (as in the block proposal).
    p = params.p
    return (
        -0.5 * (params.delta + 2.0 * p) * log_det(T)
        - 0.5 * trace_product(inverse_spd(T), params.D)
        - params.log_norm
    )


def inv_wishart_mean(params):
    if not params.delta > 2.0:
        raise DomainError(f"inverse-Wishart mean needs delta > 2, got {params.delta}")
    return params.D / (params.delta - 2.0)


def inv_wishart_diag_sd(params):
    if not params.delta > 4.0:
        raise DomainError(f"inverse-Wishart diagonal SD needs delta > 4, got {params.delta}")
    return math.sqrt(2.0 / (params.delta - 4.0)) * np.diag(params.D) / (params.delta - 2.0)


def gaussian_loglik(stats, Q):
    """Log-likelihood of ``m`` zero-mean Gaussian rows with precision ``Q``."""
    if stats.m == 0:
        return 0.0
    Q = np.asarray(Q, dtype=float)
    if Q.shape != stats.sxx.shape:
        raise DimensionMismatch("Q and the scatter matrix differ in shape")
    p = Q.shape[0]
    return 0.5 * stats.m * log_det(Q) - 0.5 * trace_product(Q, stats.sxx) - 0.5 * stats.m * p * LOG_2PI


def unnorm_log_gwishart(Q, graph, delta, D):
    """Unnormalized G-Wishart log density; the normalizer is not available."""
    if not in_pattern(Q, graph):
        raise NotInPG("Q has nonzero entries off the extended edge set")
    return 0.5 * (delta - 2.0) * log_det(Q) - 0.5 * trace_product(Q, D)


def sample_st_prior(graph, prior, rng, settings=None):
    """Draw ``Q = PD_G(sigma)`` with ``sigma`` from ``prior`` (W or IW params)."""
    sigma = prior.sample(rng)
    result = pd_complete_hastie(sigma, graph, settings=settings, strict=True)
    return result.Q

