"""Linear MMV measurement model, Gaussian posterior (E-step) and related quantities.

Indices are 0-based throughout the package.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import ConfigurationError, NumericError

GAMMA_FLOOR = 1e-10


@dataclass(frozen=True)
class Problem:
    """Fixed inputs to inference: ``Y = A X + W`` with ``W ~ CN(0, sigma2 I)``."""

    A: np.ndarray
    Y: np.ndarray
    sigma2: float

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        Y = np.asarray(self.Y, dtype=complex)
        if Y.ndim == 1:
            Y = Y[:, None]
        if A.ndim != 2 or Y.ndim != 2:
            raise ConfigurationError("A and Y must be matrices")
        if A.shape[0] != Y.shape[0]:
            raise ConfigurationError(
                f"row mismatch: A has {A.shape[0]} rows, Y has {Y.shape[0]}")
        if min(A.shape) < 1 or Y.shape[1] < 1:
            raise ConfigurationError("empty problem dimensions")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(Y))):
            raise ConfigurationError("A and Y must be finite")
        sigma2 = float(self.sigma2)
        if not (np.isfinite(sigma2) and sigma2 > 0):
            raise ConfigurationError(f"sigma2 must be positive, got {self.sigma2}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "sigma2", sigma2)

    @property
    def L(self):
        return self.A.shape[0]

    @property
    def N(self):
        return self.A.shape[1]

    @property
    def M(self):
        return self.Y.shape[1]


@dataclass(frozen=True)
class PosteriorState:
    mu: np.ndarray     # N x M posterior means, one column per measurement vector
    Sigma: np.ndarray  # N x N covariance shared by all columns
    s: np.ndarray      # per-index EM statistic


def _floored(gamma, n, gamma_floor):
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (n,):
        raise ConfigurationError(f"gamma must have shape ({n},), got {gamma.shape}")
    return np.maximum(gamma, gamma_floor)


def compute_s(mu, Sigma, M=None):
    """Row-wise EM statistic ``Sigma_ii + (1/M) sum_m |mu_im|^2``."""
    mu = np.asarray(mu)
    if mu.ndim == 1:
        mu = mu[:, None]
    Sigma = np.asarray(Sigma)
    if M is None:
        M = mu.shape[1]
    if Sigma.shape != (mu.shape[0], mu.shape[0]) or mu.shape[1] != M:
        raise ConfigurationError("compute_s: inconsistent dimensions")
    return np.real(np.diagonal(Sigma)) + np.sum(np.abs(mu) ** 2, axis=1) / M


def posterior_update(problem, gamma, gamma_floor=GAMMA_FLOOR, em_iteration=None):
    """Posterior of every column of X given hyper-parameters ``gamma``.

    Factorizes the N x N precision ``A^H A / sigma2 + diag(1/gamma)`` by Cholesky.
    """
    gamma = _floored(gamma, problem.N, gamma_floor)
    A, Y, sigma2 = problem.A, problem.Y, problem.sigma2
    AH = A.conj().T
    precision = (AH @ A) / sigma2
    precision[np.diag_indices_from(precision)] += 1.0 / gamma
    try:
        factor = sla.cho_factor(precision, lower=True, check_finite=True)
        Sigma = sla.cho_solve(factor, np.eye(problem.N, dtype=complex))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"posterior factorization failed: {exc}",
                           em_iteration=em_iteration) from exc
    Sigma = 0.5 * (Sigma + Sigma.conj().T)
    mu = Sigma @ (AH @ Y) / sigma2
    if not np.all(np.isfinite(mu)):
        raise NumericError("non-finite posterior mean", em_iteration=em_iteration)
    return PosteriorState(mu=mu, Sigma=Sigma, s=compute_s(mu, Sigma, problem.M))


def measurement_covariance(problem, gamma, gamma_floor=GAMMA_FLOOR):
    gamma = _floored(gamma, problem.N, gamma_floor)
    A = problem.A
    return problem.sigma2 * np.eye(problem.L) + (A * gamma) @ A.conj().T


def marginal_objective(problem, gamma, gamma_floor=GAMMA_FLOOR):
    """Type-II cost ``M log det(Sigma_y) + Tr[Y^H Sigma_y^{-1} Y]`` (monitoring only)."""
    Sy = measurement_covariance(problem, gamma, gamma_floor)
    try:
        c = sla.cho_factor(Sy, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"Sigma_y factorization failed: {exc}") from exc
    logdet = 2.0 * np.sum(np.log(np.real(np.diagonal(c[0]))))
    fit = np.real(np.vdot(problem.Y, sla.cho_solve(c, problem.Y)))
    value = problem.M * logdet + fit
    if not np.isfinite(value):
        raise NumericError("non-finite marginal objective")
    return float(value)


def marginal_objective_woodbury(problem, gamma, gamma_floor=GAMMA_FLOOR):
    """Same cost evaluated through the N x N posterior instead of Sigma_y.

    Uses the determinant lemma and the Woodbury identity; kept as a cross-check
    for :func:`marginal_objective`.
    """
    gamma = _floored(gamma, problem.N, gamma_floor)
    post = posterior_update(problem, gamma, gamma_floor)
    sigma2, Y = problem.sigma2, problem.Y
    _, logdet_sigma_x = np.linalg.slogdet(post.Sigma)
    logdet = problem.L * np.log(sigma2) + np.sum(np.log(gamma)) - logdet_sigma_x
    AhY = problem.A.conj().T @ Y
    fit = (np.vdot(Y, Y) - np.vdot(AhY, post.Sigma @ AhY) / sigma2) / sigma2
    return float(problem.M * logdet + np.real(fit))


def oracle_mmse(problem, true_support, true_gamma):
    """Linear MMSE estimate of X given the true support and true prior variances."""
    support = np.asarray(sorted(true_support), dtype=int)
    if support.size == 0 or support.size > problem.N:
        raise ConfigurationError("oracle support must be nonempty and at most N")
    if support[0] < 0 or support[-1] >= problem.N:
        raise ConfigurationError("oracle support index out of range")
    true_gamma = np.broadcast_to(np.asarray(true_gamma, dtype=float), support.shape)
    sub = Problem(problem.A[:, support], problem.Y, problem.sigma2)
    X = np.zeros((problem.N, problem.M), dtype=complex)
    X[support] = posterior_update(sub, true_gamma, gamma_floor=0.0).mu
    return X
