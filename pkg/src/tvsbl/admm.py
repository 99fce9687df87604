"""ADMM solver for the TV-penalized M-step.

The auxiliary matrix ``C`` and the duals ``lam`` live on the strictly lower
band (i > j) of dense N x N arrays; entries off the band stay zero.
"""
import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NumericError
from .model import GAMMA_FLOOR

GAMMA_CAP = 1e8
DENOM_FLOOR = 1e-6


@dataclass(frozen=True)
class AdmmConfig:
    rho: float = 0.1
    t_max: int = 50
    eps: float = 1e-6
    gamma_floor: float = GAMMA_FLOOR
    gamma_cap: float = GAMMA_CAP
    denom_floor: float = DENOM_FLOOR


@dataclass
class AdmmState:
    gamma: np.ndarray
    C: np.ndarray
    lam: np.ndarray
    rho: float
    t: int = 0
    primal_residuals: list = field(default_factory=list)

    @classmethod
    def initial(cls, gamma, rho):
        n = len(gamma)
        return cls(np.array(gamma, dtype=float), np.zeros((n, n)), np.zeros((n, n)), rho)


def soft_threshold(a, kappa):
    """``sign(a) * max(|a| - kappa, 0)``; works elementwise on arrays."""
    return np.sign(a) * np.maximum(np.abs(a) - kappa, 0.0)


@numba.njit(cache=True, nogil=True)
def _sequential_gamma(gamma, s, beta, C, lam, rho, window, floor, cap, denom_floor):
    n = gamma.shape[0]
    g = gamma.copy()
    bad = -1
    for i in range(n):
        sum_beta = 0.0
        a_lo = 0.0
        a_hi = 0.0
        for j in range(max(0, i - window), i):
            b = beta[i, j]
            sum_beta += b
            a_lo += C[i, j] + b * math.log(g[j]) + lam[i, j] / rho
        for j in range(i + 1, min(n, i + window + 1)):
            b = beta[i, j]
            sum_beta += b
            a_hi += C[j, i] - b * math.log(g[j]) + lam[j, i] / rho
        den = 1.0 + rho * sum_beta - rho * (a_lo - a_hi)
        if den <= denom_floor:
            den = denom_floor
        val = s[i] / den
        if not math.isfinite(val):
            bad = i
            break
        g[i] = min(max(val, floor), cap)
    return g, bad


def gamma_update(state, s, coupling, nbrs, config=AdmmConfig(), em_iteration=None):
    """One Gauss-Seidel sweep of the closed-form gamma update, ascending index.

    Entries already updated in this sweep (j < i) enter through their new values.
    """
    g, bad = _sequential_gamma(
        np.asarray(state.gamma, dtype=float), np.asarray(s, dtype=float),
        coupling.beta, state.C, state.lam, float(state.rho), nbrs.window,
        config.gamma_floor, config.gamma_cap, config.denom_floor)
    if bad >= 0:
        raise NumericError("non-finite gamma update", em_iteration=em_iteration,
                           inner_iteration=state.t, index=bad)
    return g


def _gamma_bar(gamma, coupling, nbrs):
    lg = np.log(gamma)
    i, j = nbrs.rows, nbrs.cols
    return coupling.beta[i, j] * (lg[i] - lg[j])


def c_update(state, gamma_new, coupling, nbrs, M):
    """Proximal step for C: soft-threshold at ``1/(M rho)`` on every banded pair."""
    i, j = nbrs.rows, nbrs.cols
    gbar = _gamma_bar(gamma_new, coupling, nbrs)
    C = np.zeros_like(state.C)
    C[i, j] = soft_threshold(gbar - state.lam[i, j] / state.rho, 1.0 / (M * state.rho))
    return C


def lambda_update(state, C_new, gamma_new, coupling, nbrs):
    i, j = nbrs.rows, nbrs.cols
    lam = state.lam.copy()
    lam[i, j] += state.rho * (C_new[i, j] - _gamma_bar(gamma_new, coupling, nbrs))
    return lam


def primal_residual(C, gamma, coupling, nbrs):
    """``max |C_ij - gbar_ij|`` over the band (0 when there are no pairs)."""
    if nbrs.num_pairs == 0:
        return 0.0
    gbar = _gamma_bar(gamma, coupling, nbrs)
    return float(np.max(np.abs(C[nbrs.rows, nbrs.cols] - gbar)))


def run_mstep(s, coupling, nbrs, config, state, M, em_iteration=None, trace=None):
    """Iterate gamma/C/lambda updates until the squared gamma change is at most
    ``config.eps`` or ``config.t_max`` sweeps have run.

    ``state`` is updated in place so C and lambda warm-start the next call.
    Every gamma iterate is appended to ``trace`` when a list is given.
    Returns the final gamma.
    """
    s = np.asarray(s, dtype=float)
    state.primal_residuals = []
    state.t = 0
    if nbrs.num_pairs == 0:
        # no coupling: the update does not depend on C, lambda or gamma
        state.gamma = gamma_update(state, s, coupling, nbrs, config, em_iteration)
        state.t = 1
        state.primal_residuals.append(0.0)
        if trace is not None:
            trace.append(state.gamma.copy())
        return state.gamma
    for t in range(1, config.t_max + 1):
        state.t = t
        g_new = gamma_update(state, s, coupling, nbrs, config, em_iteration)
        C_new = c_update(state, g_new, coupling, nbrs, M)
        state.lam = lambda_update(state, C_new, g_new, coupling, nbrs)
        state.C = C_new
        change = float(np.sum((g_new - state.gamma) ** 2))
        state.gamma = g_new
        if trace is not None:
            trace.append(g_new.copy())
        state.primal_residuals.append(primal_residual(C_new, g_new, coupling, nbrs))
        if change <= config.eps:
            break
    return state.gamma


def _scalar_terms(i, state, coupling, nbrs):
    """Offsets and weights of the quadratic terms of the scalar gamma_i objective."""
    lg = np.log(state.gamma)
    rho = state.rho
    lo = [j for j in nbrs.neighbors(i) if j < i]
    hi = [j for j in nbrs.neighbors(i) if j > i]
    a_lo = np.array([state.C[i, j] + coupling.beta[i, j] * lg[j] + state.lam[i, j] / rho
                     for j in lo])
    a_hi = np.array([state.C[j, i] - coupling.beta[i, j] * lg[j] + state.lam[j, i] / rho
                     for j in hi])
    b_lo = np.array([coupling.beta[i, j] for j in lo])
    b_hi = np.array([coupling.beta[i, j] for j in hi])
    return a_lo, b_lo, a_hi, b_hi


def scalar_gamma_objective(u, i, state, s, coupling, nbrs):
    """Scalar gamma_i subproblem as a function of ``u = log gamma_i``."""
    a_lo, b_lo, a_hi, b_hi = _scalar_terms(i, state, coupling, nbrs)
    quad = np.sum((a_lo - b_lo * u) ** 2) + np.sum((a_hi + b_hi * u) ** 2)
    return u + 0.5 * state.rho * quad + s[i] * np.exp(-u)


def exact_gamma_oracle(i, state, s, coupling, nbrs, config=AdmmConfig()):
    """Numerical minimizer of the scalar gamma_i subproblem (diagnostics only).

    The objective is convex in ``log gamma_i``, so a bounded scalar search over
    ``[log floor, log cap]`` finds the global minimum.
    """
    s = np.asarray(s, dtype=float)
    lo, hi = math.log(config.gamma_floor), math.log(config.gamma_cap)
    res = minimize_scalar(scalar_gamma_objective, bounds=(lo, hi), method="bounded",
                          args=(i, state, s, coupling, nbrs),
                          options={"xatol": 1e-10, "maxiter": 2000})
    return float(math.exp(res.x))
