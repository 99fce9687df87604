"""EM sparse Bayesian learning driver with the TV-coupled M-step.

The three algorithm variants share one loop and differ only in how the
coupling weights are formed:

* ``proposed``  adaptive weights on a window of ``window`` neighbours per side
* ``m_sbl``     no coupling (plain M-SBL)
* ``msbl_dol``  fixed weight on immediate neighbours only
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .admm import DENOM_FLOOR, GAMMA_CAP, AdmmConfig, AdmmState, run_mstep
from .errors import ConfigurationError
from .hyperprior import build_neighborhoods, fixed_beta, no_coupling, update_beta
from .model import GAMMA_FLOOR, compute_s, marginal_objective, posterior_update

log = logging.getLogger(__name__)

VARIANTS = ("proposed", "m_sbl", "msbl_dol")


@dataclass(frozen=True)
class SolverConfig:
    variant: str = "proposed"
    window: int = 2
    rho: float = 0.1
    # "adaptive" or a constant weight in [0, 1]
    beta_mode: object = "adaptive"
    normalize_beta: bool = False
    k_max: int = 200
    t_max: int = 50
    eps_outer: float = 1e-6
    eps_inner: float = 1e-6
    gamma_floor: float = GAMMA_FLOOR
    gamma_cap: float = GAMMA_CAP
    denom_floor: float = DENOM_FLOOR
    gamma_init: float = 1.0
    name: str = ""

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown variant {self.variant!r}", key="variant")
        if self.variant == "m_sbl":
            object.__setattr__(self, "window", 0)
        elif self.variant == "msbl_dol":
            object.__setattr__(self, "window", 1)
            if self.beta_mode == "adaptive":
                object.__setattr__(self, "beta_mode", 0.5)
        if not self.name:
            object.__setattr__(self, "name", self.variant)
        if self.beta_mode != "adaptive":
            try:
                value = float(self.beta_mode)
            except (TypeError, ValueError):
                raise ConfigurationError(
                    f"beta_mode must be 'adaptive' or a number, got {self.beta_mode!r}",
                    key="beta_mode") from None
            if not 0.0 <= value <= 1.0:
                raise ConfigurationError("fixed beta must lie in [0, 1]", key="beta_mode")
            object.__setattr__(self, "beta_mode", value)
        if self.window < 0:
            raise ConfigurationError("window must be nonnegative", key="window")
        for key in ("k_max", "t_max"):
            if getattr(self, key) < 1:
                raise ConfigurationError(f"{key} must be >= 1", key=key)
        for key in ("rho", "eps_outer", "eps_inner", "gamma_floor", "gamma_cap",
                    "denom_floor", "gamma_init"):
            if not getattr(self, key) > 0:
                raise ConfigurationError(f"{key} must be positive", key=key)
        if self.gamma_floor >= self.gamma_cap:
            raise ConfigurationError("gamma_floor must be below gamma_cap", key="gamma_floor")

    @property
    def admm(self):
        return AdmmConfig(rho=self.rho, t_max=self.t_max, eps=self.eps_inner,
                          gamma_floor=self.gamma_floor, gamma_cap=self.gamma_cap,
                          denom_floor=self.denom_floor)


@dataclass(frozen=True)
class SolverResult:
    X_hat: np.ndarray
    gamma: np.ndarray
    iterations: int
    objective_trace: tuple
    inner_iteration_counts: tuple
    converged: bool
    # populated only with run(..., record_gamma=True); gamma_trace[0] is the start point
    gamma_trace: tuple = field(default=(), repr=False)


def _coupling(config, gamma, nbrs):
    if nbrs.window == 0:
        return no_coupling(nbrs.n)
    if config.beta_mode == "adaptive":
        return update_beta(gamma, nbrs, config.normalize_beta)
    return fixed_beta(nbrs, config.beta_mode, config.normalize_beta)


def run(problem, config=SolverConfig(), record_gamma=False):
    """Alternate E-steps and ADMM M-steps until the posterior mean settles.

    Stops once ``||mu_new - mu_old||_F^2 <= eps_outer`` or after ``k_max`` EM
    iterations; hitting ``k_max`` is reported through ``converged`` and is not
    an error.
    """
    if config.window >= problem.N:
        raise ConfigurationError(
            f"window {config.window} must be smaller than N={problem.N}", key="window")
    nbrs = build_neighborhoods(problem.N, config.window)
    admm_cfg = config.admm
    gamma = np.full(problem.N, config.gamma_init, dtype=float)
    state = AdmmState.initial(gamma, config.rho)
    post = posterior_update(problem, gamma, config.gamma_floor, em_iteration=0)

    objective, inner, trace = [], [], [gamma.copy()] if record_gamma else []
    converged = False
    k = 0
    for k in range(1, config.k_max + 1):
        s = compute_s(post.mu, post.Sigma, problem.M)
        coupling = _coupling(config, gamma, nbrs)
        state.gamma = gamma
        gamma = run_mstep(s, coupling, nbrs, admm_cfg, state, problem.M,
                          em_iteration=k).copy()
        inner.append(state.t)
        if record_gamma:
            trace.append(gamma.copy())
        new_post = posterior_update(problem, gamma, config.gamma_floor, em_iteration=k)
        objective.append(marginal_objective(problem, gamma, config.gamma_floor))
        change = float(np.sum(np.abs(new_post.mu - post.mu) ** 2))
        post = new_post
        if change <= config.eps_outer:
            converged = True
            break
    log.debug("%s: %d EM iterations, converged=%s", config.name, k, converged)
    return SolverResult(X_hat=post.mu, gamma=gamma, iterations=k,
                        objective_trace=tuple(objective),
                        inner_iteration_counts=tuple(inner), converged=converged,
                        gamma_trace=tuple(trace))


def estimate_support(gamma, tau=1e-2):
    """Indices whose variance exceeds ``tau`` times the largest one."""
    if not 0 < tau < 1:
        raise ConfigurationError(f"tau must lie in (0, 1), got {tau}", key="support_tau")
    gamma = np.asarray(gamma, dtype=float)
    peak = gamma.max() if gamma.size else 0.0
    if peak <= 0:
        return frozenset()
    return frozenset(int(i) for i in np.flatnonzero(gamma > tau * peak))

