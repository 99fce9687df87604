"""Block-sparse MMV recovery by EM sparse Bayesian learning with an adaptive
log-TV hyper-prior and an ADMM M-step."""
from .admm import AdmmConfig, AdmmState, run_mstep, soft_threshold
from .datagen import Dataset, ScenarioSpec, make_dataset
from .engine import SolverConfig, SolverResult, estimate_support, run
from .errors import ConfigurationError, NumericError, OutputError
from .hyperprior import build_neighborhoods, penalty_value, update_beta
from .metrics import nmse, precision_recall_f1
from .model import Problem, marginal_objective, oracle_mmse, posterior_update

__all__ = [
    "AdmmConfig", "AdmmState", "ConfigurationError", "Dataset", "NumericError",
    "OutputError", "Problem", "ScenarioSpec", "SolverConfig", "SolverResult",
    "build_neighborhoods", "estimate_support", "make_dataset", "marginal_objective",
    "nmse", "oracle_mmse", "penalty_value", "posterior_update", "precision_recall_f1",
    "run", "run_mstep", "soft_threshold", "update_beta",
]
