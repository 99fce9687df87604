"""Reconstruction and support-recovery scores."""
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class TrialScores:
    nmse: float
    precision: float
    recall: float
    f1_standard: float
    f1_paper: float
    support_size_est: int


def nmse(X_true, X_hat):
    X_true, X_hat = np.asarray(X_true), np.asarray(X_hat)
    if X_true.shape != X_hat.shape:
        raise ConfigurationError(f"shape mismatch {X_true.shape} vs {X_hat.shape}")
    ref = float(np.sum(np.abs(X_true) ** 2))
    if ref == 0.0:
        raise ConfigurationError("NMSE undefined for an all-zero reference")
    return float(np.sum(np.abs(X_true - X_hat) ** 2)) / ref


def precision_recall_f1(support_true, support_est):
    """Returns ``(precision, recall, f1_standard, f1_paper)``.

    ``f1_paper`` is ``PR/(P+R)``, i.e. half the usual harmonic mean.
    """
    s_true, s_est = set(support_true), set(support_est)
    if not s_true:
        raise ConfigurationError("true support must be nonempty")
    hits = len(s_true & s_est)
    precision = hits / len(s_est) if s_est else 0.0
    recall = hits / len(s_true)
    denom = precision + recall
    if denom == 0:
        return precision, recall, 0.0, 0.0
    f1_paper = precision * recall / denom
    return precision, recall, 2.0 * f1_paper, f1_paper


def score_trial(X_true, X_hat, support_true, support_est):
    p, r, f1, f1p = precision_recall_f1(support_true, support_est)
    return TrialScores(nmse(X_true, X_hat), p, r, f1, f1p, len(support_est))
