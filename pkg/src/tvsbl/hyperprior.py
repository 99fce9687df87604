"""Banded neighbourhoods, adaptive coupling weights and the log-TV penalty."""
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class NeighborhoodMap:
    """Neighbours ``j`` of each index ``i`` with ``0 < |i - j| <= window``."""

    n: int
    window: int
    # every coupled pair (i, j) with i > j, ordered by i then j
    rows: np.ndarray = field(repr=False)
    cols: np.ndarray = field(repr=False)

    def neighbors(self, i):
        lo, hi = max(0, i - self.window), min(self.n, i + self.window + 1)
        return [j for j in range(lo, hi) if j != i]

    @property
    def num_pairs(self):
        return self.rows.size


def build_neighborhoods(n, window):
    if not 0 <= window < n:
        raise ConfigurationError(f"window must satisfy 0 <= window < N={n}, got {window}",
                                 key="window")
    rows, cols = [], []
    for i in range(n):
        for j in range(max(0, i - window), i):
            rows.append(i)
            cols.append(j)
    return NeighborhoodMap(n, window, np.array(rows, dtype=np.int64),
                           np.array(cols, dtype=np.int64))


@dataclass(frozen=True)
class CouplingState:
    beta: np.ndarray   # dense N x N, zero off the band
    normalize: bool = False


def _normalize_rows(beta):
    z = beta.sum(axis=1, keepdims=True)
    return np.divide(beta, z, out=np.zeros_like(beta), where=z > 0)


def update_beta(gamma_prev, nbrs, normalize=False):
    """Weights ``exp(-(log g_i - log g_j)^2)`` on the band, zero elsewhere.

    With ``normalize`` each nonempty row is rescaled to sum to one.
    """
    lg = np.log(np.asarray(gamma_prev, dtype=float))
    if lg.shape != (nbrs.n,):
        raise ConfigurationError("gamma_prev length does not match the neighbourhood map")
    beta = np.zeros((nbrs.n, nbrs.n))
    i, j = nbrs.rows, nbrs.cols
    w = np.exp(-(lg[i] - lg[j]) ** 2)
    beta[i, j] = w
    beta[j, i] = w
    if normalize:
        beta = _normalize_rows(beta)
    return CouplingState(beta, normalize)


def fixed_beta(nbrs, value, normalize=False):
    """Constant coupling ``value`` on every banded pair (hand-tuned TV baseline)."""
    if not 0.0 <= value <= 1.0:
        raise ConfigurationError(f"fixed beta must lie in [0, 1], got {value}", key="beta")
    beta = np.zeros((nbrs.n, nbrs.n))
    beta[nbrs.rows, nbrs.cols] = value
    beta[nbrs.cols, nbrs.rows] = value
    if normalize:
        beta = _normalize_rows(beta)
    return CouplingState(beta, normalize)


def no_coupling(n):
    return CouplingState(np.zeros((n, n)), False)


def penalty_value(gamma, coupling):
    """``sum_{i>j} beta_ij |log g_i - log g_j|``."""
    lg = np.log(np.asarray(gamma, dtype=float))
    i, j = np.tril_indices(lg.size, -1)
    w = coupling.beta[i, j]
    nz = w != 0
    return float(np.sum(w[nz] * np.abs(lg[i[nz]] - lg[j[nz]])))
