"""Seeded generation of sensing matrices, row-sparse signals and noisy measurements."""
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .model import Problem

PATTERNS = ("block", "hybrid", "random")
MAX_PLACEMENT_RETRIES = 1000


@dataclass(frozen=True)
class ScenarioSpec:
    N: int
    L: int
    M: int
    pattern: str = "block"
    num_blocks: int = 0
    block_len: int = 0
    num_isolated: int = 0
    num_nonzero: int = 0
    snr_db: float = 15.0
    seed: int = 0
    name: str = ""

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise ConfigurationError(f"unknown pattern {self.pattern!r}", key="pattern")
        for key in ("N", "L", "M"):
            if getattr(self, key) < 1:
                raise ConfigurationError(f"{key} must be >= 1", key=key)
        if not np.isfinite(self.snr_db):
            raise ConfigurationError("snr_db must be finite", key="snr_db")
        if self.pattern in ("block", "hybrid"):
            if self.num_blocks < 1 or self.block_len < 1:
                raise ConfigurationError("block patterns need num_blocks, block_len >= 1",
                                         key="num_blocks")
            # blocks are separated by at least one zero so that runs stay distinct
            if self.num_blocks * (self.block_len + 1) - 1 > self.N:
                raise ConfigurationError("blocks do not fit into N", key="num_blocks")
        if self.pattern == "hybrid" and self.num_isolated < 0:
            raise ConfigurationError("num_isolated must be >= 0", key="num_isolated")
        if self.pattern == "random" and self.num_nonzero < 1:
            raise ConfigurationError("random pattern needs num_nonzero >= 1",
                                     key="num_nonzero")
        if self.sparsity > self.N:
            raise ConfigurationError("more nonzeros than N", key="N")
        if not self.name:
            object.__setattr__(self, "name", self.pattern)

    @property
    def sparsity(self):
        if self.pattern == "block":
            return self.num_blocks * self.block_len
        if self.pattern == "hybrid":
            return self.num_blocks * self.block_len + self.num_isolated
        return self.num_nonzero


@dataclass(frozen=True)
class Dataset:
    problem: Problem
    X_true: np.ndarray
    support_true: frozenset
    gamma_true: np.ndarray  # prior variances on sorted(support_true)


def _rng(seed):
    return np.random.default_rng(seed)


def gen_matrix(L, N, seed):
    """Complex Bernoulli matrix: entries from {(+-1 +- 1j)/sqrt(2)}, unit-norm columns."""
    if L < 1 or N < 1:
        raise ConfigurationError("gen_matrix needs L, N >= 1")
    rng = _rng(seed)
    signs = 1.0 - 2.0 * rng.integers(0, 2, size=(2, L, N))
    A = (signs[0] + 1j * signs[1]) / np.sqrt(2.0)
    return A / np.linalg.norm(A, axis=0)


def _place_blocks(rng, N, num_blocks, block_len):
    for _ in range(MAX_PLACEMENT_RETRIES):
        starts = np.sort(rng.integers(0, N - block_len + 1, size=num_blocks))
        if np.all(np.diff(starts) > block_len):
            return [int(s) + o for s in starts for o in range(block_len)]
    raise ConfigurationError(
        f"could not place {num_blocks} blocks of length {block_len} in N={N}",
        key="num_blocks")


def gen_support(spec, rng):
    if spec.pattern == "random":
        idx = rng.choice(spec.N, size=spec.num_nonzero, replace=False)
        return frozenset(int(i) for i in idx)
    support = _place_blocks(rng, spec.N, spec.num_blocks, spec.block_len)
    if spec.pattern == "hybrid" and spec.num_isolated:
        rest = np.setdiff1d(np.arange(spec.N), support)
        if rest.size < spec.num_isolated:
            raise ConfigurationError("no room for isolated entries", key="num_isolated")
        support += [int(i) for i in rng.choice(rest, size=spec.num_isolated, replace=False)]
    return frozenset(support)


def gen_signal(spec, seed):
    """Row-sparse X (N x M) with CN(0, 1) entries on a pattern-shaped support."""
    rng = _rng(seed)
    support = gen_support(spec, rng)
    rows = np.array(sorted(support), dtype=int)
    X = np.zeros((spec.N, spec.M), dtype=complex)
    X[rows] = (rng.standard_normal((rows.size, spec.M))
               + 1j * rng.standard_normal((rows.size, spec.M))) / np.sqrt(2.0)
    return X, support


def add_noise(A, X_true, snr_db, seed):
    """Measurements at the requested per-entry SNR of the noiseless signal ``A X``."""
    AX = np.asarray(A) @ np.asarray(X_true)
    energy = float(np.sum(np.abs(AX) ** 2))
    if energy == 0.0:
        raise ConfigurationError("SNR is undefined for an all-zero signal", key="snr_db")
    L, M = AX.shape
    sigma2 = energy / (L * M * 10.0 ** (snr_db / 10.0))
    rng = _rng(seed)
    W = np.sqrt(sigma2 / 2.0) * (rng.standard_normal((L, M)) + 1j * rng.standard_normal((L, M)))
    return AX + W, sigma2


def make_dataset(spec):
    """Dataset fully determined by ``spec`` (including ``spec.seed``)."""
    s_mat, s_sig, s_noise = np.random.SeedSequence(spec.seed).spawn(3)
    A = gen_matrix(spec.L, spec.N, s_mat)
    X, support = gen_signal(spec, s_sig)
    Y, sigma2 = add_noise(A, X, spec.snr_db, s_noise)
    return Dataset(Problem(A, Y, sigma2), X, support, np.ones(len(support)))


def dataset_checksum(ds):
    import hashlib
    h = hashlib.sha256()
    for arr in (ds.problem.A, ds.problem.Y, ds.X_true):
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()[:16]


# --- text serialization -------------------------------------------------------
# Layout:
#   # tvsbl-dataset v1
#   L,N,M,sigma2
#   <L>,<N>,<M>,<sigma2>
#   [A]            L rows of N complex entries written as re,im pairs
#   [Y]            L rows of M entries
#   [X_true]       N rows of M entries
#   [support]      one line of comma-separated 0-based indices
#   [gamma_true]   one line, aligned with the sorted support

def _write_complex(f, M):
    for row in M:
        f.write(",".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row) + "\n")


def save_dataset(ds, path):
    p = ds.problem
    with open(path, "w", encoding="utf-8") as f:
        f.write("# tvsbl-dataset v1\nL,N,M,sigma2\n")
        f.write(f"{p.L},{p.N},{p.M},{float(p.sigma2)!r}\n")
        for tag, arr in (("A", p.A), ("Y", p.Y), ("X_true", ds.X_true)):
            f.write(f"[{tag}]\n")
            _write_complex(f, arr)
        f.write("[support]\n" + ",".join(str(i) for i in sorted(ds.support_true)) + "\n")
        f.write("[gamma_true]\n" + ",".join(repr(float(g)) for g in ds.gamma_true) + "\n")


def _read_complex(lines, rows, cols):
    out = np.empty((rows, cols), dtype=complex)
    for r in range(rows):
        v = np.array(lines[r].split(","), dtype=float)
        if v.size != 2 * cols:
            raise ConfigurationError(f"expected {cols} complex entries, got {v.size / 2}")
        out[r] = v[0::2] + 1j * v[1::2]
    return out


def load_dataset(path):
    with open(path, encoding="utf-8") as f:
        lines = [ln.rstrip("\n") for ln in f]
    if not lines or not lines[0].startswith("# tvsbl-dataset"):
        raise ConfigurationError(f"{path}: not a dataset file")
    L, N, M = (int(x) for x in lines[2].split(",")[:3])
    sigma2 = float(lines[2].split(",")[3])
    sections = {}
    for k, ln in enumerate(lines):
        if ln.startswith("[") and ln.endswith("]"):
            sections[ln[1:-1]] = k + 1
    A = _read_complex(lines[sections["A"]:], L, N)
    Y = _read_complex(lines[sections["Y"]:], L, M)
    X = _read_complex(lines[sections["X_true"]:], N, M)
    sup_line = lines[sections["support"]]
    support = frozenset(int(i) for i in sup_line.split(",")) if sup_line else frozenset()
    g_line = lines[sections["gamma_true"]]
    gamma_true = np.array(g_line.split(","), dtype=float) if g_line else np.zeros(0)
    return Dataset(Problem(A, Y, sigma2), X, support, gamma_true)
