"""Seeded Monte-Carlo sweeps over scenario x SNR x algorithm with CSV output."""
import copy
import csv
import json
import logging
import math
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .datagen import ScenarioSpec, dataset_checksum, make_dataset
from .engine import SolverConfig, estimate_support, run
from .errors import ConfigurationError, NumericError, OutputError
from .metrics import nmse, precision_recall_f1
from .model import oracle_mmse

log = logging.getLogger(__name__)

ORACLE = "oracle_mmse"

TRIAL_FIELDS = ("scenario", "snr_db", "trial_index", "algorithm", "nmse", "precision",
                "recall", "f1_standard", "f1_paper", "em_iterations",
                "total_inner_iterations", "converged", "runtime_ms", "seed")
AGGREGATE_FIELDS = ("scenario", "snr_db", "algorithm", "nmse_mean", "nmse_db",
                    "nmse_stderr", "f1_mean", "f1_stderr", "n_trials")

SCENARIO_KEYS = {"name", "N", "L", "M", "pattern", "num_blocks", "block_len",
                 "num_isolated", "num_nonzero"}
ALGORITHM_KEYS = {f.name for f in fields(SolverConfig)}
TOP_KEYS = {"scenario", "scenarios", "snr_grid", "trials", "algorithms", "output_dir",
            "master_seed", "report_paper_f1", "support_tau", "record_runtime", "threads"}


@dataclass(frozen=True)
class ExperimentConfig:
    scenarios: tuple          # ScenarioSpec templates; their snr_db and seed are ignored
    algorithms: tuple         # SolverConfig, unique names
    snr_grid: tuple = (0.0, 5.0, 10.0, 15.0, 20.0)
    trials: int = 50
    output_dir: str = "results"
    master_seed: int = 0
    report_paper_f1: bool = False
    support_tau: float = 1e-2
    # wall time is not reproducible, so it is only written when asked for
    record_runtime: bool = False
    threads: int = 1


@dataclass(frozen=True)
class TrialRecord:
    scenario: str
    snr_db: float
    trial_index: int
    algorithm: str
    nmse: float
    precision: float
    recall: float
    f1_standard: float
    f1_paper: float
    em_iterations: int
    total_inner_iterations: int
    converged: str   # "true", "false" or "failed"
    runtime_ms: float
    seed: int


# --- configuration -----------------------------------------------------------

def _check_keys(entry, allowed, where):
    if not isinstance(entry, dict):
        raise ConfigurationError(f"{where} must be an object", key=where)
    for key in entry:
        if key not in allowed:
            raise ConfigurationError(f"unknown key {key!r} in {where}", key=key)


def _scenario(entry):
    _check_keys(entry, SCENARIO_KEYS, "scenario")
    for key in ("N", "L", "M", "pattern"):
        if key not in entry:
            raise ConfigurationError(f"scenario is missing required key {key!r}", key=key)
    return ScenarioSpec(**entry)


def _algorithm(entry):
    _check_keys(entry, ALGORITHM_KEYS, "algorithms")
    return SolverConfig(**entry)


def scale_scenario(spec, factor):
    """Scale N and the nonzero counts by ``factor``; block length and L are kept."""
    if factor == 1:
        return spec
    if not factor > 0:
        raise ConfigurationError("scale factor must be positive", key="scale")

    def sc(v, keep_zero=False):
        if keep_zero and v == 0:
            return 0
        return max(1, int(round(v * factor)))

    return replace(spec, N=sc(spec.N), num_blocks=sc(spec.num_blocks, True),
                   num_isolated=sc(spec.num_isolated, True),
                   num_nonzero=sc(spec.num_nonzero, True))


def parse_config(data, *, output_dir=None, master_seed=None, threads=None, scale=1.0,
                 trials=None):
    """Build an :class:`ExperimentConfig` from a JSON-like dict.

    Keyword arguments override the corresponding entries (CLI flags).
    """
    _check_keys(data, TOP_KEYS, "config")
    if "scenario" in data and "scenarios" in data:
        raise ConfigurationError("give either 'scenario' or 'scenarios', not both",
                                 key="scenarios")
    raw = data.get("scenarios", [data["scenario"]] if "scenario" in data else None)
    if not raw:
        raise ConfigurationError("missing required field 'scenario'", key="scenario")
    scenarios = tuple(scale_scenario(_scenario(e), scale) for e in raw)
    names = [s.name for s in scenarios]
    if len(set(names)) != len(names):
        raise ConfigurationError("scenario names must be unique", key="scenarios")

    raw_algs = data.get("algorithms")
    if not raw_algs:
        raise ConfigurationError("missing required field 'algorithms'", key="algorithms")
    algorithms = tuple(_algorithm(e) for e in raw_algs)
    names = [a.name for a in algorithms]
    if len(set(names)) != len(names):
        raise ConfigurationError(f"duplicate algorithm names in {names}", key="algorithms")
    if ORACLE in names:
        raise ConfigurationError(f"{ORACLE!r} is reserved", key="algorithms")
    for a in algorithms:
        for s in scenarios:
            if a.window >= s.N:
                raise ConfigurationError(
                    f"algorithm {a.name!r}: window {a.window} must be < N={s.N}",
                    key="window")

    snr_grid = tuple(float(v) for v in data.get("snr_grid", ExperimentConfig.snr_grid))
    if not snr_grid or not all(math.isfinite(v) for v in snr_grid):
        raise ConfigurationError("snr_grid must be a nonempty list of finite values",
                                 key="snr_grid")
    n_trials = int(trials if trials is not None else data.get("trials", 50))
    if n_trials < 1:
        raise ConfigurationError("trials must be >= 1", key="trials")
    seed = int(master_seed if master_seed is not None else data.get("master_seed", 0))
    if not 0 <= seed < 2 ** 64:
        raise ConfigurationError("master_seed must be an unsigned 64-bit integer",
                                 key="master_seed")
    n_threads = int(threads if threads is not None else data.get("threads", 1))
    if n_threads < 1:
        raise ConfigurationError("threads must be >= 1", key="threads")
    tau = float(data.get("support_tau", 1e-2))
    if not 0 < tau < 1:
        raise ConfigurationError("support_tau must lie in (0, 1)", key="support_tau")
    return ExperimentConfig(
        scenarios=scenarios, algorithms=algorithms, snr_grid=snr_grid, trials=n_trials,
        output_dir=str(output_dir if output_dir is not None
                       else data.get("output_dir", "results")),
        master_seed=seed, report_paper_f1=bool(data.get("report_paper_f1", False)),
        support_tau=tau, record_runtime=bool(data.get("record_runtime", False)),
        threads=n_threads)


def validate_config(path, **overrides):
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(data, **overrides)


def config_to_dict(cfg):
    """JSON-ready form of a config (round-trips through :func:`parse_config`)."""
    def scen(s):
        d = asdict(s)
        d.pop("snr_db")
        d.pop("seed")
        return d

    def alg(a):
        return asdict(a)

    return {"scenarios": [scen(s) for s in cfg.scenarios],
            "algorithms": [alg(a) for a in cfg.algorithms],
            "snr_grid": list(cfg.snr_grid), "trials": cfg.trials,
            "output_dir": cfg.output_dir, "master_seed": cfg.master_seed,
            "report_paper_f1": cfg.report_paper_f1, "support_tau": cfg.support_tau,
            "record_runtime": cfg.record_runtime, "threads": cfg.threads}


# --- execution ---------------------------------------------------------------

def cell_seed(master_seed, scenario_index, snr_index, trial):
    ss = np.random.SeedSequence(master_seed, spawn_key=(scenario_index, snr_index, trial))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _failed(scenario, snr, trial, name, seed):
    nan = float("nan")
    return TrialRecord(scenario, snr, trial, name, nan, nan, nan, nan, nan, 0, 0,
                       "failed", 0.0, seed)


def run_cell(cfg, scenario, snr_db, trial, seed):
    """Generate one dataset and score every algorithm (plus the oracle) on it."""
    spec = replace(scenario, snr_db=snr_db, seed=seed)
    ds = make_dataset(spec)
    log.debug("%s snr=%g trial=%d dataset=%s", spec.name, snr_db, trial,
              dataset_checksum(ds))
    records = []
    for alg in cfg.algorithms:
        t0 = time.perf_counter()
        try:
            res = run(ds.problem, alg)
        except NumericError as exc:
            log.warning("%s failed on %s snr=%g trial=%d: %s", alg.name, spec.name,
                        snr_db, trial, exc)
            records.append(_failed(spec.name, snr_db, trial, alg.name, seed))
            continue
        elapsed = (time.perf_counter() - t0) * 1e3
        p, r, f1, f1p = precision_recall_f1(ds.support_true,
                                            estimate_support(res.gamma, cfg.support_tau))
        records.append(TrialRecord(
            spec.name, snr_db, trial, alg.name, nmse(ds.X_true, res.X_hat), p, r, f1, f1p,
            res.iterations, int(sum(res.inner_iteration_counts)),
            "true" if res.converged else "false",
            elapsed if cfg.record_runtime else 0.0, seed))
    t0 = time.perf_counter()
    X_or = oracle_mmse(ds.problem, ds.support_true, ds.gamma_true)
    elapsed = (time.perf_counter() - t0) * 1e3
    records.append(TrialRecord(spec.name, snr_db, trial, ORACLE, nmse(ds.X_true, X_or),
                               1.0, 1.0, 1.0, 0.5, 0, 0, "true",
                               elapsed if cfg.record_runtime else 0.0, seed))
    return records


def _ensure_writable(path):
    try:
        os.makedirs(path, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=path):
            pass
    except OSError as exc:
        raise OutputError(f"output directory {path!r} is not writable: {exc}") from exc


def run_trials(cfg):
    """All TrialRecords in (scenario, snr, trial, algorithm) order."""
    jobs = [(si, sc, ki, snr, t, cell_seed(cfg.master_seed, si, ki, t))
            for si, sc in enumerate(cfg.scenarios)
            for ki, snr in enumerate(cfg.snr_grid)
            for t in range(cfg.trials)]

    def work(job):
        _, sc, _, snr, t, seed = job
        return run_cell(cfg, sc, snr, t, seed)

    if cfg.threads == 1:
        chunks = [work(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            chunks = list(pool.map(work, jobs))  # map keeps submission order
    return [rec for chunk in chunks for rec in chunk]


def aggregate(records, report_paper_f1=False):
    groups = {}
    for rec in records:
        groups.setdefault((rec.scenario, rec.snr_db, rec.algorithm), []).append(rec)
    rows = []
    for (scenario, snr, alg), recs in groups.items():
        ok = [r for r in recs if r.converged != "failed"]
        e = np.array([r.nmse for r in ok])
        f = np.array([r.f1_paper if report_paper_f1 else r.f1_standard for r in ok])
        n = len(ok)

        def stderr(v):
            return float(np.std(v, ddof=1) / np.sqrt(n)) if n > 1 else 0.0

        mean_e = float(e.mean()) if n else float("nan")
        rows.append(dict(scenario=scenario, snr_db=snr, algorithm=alg, nmse_mean=mean_e,
                         nmse_db=10.0 * math.log10(mean_e) if n and mean_e > 0 else float("nan"),
                         nmse_stderr=stderr(e) if n else float("nan"),
                         f1_mean=float(f.mean()) if n else float("nan"),
                         f1_stderr=stderr(f) if n else float("nan"), n_trials=n))
    return rows


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(row[h]) for h in header])


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def run_experiment(cfg):
    """Run the sweep and write ``trials.csv`` and ``aggregate.csv`` into the output dir.

    Returns the two file paths.
    """
    _ensure_writable(cfg.output_dir)
    records = run_trials(cfg)
    trial_path = os.path.join(cfg.output_dir, "trials.csv")
    agg_path = os.path.join(cfg.output_dir, "aggregate.csv")
    write_csv(trial_path, TRIAL_FIELDS, [asdict(r) for r in records])
    write_csv(agg_path, AGGREGATE_FIELDS, aggregate(records, cfg.report_paper_f1))
    return trial_path, agg_path


DEMO_CONFIG = {
    "scenarios": [
        {"name": "block", "N": 150, "L": 30, "M": 5, "pattern": "block",
         "num_blocks": 5, "block_len": 5},
        {"name": "hybrid", "N": 150, "L": 30, "M": 5, "pattern": "hybrid",
         "num_blocks": 3, "block_len": 5, "num_isolated": 5},
        {"name": "random", "N": 150, "L": 30, "M": 5, "pattern": "random",
         "num_nonzero": 25},
    ],
    "snr_grid": [0, 5, 10, 15, 20],
    "trials": 50,
    "algorithms": [
        {"name": "proposed", "variant": "proposed"},
        {"name": "m_sbl", "variant": "m_sbl"},
        {"name": "msbl_dol", "variant": "msbl_dol"},
    ],
    "output_dir": "results/demo",
    "master_seed": 2024,
}


def demo_config():
    return copy.deepcopy(DEMO_CONFIG)
