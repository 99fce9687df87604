import json
import math

import pytest

from tvsbl import bench
from tvsbl.bench import (AGGREGATE_FIELDS, ORACLE, TRIAL_FIELDS, parse_config, read_csv,
                         run_experiment, validate_config)
from tvsbl.cli import main
from tvsbl.errors import ConfigurationError, OutputError

MINIMAL = {
    "scenario": {"N": 40, "L": 15, "M": 2, "pattern": "block", "num_blocks": 2,
                 "block_len": 3},
    "algorithms": [{"name": "m_sbl", "variant": "m_sbl"}],
}


def write(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def test_minimal_config_is_defaulted(tmp_path):
    cfg = validate_config(write(tmp_path, MINIMAL))
    assert cfg.trials == 50 and cfg.snr_grid == (0.0, 5.0, 10.0, 15.0, 20.0)
    assert cfg.master_seed == 0 and not cfg.report_paper_f1
    alg = cfg.algorithms[0]
    assert (alg.rho, alg.k_max, alg.t_max, alg.eps_outer) == (0.1, 200, 50, 1e-6)
    assert cfg.scenarios[0].name == "block"


@pytest.mark.parametrize("patch,key", [
    ({"algorithms": [{"name": "p", "variant": "proposed", "window": 40}]}, "window"),
    ({"algorithms": [{"name": "a"}, {"name": "a"}]}, "algorithms"),
    ({"bogus": 1}, "bogus"),
    ({"algorithms": [{"name": "a", "windw": 2}]}, "windw"),
    ({"trials": 0}, "trials"),
    ({"snr_grid": []}, "snr_grid"),
])
def test_config_errors_name_the_key(tmp_path, patch, key):
    with pytest.raises(ConfigurationError) as err:
        validate_config(write(tmp_path, {**MINIMAL, **patch}))
    assert err.value.key == key
    assert key in str(err.value)


def test_missing_fields(tmp_path):
    with pytest.raises(ConfigurationError) as err:
        validate_config(write(tmp_path, {"algorithms": MINIMAL["algorithms"]}))
    assert err.value.key == "scenario"
    bad = {**MINIMAL, "scenario": {"N": 40, "L": 15, "pattern": "block"}}
    with pytest.raises(ConfigurationError) as err:
        validate_config(write(tmp_path, bad))
    assert err.value.key == "M"


def test_config_roundtrip():
    cfg = parse_config(bench.demo_config())
    again = parse_config(bench.config_to_dict(cfg))
    assert again == cfg


def test_scale():
    cfg = parse_config(bench.demo_config(), scale=0.5)
    block, hybrid, rnd = cfg.scenarios
    assert block.N == 75 and block.num_blocks == 2 and block.block_len == 5
    assert hybrid.num_isolated == 2 and rnd.num_nonzero == 12


def test_row_count_contract(tmp_path):
    data = {"scenario": {"N": 100, "L": 30, "M": 5, "pattern": "block", "num_blocks": 5,
                         "block_len": 5},
            "snr_grid": [300], "trials": 1,
            "algorithms": [{"name": "m_sbl", "variant": "m_sbl"}]}
    cfg = parse_config(data, output_dir=tmp_path / "out")
    trial_path, agg_path = run_experiment(cfg)
    rows = read_csv(trial_path)
    assert len(rows) == 2
    assert [r["algorithm"] for r in rows] == ["m_sbl", ORACLE]
    assert tuple(rows[0].keys()) == TRIAL_FIELDS
    agg = read_csv(agg_path)
    assert tuple(agg[0].keys()) == AGGREGATE_FIELDS and len(agg) == 2


def small_sweep(out, **kw):
    data = {"scenarios": [
                {"name": "blk", "N": 40, "L": 15, "M": 2, "pattern": "block",
                 "num_blocks": 2, "block_len": 3},
                {"name": "rnd", "N": 40, "L": 15, "M": 2, "pattern": "random",
                 "num_nonzero": 5}],
            "snr_grid": [5, 20], "trials": 3,
            "algorithms": [{"name": "proposed", "k_max": 40},
                           {"name": "m_sbl", "variant": "m_sbl", "k_max": 40}],
            "master_seed": 11}
    return parse_config(data, output_dir=out, **kw)


def test_sweep_layout_and_determinism(tmp_path):
    t1, a1 = run_experiment(small_sweep(tmp_path / "a"))
    t2, a2 = run_experiment(small_sweep(tmp_path / "b", threads=3))
    assert open(t1, "rb").read() == open(t2, "rb").read()
    assert open(a1, "rb").read() == open(a2, "rb").read()
    rows = read_csv(t1)
    assert len(rows) == 2 * 2 * 3 * 3
    agg = read_csv(a1)
    assert len(agg) == 2 * 2 * 3
    # fairness: every algorithm in a cell saw the same dataset seed
    cells = {}
    for r in rows:
        cells.setdefault((r["scenario"], r["snr_db"], r["trial_index"]), set()).add(r["seed"])
    assert all(len(s) == 1 for s in cells.values())
    assert len({next(iter(s)) for s in cells.values()}) == len(cells)
    for r in rows:
        for f in ("nmse", "precision", "recall", "f1_standard", "f1_paper", "runtime_ms"):
            assert math.isfinite(float(r[f]))
        assert float(r["runtime_ms"]) == 0.0


def test_aggregate_statistics(tmp_path):
    cfg = small_sweep(tmp_path)
    recs = bench.run_trials(cfg)
    agg = bench.aggregate(recs)
    row = agg[0]
    mine = [r.nmse for r in recs
            if (r.scenario, r.snr_db, r.algorithm) == (row["scenario"], row["snr_db"],
                                                       row["algorithm"])]
    mean = sum(mine) / len(mine)
    assert row["nmse_mean"] == pytest.approx(mean)
    assert row["nmse_db"] == pytest.approx(10 * math.log10(mean))
    sd = math.sqrt(sum((x - mean) ** 2 for x in mine) / (len(mine) - 1))
    assert row["nmse_stderr"] == pytest.approx(sd / math.sqrt(len(mine)))
    halved = bench.aggregate(recs, report_paper_f1=True)
    assert halved[0]["f1_mean"] == pytest.approx(row["f1_mean"] / 2)


def test_failed_algorithm_is_recorded(tmp_path, monkeypatch):
    from tvsbl.errors import NumericError

    def boom(problem, config):
        raise NumericError("forced", em_iteration=3)

    monkeypatch.setattr(bench, "run", boom)
    recs = bench.run_trials(small_sweep(tmp_path))
    failed = [r for r in recs if r.algorithm != ORACLE]
    assert failed and all(r.converged == "failed" for r in failed)
    assert all(r.converged == "true" for r in recs if r.algorithm == ORACLE)


def test_unwritable_output_fails_before_work(tmp_path, monkeypatch):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    called = []
    monkeypatch.setattr(bench, "run_trials", lambda cfg: called.append(1))
    with pytest.raises(OutputError):
        run_experiment(small_sweep(blocker / "sub"))
    assert not called


def test_cli_exit_codes(tmp_path, capsys):
    good = write(tmp_path, {**MINIMAL, "snr_grid": [20], "trials": 1}, "good.json")
    assert main(["validate", str(good)]) == 0
    shown = json.loads(capsys.readouterr().out)
    assert shown["trials"] == 1
    bad = write(tmp_path, {**MINIMAL, "extra": 1}, "bad.json")
    assert main(["validate", str(bad)]) == 1
    assert main(["run", str(tmp_path / "missing.json")]) == 1
    out = tmp_path / "cli"
    assert main(["run", str(good), "--output-dir", str(out), "--seed", "5"]) == 0
    assert (out / "trials.csv").exists() and (out / "aggregate.csv").exists()
    blocker = tmp_path / "blk"
    blocker.write_text("")
    assert main(["run", str(good), "--output-dir", str(blocker / "x")]) == 1


def test_cli_runtime_failure_exit_code(tmp_path, monkeypatch):
    good = write(tmp_path, {**MINIMAL, "snr_grid": [20], "trials": 1})

    def crash(cfg):
        raise RuntimeError("worker died")

    monkeypatch.setattr("tvsbl.cli.run_experiment", crash)
    assert main(["run", str(good), "--output-dir", str(tmp_path / "o")]) == 2


def test_demo_print_config(capsys):
    assert main(["demo", "--print-config"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert [s["pattern"] for s in data["scenarios"]] == ["block", "hybrid", "random"]
