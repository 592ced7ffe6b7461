import json
import math

import numpy as np
import pytest

from slamopt import BatchSchedule, CycleSchedule, RunConfig, run_slam
from slamopt.harness import cli
from slamopt.harness.config import SolverSpec, build_spec, parse_batch, parse_period
from slamopt.harness.io import (
    AGG_HEADER,
    TRACE_HEADER,
    aggregate,
    read_rows,
    read_trace_csv,
    write_trace_csv,
)
from slamopt.harness.plotting import emit_plot_data
from slamopt.harness.runner import run_experiment
from slamopt.harness.tuning import TUNING_GRID, TuningError, select_step, tune
from slamopt.problems import noisy_quadratic


# config

def test_schedule_strings():
    assert parse_batch("128", 10) == BatchSchedule.constant(128)
    assert parse_batch("frac:0.1", 200).size(0) == 20
    assert parse_batch("linear", 5).size(4) == 5
    assert parse_batch("power:2", 5).size(2) == 9
    assert parse_period("50", 10) == CycleSchedule.constant(50)
    assert parse_period("geometric:2", 10).period(3) == 16
    assert parse_period("linear", 10).period(4) == 5
    assert parse_period("single", 30).period(0) == 30
    for bad in ("", "huge", "frac:x"):
        with pytest.raises(ValueError):
            parse_batch(bad, 10)


def test_solver_spec():
    s = SolverSpec.parse("sgd_const_tuned")
    assert (s.name, s.kind, s.tuned) == ("sgd_const_tuned", "sgd_const", True)
    with pytest.raises(ValueError):
        SolverSpec.parse("slam_tuned")
    with pytest.raises(ValueError):
        SolverSpec.parse("newton")
    d = SolverSpec.parse({"name": "slam_p10", "kind": "slam", "period": "10"})
    assert d.kind == "slam" and d.period == "10"
    with pytest.raises(ValueError):
        SolverSpec.parse({"kind": "slam", "colour": "red"})


def test_spec_overrides_and_run_config():
    spec = build_spec({"problem": {"kind": "rosenbrock"}, "K": 40}, n=3, solvers=["sls0", "slam_con"], seeds=[1, 2])
    assert spec.problem == {"kind": "rosenbrock", "n": 3}
    sls0 = spec.run_config(spec.solvers[0], 1)
    assert sls0.cycles == CycleSchedule.single(40)
    con = spec.run_config(spec.solvers[1], 1)
    assert con.linesearch.convex and con.linesearch.alpha == 0.5
    assert json.loads(spec.to_json())["seeds"] == [1, 2]
    with pytest.raises(ValueError):
        build_spec({"problem": {"kind": "rosenbrock"}}, seeds=[1, 1])
    with pytest.raises(ValueError):
        build_spec({"problem": {"kind": "sphere"}})


# tuning

def test_select_step_rules():
    assert select_step((1e-2, 1e-1, 1.0), (3.0, 2.0, 2.0)) == 1.0
    assert select_step((1e-2, 1e-1, 1.0), (math.nan, math.inf, 5.0)) == 1.0
    assert select_step((1e-2, 1e-1), (math.nan, math.nan)) is None


def test_tuning_on_l4_quadratic():
    p = noisy_quadratic(4, [1, 2, 3, 4], 0.1, seed=0, start=np.ones(4))
    cfg = RunConfig(solver="sgd_const", K=100, batches=BatchSchedule.constant(8))
    rep = tune(p, None, cfg, (0, 1, 2, 3, 4))
    assert rep.selected == 0.1
    assert rep.finals.shape == (6, 5)
    assert rep.K == 20
    # six grid points at a fifth of the budget cost 6/5 of the five reported runs
    assert rep.iterations == 6 * 5 * 100 // 5


def test_tuning_single_finite_point_and_all_diverged():
    cfg = RunConfig(solver="sgd_const", K=10)
    finals = [math.nan] * 30
    finals[3 * 5:4 * 5] = [1.0] * 5
    rep = tune(None, None, cfg, range(5), runner=lambda cfgs: finals)
    assert rep.selected == TUNING_GRID[3]
    with pytest.raises(TuningError) as err:
        tune(None, None, cfg, range(5), runner=lambda cfgs: [math.inf] * 30)
    assert err.value.report.selected is None


# io and plots

def _trace(seed, K=12, period=5):
    p = noisy_quadratic(3, [1, 2, 3], 1.0, seed=0, start=np.ones(3))
    cfg = RunConfig(K=K, seed=seed, batches=BatchSchedule.constant(4), cycles=CycleSchedule.constant(period))
    return run_slam(p, None, cfg)


def test_trace_csv_round_trip_and_bytes(tmp_path):
    tr = _trace(3)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_trace_csv(a, tr)
    write_trace_csv(b, _trace(3))
    raw = a.read_bytes()
    assert raw == b.read_bytes()
    assert b"\r" not in raw
    assert raw.splitlines()[0] == b"seed,k,N_k,t_init,t_k,backtracks,step_changed,f_batch,f_est,resid_sq_est,samples_cum"
    back = read_trace_csv(a)
    assert tuple(back) == TRACE_HEADER
    np.testing.assert_array_equal(back["t_k"], tr["t_k"])
    np.testing.assert_array_equal(back["f_est"], tr["f_est"])


def test_aggregate_single_run_has_zero_std():
    agg = aggregate("slam", [_trace(0)])
    for m in agg.std.values():
        np.testing.assert_array_equal(m, 0.0)
    assert list(agg.runs) == [1] * 12


def test_aggregate_uneven_lengths():
    agg = aggregate("slam", [_trace(0, K=12), _trace(1, K=8)])
    assert list(agg.runs) == [2] * 8 + [1] * 4
    assert agg.std["t_k"][10] == 0.0


def test_plot_data_layout(tmp_path):
    aggs = {"slam": aggregate("slam", [_trace(0, K=120, period=50)]),
            "other": aggregate("other", [_trace(1, K=60, period=50), _trace(2, K=60, period=50)])}
    files = emit_plot_data(aggs, tmp_path)
    assert sorted(f.name for f in files) == ["objective.dat", "plot.gp", "residual.dat", "stepsize.dat"]
    blocks = (tmp_path / "stepsize.dat").read_text().split("\n\n\n")
    assert len(blocks) == 2
    lines = blocks[0].strip().splitlines()
    assert lines[:2] == ["# slam", "# k mean std"]
    data = np.array([[float(v) for v in line.split()] for line in lines[2:]])
    assert np.all(np.diff(data[:, 0]) == 1)
    np.testing.assert_array_equal(data[:, 2], 0.0)
    # t_init resets to s at k = 0 mod 50, so t_k there is s times a power of beta
    tr = _trace(0, K=120, period=50)
    assert np.all(tr["t_init"][[0, 50, 100]] == 1.0)
    assert "index 1" in (tmp_path / "plot.gp").read_text()


# runner and CLI

def test_run_experiment_deterministic(tmp_path):
    base = {"problem": {"kind": "rosenbrock", "n": 2}, "K": 30, "seeds": [0, 1], "batch": "8"}
    r1 = run_experiment(build_spec(base, out=str(tmp_path / "a"), solvers=["slam", "sgd_const"], step=1e-4),
                        plots=False)
    r2 = run_experiment(build_spec(base, out=str(tmp_path / "b"), solvers=["slam", "sgd_const"], step=1e-4),
                        plots=False)
    assert r1.exit_code == 0
    for f in ("slam/seed_0.csv", "slam/aggregate.csv", "sgd_const/seed_1.csv", "summary.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    header, rows = read_rows(tmp_path / "a" / "slam" / "aggregate.csv")
    assert tuple(header) == AGG_HEADER and len(rows) == 30


def test_cli_runs_and_writes(tmp_path, capsys):
    out = tmp_path / "run"
    code = cli.main(["--problem", "rosenbrock", "--n", "2", "--solver", "slam", "--solver", "sgd_dimin_tuned",
                     "--K", "20", "--seeds", "0..1", "--batch", "4", "--out", str(out), "--quiet"])
    assert code == 0
    text = capsys.readouterr().out.splitlines()
    assert text[0] == "solver,seed,status,step,final_f_est,final_resid_sq,step_changes"
    assert len(text) == 5
    assert (out / "tuning" / "sgd_dimin_tuned.csv").exists()
    assert (out / "plots" / "objective.dat").exists()
    assert (out / "plots" / "objective.png").exists()


def test_cli_usage_errors(tmp_path, capsys):
    assert cli.main([]) == 2
    assert cli.main(["--problem", "rosenbrock", "--solver", "bogus", "--out", str(tmp_path)]) == 2


def test_cli_reports_failed_solver(tmp_path, capsys):
    # adam is not offered with a box regularizer, so every run fails
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"problem": {"kind": "dispatch", "n": 2}, "solvers": ["adam"], "K": 2,
                                "seeds": [0], "batch": "2", "metric_batch": 2}))
    code = cli.main([str(spec), "--out", str(tmp_path / "o"), "--quiet", "--no-plots"])
    assert code == 1
    assert (tmp_path / "o" / "adam" / "seed_0.error").exists()
    assert ",failed," in capsys.readouterr().out
