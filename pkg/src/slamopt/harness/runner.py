"""Fan-out of (solver x seed) runs, optional baseline tuning, and output files."""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..problems import make_problem
from ..solvers import run
from .config import ExperimentSpec
from .io import aggregate, write_aggregate_csv, write_rows, write_trace_csv
from .plotting import emit_plot_data, render_png
from .tuning import TuningError, tune, tuning_seeds

_PROBLEMS: dict = {}


def _problem(desc: dict):
    key = json.dumps(desc, sort_keys=True)
    if key not in _PROBLEMS:
        d = dict(desc)
        _PROBLEMS[key] = make_problem(d.pop("kind"), **d)
    return _PROBLEMS[key]


def _run_task(task):
    """Worker entry point: ``(problem descriptor, RunConfig)`` to a trace or an error string."""
    desc, config = task
    try:
        return run(_problem(desc), None, config)
    except Exception as exc:  # recorded per run, never fatal to the experiment
        return f"{type(exc).__name__}: {exc}"


def _final_objective(task):
    out = _run_task(task)
    return math.nan if isinstance(out, str) else out.final_f_est


@dataclass
class ExperimentResult:
    traces: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    aggregates: dict = field(default_factory=dict)
    tuning: dict = field(default_factory=dict)
    steps: dict = field(default_factory=dict)
    files: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        for name, traces in self.traces.items():
            if not traces and self.failures.get(name):
                return 1
        return 0


def run_experiment(spec: ExperimentSpec, write: bool = True, plots: bool = True, log=None) -> ExperimentResult:
    """Tune where requested, run every solver on every seed, then write files."""
    log = log or (lambda msg: None)
    res = ExperimentResult()
    pool = ProcessPoolExecutor(spec.jobs) if spec.jobs > 1 else None

    def mapper(fn, tasks):
        return list(pool.map(fn, tasks)) if pool else [fn(t) for t in tasks]

    try:
        for sol in spec.solvers:
            step = None
            if sol.tuned:
                base = spec.run_config(sol, spec.seeds[0])
                try:
                    report = tune(
                        None, None, base, tuning_seeds(spec.seeds),
                        runner=lambda cfgs: mapper(_final_objective, [(spec.problem, c) for c in cfgs]),
                    )
                except TuningError as exc:
                    res.tuning[sol.name] = exc.report
                    res.traces[sol.name] = []
                    res.failures[sol.name] = [(s, str(exc)) for s in spec.seeds]
                    log(f"{sol.name}: tuning failed")
                    continue
                res.tuning[sol.name] = report
                step = report.selected
                log(f"{sol.name}: tuned step {step:g}")
            res.steps[sol.name] = step or sol.step or spec.step
            tasks = [(spec.problem, spec.run_config(sol, seed, step=step)) for seed in spec.seeds]
            outs = mapper(_run_task, tasks)
            res.traces[sol.name] = [o for o in outs if not isinstance(o, str)]
            res.failures[sol.name] = [(s, o) for s, o in zip(spec.seeds, outs) if isinstance(o, str)]
            if res.traces[sol.name]:
                res.aggregates[sol.name] = aggregate(sol.name, res.traces[sol.name])
            log(f"{sol.name}: {len(res.traces[sol.name])} runs, {len(res.failures[sol.name])} failed")
    finally:
        if pool:
            pool.shutdown()
    if write:
        res.files = write_outputs(spec, res, plots=plots)
    return res


def summary_rows(spec: ExperimentSpec, res: ExperimentResult):
    for sol in spec.solvers:
        for tr in res.traces.get(sol.name, []):
            yield (sol.name, tr.seed, tr.status, res.steps.get(sol.name) or math.nan,
                   tr.final_f_est, tr.final_resid_sq, tr.change_count)
        for seed, msg in res.failures.get(sol.name, []):
            yield (sol.name, seed, "failed", math.nan, math.nan, math.nan, 0)


SUMMARY_HEADER = ("solver", "seed", "status", "step", "final_f_est", "final_resid_sq", "step_changes")


def write_outputs(spec: ExperimentSpec, res: ExperimentResult, plots: bool = True) -> list[Path]:
    out = Path(spec.out)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    p = out / "spec.json"
    p.write_text(spec.to_json() + "\n", encoding="utf-8")
    files.append(p)
    for name, traces in res.traces.items():
        for tr in traces:
            p = out / name / f"seed_{tr.seed}.csv"
            write_trace_csv(p, tr)
            files.append(p)
        if name in res.aggregates:
            p = out / name / "aggregate.csv"
            write_aggregate_csv(p, res.aggregates[name])
            files.append(p)
        for seed, msg in res.failures.get(name, []):
            p = out / name / f"seed_{seed}.error"
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(msg + "\n", encoding="utf-8")
            files.append(p)
    for name, report in res.tuning.items():
        p = out / "tuning" / f"{name}.csv"
        header = ("step",) + tuple(f"seed_{s}" for s in report.seeds) + ("mean", "selected")
        write_rows(p, header, report.rows())
        files.append(p)
    p = out / "summary.csv"
    write_rows(p, SUMMARY_HEADER, summary_rows(spec, res))
    files.append(p)
    if plots and res.aggregates:
        files += emit_plot_data(res.aggregates, out / "plots")
        files += render_png(res.aggregates, out / "plots")
    return files
