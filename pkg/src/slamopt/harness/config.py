"""Experiment descriptors: a JSON file, CLI overrides, and schedule strings.

Schedule strings::

    batch   "128" | "frac:0.1" | "linear" | "power:2"
    period  "50"  | "frac:0.1" | "geometric:1" | "linear:1" | "single"
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from ..linesearch import LinesearchConfig
from ..problems import PROBLEM_KINDS
from ..schedules import BatchSchedule, CycleSchedule
from ..solvers import SOLVERS, RunConfig

TUNABLE = ("sgd_const", "sgd_dimin", "adam")


def parse_batch(text: str, K: int) -> BatchSchedule:
    kind, _, arg = str(text).partition(":")
    if kind.isdigit():
        return BatchSchedule.constant(int(kind))
    if kind == "frac":
        return BatchSchedule.fraction(float(arg), K)
    if kind == "linear":
        return BatchSchedule.linear()
    if kind == "power":
        return BatchSchedule.power(float(arg))
    raise ValueError(f"bad batch schedule {text!r}")


def parse_period(text: str, K: int) -> CycleSchedule:
    kind, _, arg = str(text).partition(":")
    if kind.isdigit():
        return CycleSchedule.constant(int(kind))
    if kind == "frac":
        return CycleSchedule.fraction(float(arg), K)
    if kind in ("geometric", "linear"):
        l0 = int(arg) if arg else 1
        return CycleSchedule.geometric(l0) if kind == "geometric" else CycleSchedule.linear(l0)
    if kind == "single":
        return CycleSchedule.single(K)
    raise ValueError(f"bad cycle schedule {text!r}")


@dataclass(frozen=True)
class SolverSpec:
    """``name`` labels outputs; ``kind`` is a solver; ``tuned`` runs the step grid first."""

    name: str
    kind: str
    tuned: bool = False
    step: float | None = None
    period: str | None = None
    s: float | None = None

    @classmethod
    def parse(cls, item) -> "SolverSpec":
        if isinstance(item, dict):
            d = dict(item)
            base = cls.parse(d.pop("kind", None) or d.get("name"))
            name = d.pop("name", base.name)
            tuned = d.pop("tuned", base.tuned)
            extra = {k: d.pop(k) for k in ("step", "period", "s") if k in d}
            if d:
                raise ValueError(f"unknown solver fields {sorted(d)}")
            return cls(name=name, kind=base.kind, tuned=tuned, **extra)
        text = str(item)
        tuned = text.endswith("_tuned")
        kind = text[: -len("_tuned")] if tuned else text
        if kind not in SOLVERS:
            raise ValueError(f"unknown solver {kind!r}; expected one of {SOLVERS}")
        if tuned and kind not in TUNABLE:
            raise ValueError(f"{kind} has no step to tune")
        return cls(name=text, kind=kind, tuned=tuned)


@dataclass(frozen=True)
class ExperimentSpec:
    problem: dict
    solvers: tuple
    K: int = 100
    batch: str = "128"
    period: str = "50"
    s: float = 1.0
    alpha: float = 0.1
    beta: float = 0.9
    seeds: tuple = (0, 1, 2, 3, 4)
    out: str = "runs"
    jobs: int = 1
    metric_batch: int = 128
    step: float = 1.0

    def __post_init__(self):
        if self.problem.get("kind") not in PROBLEM_KINDS:
            raise ValueError(f"unknown problem kind {self.problem.get('kind')!r}")
        solvers = tuple(s if isinstance(s, SolverSpec) else SolverSpec.parse(s) for s in self.solvers)
        if not solvers:
            raise ValueError("no solvers given")
        names = [s.name for s in solvers]
        if len(set(names)) != len(names):
            raise ValueError("solver names must be distinct")
        seeds = tuple(int(s) for s in self.seeds)
        if not seeds or len(set(seeds)) != len(seeds):
            raise ValueError("seeds must be a non-empty list of distinct integers")
        if self.K < 1 or self.jobs < 1:
            raise ValueError("K and jobs must be positive")
        object.__setattr__(self, "solvers", solvers)
        object.__setattr__(self, "seeds", seeds)
        parse_batch(self.batch, self.K)
        parse_period(self.period, self.K)

    def batches(self) -> BatchSchedule:
        return parse_batch(self.batch, self.K)

    def run_config(self, solver: SolverSpec, seed: int, step: float | None = None, K: int | None = None,
                   metrics: str = "every") -> RunConfig:
        K = K or self.K
        s = solver.s if solver.s is not None else self.s
        alpha = self.alpha
        if solver.kind == "slam_con" and alpha < 0.5:
            alpha = 0.5
        ls = LinesearchConfig(s=s, alpha=alpha, beta=self.beta, convex=solver.kind == "slam_con")
        period = solver.period or self.period
        if solver.kind == "sls0":
            period = "single"
        return RunConfig(
            solver=solver.kind,
            linesearch=ls,
            cycles=parse_period(period, K),
            batches=self.batches(),
            K=K,
            seed=seed,
            step=step or solver.step or self.step,
            metric_batch=self.metric_batch,
            metric_step=self.s,
            metrics=metrics,
        )

    def to_json(self) -> str:
        d = asdict(self)
        d["solvers"] = [
            {k: v for k, v in asdict(s).items() if v is not None and not (k == "tuned" and not v)}
            for s in self.solvers
        ]
        d["seeds"] = list(self.seeds)
        return json.dumps(d, indent=2, sort_keys=True)


def load_spec(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def build_spec(base: dict | None = None, **overrides) -> ExperimentSpec:
    """Merge a descriptor with non-None overrides (``n`` goes into the problem)."""
    d = dict(base or {})
    d["problem"] = dict(d.get("problem", {}))
    for key, val in overrides.items():
        if val is None:
            continue
        if key == "problem":
            d["problem"]["kind"] = val
        elif key == "n":
            d["problem"]["n"] = int(val)
        else:
            d[key] = val
    if "solvers" not in d:
        d["solvers"] = ["slam"]
    return ExperimentSpec(**d)
