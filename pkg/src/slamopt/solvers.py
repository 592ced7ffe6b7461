"""SLAM, its convex variant and the baselines, all recording a :class:`RunTrace`.

Every solver draws its batches from the ``algorithm`` stream of the run
seed, so for a given seed all solvers see the same scenarios until one of
them stops.  Metrics use the separate ``metrics`` stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng as rngmod
from .linesearch import LinesearchConfig, LinesearchError, LinesearchState, backtrack, initial_step
from .oracles import DomainError, StochasticProblem, draw_batch, sampled_pair, true_metrics
from .prox import Regularizer, ZeroRegularizer
from .schedules import BatchSchedule, CycleSchedule

SOLVERS = ("slam", "slam_con", "sls0", "sgd_const", "sgd_dimin", "adam")
TRACE_COLUMNS = (
    "k", "N_k", "t_init", "t_k", "backtracks", "step_changed",
    "f_batch", "f_est", "resid_sq_est", "samples_cum",
)
ADAM_BETA1, ADAM_BETA2, ADAM_EPS = 0.9, 0.999, 1e-8


class UnsupportedConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """One run.  ``step`` is the baseline stepsize; linesearch solvers use ``linesearch.s``.

    ``metrics`` is ``"every"`` (estimate at each ``x_k``), ``"final"`` (only
    at ``x_K``) or ``"none"``.  ``metric_step`` is the ``s`` in ``G_s``.
    With ``metric_common`` a sampled estimator reuses one batch for the whole
    run, so differences along a trace are not swamped by estimator noise.
    """

    solver: str = "slam"
    linesearch: LinesearchConfig = field(default_factory=LinesearchConfig)
    cycles: CycleSchedule = field(default_factory=lambda: CycleSchedule.constant(50))
    batches: BatchSchedule = field(default_factory=lambda: BatchSchedule.constant(128))
    K: int = 100
    seed: int = 0
    step: float = 1.0
    metric_batch: int = 128
    metric_step: float = 1.0
    metrics: str = "every"
    metric_common: bool = True
    keep_iterates: bool = False

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.metrics not in ("every", "final", "none"):
            raise ValueError("metrics must be 'every', 'final' or 'none'")
        if self.solver == "slam_con" and not self.linesearch.convex:
            object.__setattr__(self, "linesearch", replace(self.linesearch, convex=True))


@dataclass
class RunTrace:
    """Per-iteration records; row ``k`` describes iteration ``k`` taken from ``x_k``."""

    solver: str
    seed: int
    columns: dict
    x_final: np.ndarray
    final_f_est: float
    final_resid_sq: float
    change_count: int
    status: str = "ok"
    x_bar: np.ndarray | None = None
    f_bar_est: float | None = None
    iterates: np.ndarray | None = None
    error: str | None = None

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __len__(self) -> int:
        return len(self.columns["k"])

    @property
    def K(self) -> int:
        return len(self)

    def rows(self):
        for i in range(len(self)):
            yield {c: self.columns[c][i] for c in TRACE_COLUMNS}


class _Recorder:
    """Accumulates rows and metric estimates for one run."""

    def __init__(self, problem, r, config, x0):
        self.problem, self.r, self.config = problem, r, config
        self.metric_rng = rngmod.stream(config.seed, rngmod.METRICS)
        self.cols = {c: [] for c in TRACE_COLUMNS}
        self.samples = 0
        self.iterates = [x0.copy()] if config.keep_iterates else None
        self.metric_samples = None

    def metrics_at(self, x):
        cfg = self.config
        if cfg.metric_common and not self.problem.analytic and self.metric_samples is None:
            self.metric_samples = draw_batch(self.problem, cfg.metric_batch, self.metric_rng)
        with np.errstate(over="ignore", invalid="ignore"):
            return true_metrics(self.problem, x, cfg.metric_batch, self.metric_rng, self.r,
                                cfg.metric_step, batch=self.metric_samples)

    def row(self, k, N, t_init, t, nb, changed, f_batch, x):
        if self.config.metrics == "every":
            f_est, res = self.metrics_at(x)
        else:
            f_est, res = math.nan, math.nan
        self.samples += N
        for c, v in zip(TRACE_COLUMNS, (k, N, t_init, t, nb, int(changed), f_batch, f_est, res, self.samples)):
            self.cols[c].append(v)

    def push(self, x):
        if self.iterates is not None:
            self.iterates.append(x.copy())

    def finish(self, x, change_count, status="ok", error=None, x_bar=None):
        dtypes = {"k": int, "N_k": int, "backtracks": int, "step_changed": int, "samples_cum": int}
        cols = {c: np.asarray(v, dtype=dtypes.get(c, float)) for c, v in self.cols.items()}
        f, res, f_bar = math.nan, math.nan, None
        if status == "ok" and self.config.metrics != "none":
            f, res = self.metrics_at(x)
            if x_bar is not None:
                f_bar = self.metrics_at(x_bar)[0]
        its = np.array(self.iterates) if self.iterates is not None else None
        return RunTrace(self.config.solver, self.config.seed, cols, x, f, res, change_count,
                        status, x_bar, f_bar, its, error)


def _prepare(problem: StochasticProblem, r: Regularizer | None, x0):
    r = problem.default_regularizer() if r is None else r
    x = problem.default_start() if x0 is None else np.array(x0, dtype=float, copy=True)
    if not r.contains(x):
        raise ValueError("x0 is outside dom r")
    problem.check_point(x)
    return r, x


def _linesearch_run(problem, r, config: RunConfig, x0, cycles: CycleSchedule | None) -> RunTrace:
    """Shared loop for SLAM (``cycles`` given) and sls0 (``cycles`` None: no resets)."""
    r, x = _prepare(problem, r, x0)
    ls = config.linesearch
    alg = rngmod.stream(config.seed, rngmod.ALGORITHM)
    rec = _Recorder(problem, r, config, x)
    state = LinesearchState.start(ls.s)
    x_sum = np.zeros_like(x) if ls.convex else None
    for k in range(config.K):
        N = config.batches.size(k)
        pair = sampled_pair(problem, draw_batch(problem, N, alg))
        if cycles is None:
            t_init = ls.s if k == 0 else state.t_prev
        else:
            t_init, state = initial_step(state, cycles)
        try:
            t, x_next, nb = backtrack(pair, r, x, t_init, ls)
        except LinesearchError as exc:
            exc.info.update({"k": k, "seed": config.seed, "solver": config.solver})
            raise
        changed = state.accept(t, nb)
        rec.row(k, N, t_init, t, nb, changed, pair.value_at(x), x)
        x = x_next
        rec.push(x)
        if x_sum is not None:
            x_sum += x
    x_bar = x_sum / config.K if x_sum is not None else None
    return rec.finish(x, state.change_count, x_bar=x_bar)


def run_slam(problem: StochasticProblem, r: Regularizer | None, config: RunConfig, x0=None) -> RunTrace:
    """Stochastic linesearch with the initial step reset to ``s`` at each cycle start."""
    return _linesearch_run(problem, r, config, x0, config.cycles)


def run_slam_convex(problem: StochasticProblem, r: Regularizer | None, config: RunConfig, x0=None) -> RunTrace:
    """SLAM with the convex Armijo test; also returns ``x_bar = mean(x_1..x_K)``."""
    if not config.linesearch.convex:
        config = replace(config, linesearch=replace(config.linesearch, convex=True))
    return _linesearch_run(problem, r, config, x0, config.cycles)


def run_sls0(problem: StochasticProblem, r: Regularizer | None, config: RunConfig, x0=None) -> RunTrace:
    """Backtracking that always starts from the previous accepted step (never resets)."""
    return _linesearch_run(problem, r, config, x0, None)


def _fixed_step_run(problem, r, config: RunConfig, x0, update) -> RunTrace:
    r, x = _prepare(problem, r, x0)
    alg = rngmod.stream(config.seed, rngmod.ALGORITHM)
    rec = _Recorder(problem, r, config, x)
    t_prev, changes = config.step, 0
    for k in range(config.K):
        N = config.batches.size(k)
        batch = draw_batch(problem, N, alg)
        with np.errstate(over="ignore", invalid="ignore"):
            f_b, g = problem.batch_value_grad(x, batch.samples)
            t, x_next = update(k, x, np.asarray(g, dtype=float))
        changed = t != t_prev
        changes += int(changed)
        t_prev = t
        rec.row(k, N, t, t, 0, changed, f_b, x)
        try:
            if not np.all(np.isfinite(x_next)):
                raise DomainError("non-finite iterate")
            problem.check_point(x_next)
        except DomainError as exc:
            return rec.finish(x, changes, status="diverged", error=str(exc))
        x = x_next
        rec.push(x)
    return rec.finish(x, changes)


def run_sgd(problem: StochasticProblem, r: Regularizer | None, config: RunConfig, x0=None,
            rule: str | None = None) -> RunTrace:
    """Prox-SGD with ``t_k = step`` (``constant``) or ``step / sqrt(k+1)`` (``diminishing``)."""
    rule = rule or ("diminishing" if config.solver == "sgd_dimin" else "constant")
    if rule not in ("constant", "diminishing"):
        raise ValueError(f"unknown step rule {rule!r}")
    reg = problem.default_regularizer() if r is None else r
    s = config.step

    def update(k, x, g):
        t = s if rule == "constant" else s / math.sqrt(k + 1)
        return t, reg.prox(x - t * g, t)

    return _fixed_step_run(problem, reg, config, x0, update)


def run_adam(problem: StochasticProblem, r: Regularizer | None, config: RunConfig, x0=None) -> RunTrace:
    """Adam with bias correction and default moments; smooth unconstrained problems only."""
    reg = problem.default_regularizer() if r is None else r
    if not isinstance(reg, ZeroRegularizer):
        raise UnsupportedConfigurationError("adam is only offered for r = 0")
    s = config.step
    m = v = None

    def update(k, x, g):
        nonlocal m, v
        if m is None:
            m, v = np.zeros_like(x), np.zeros_like(x)
        m = ADAM_BETA1 * m + (1 - ADAM_BETA1) * g
        v = ADAM_BETA2 * v + (1 - ADAM_BETA2) * g * g
        m_hat = m / (1 - ADAM_BETA1 ** (k + 1))
        v_hat = v / (1 - ADAM_BETA2 ** (k + 1))
        return s, x - s * m_hat / (np.sqrt(v_hat) + ADAM_EPS)

    return _fixed_step_run(problem, reg, config, x0, update)


def run(problem: StochasticProblem, r: Regularizer | None, config: RunConfig, x0=None) -> RunTrace:
    """Dispatch on ``config.solver``."""
    return {
        "slam": run_slam,
        "slam_con": run_slam_convex,
        "sls0": run_sls0,
        "sgd_const": run_sgd,
        "sgd_dimin": run_sgd,
        "adam": run_adam,
    }[config.solver](problem, r, config, x0)


def pick_random_index(trace: RunTrace, rng: np.random.Generator) -> int:
    """Uniform draw of ``R_K`` from ``{0, ..., K-1}``."""
    if len(trace) < 1:
        raise ValueError("empty trace")
    return int(rng.integers(0, len(trace)))
