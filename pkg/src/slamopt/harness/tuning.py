"""Grid tuning of baseline stepsizes on a fifth of the iteration budget."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .. import rng as rngmod
from ..solvers import RunConfig, run

TUNING_GRID = (1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0)
TUNING_RUNS = 5


class TuningError(RuntimeError):
    def __init__(self, msg, report):
        super().__init__(msg)
        self.report = report


@dataclass
class TuningReport:
    """``finals[i, j]`` is the final estimated objective for ``grid[i]`` and ``seeds[j]``."""

    solver: str
    grid: tuple
    seeds: tuple
    K: int
    finals: np.ndarray
    selected: float | None

    @property
    def means(self) -> np.ndarray:
        return self.finals.mean(axis=1)

    @property
    def iterations(self) -> int:
        return len(self.grid) * len(self.seeds) * self.K

    def rows(self):
        for i, step in enumerate(self.grid):
            yield (step, *self.finals[i], self.means[i], int(step == self.selected))


def tuning_seeds(seeds, runs: int = TUNING_RUNS) -> tuple:
    """Seeds for tuning runs, derived from the experiment seeds on their own stream."""
    base = tuple(seeds)[0] if seeds else 0
    return tuple(rngmod.derived_seed(base, rngmod.TUNING, i) for i in range(runs))


def select_step(grid, means) -> float | None:
    """Smallest finite mean wins; equal means go to the larger step."""
    best, best_val = None, math.inf
    for step, val in sorted(zip(grid, means), key=lambda p: -p[0]):
        if math.isfinite(val) and val < best_val:
            best, best_val = step, val
    return best


def tune(problem, r, config: RunConfig, seeds, grid=TUNING_GRID, runner=None) -> TuningReport:
    """Run ``config`` for every step in ``grid`` and seed; ``config.K`` is the full budget.

    ``runner`` maps a list of configs to a list of final objectives and lets
    the harness spread the grid over a worker pool.
    """
    K_t = math.ceil(config.K / 5)
    seeds = tuple(seeds)
    configs = [replace(config, step=step, K=K_t, seed=seed, metrics="final") for step in grid for seed in seeds]
    if runner is None:
        finals = [run(problem, r, c).final_f_est for c in configs]
    else:
        finals = runner(configs)
    finals = np.asarray(finals, dtype=float).reshape(len(grid), len(seeds))
    report = TuningReport(config.solver, tuple(grid), seeds, K_t, finals, None)
    with np.errstate(invalid="ignore", over="ignore"):
        report.selected = select_step(grid, report.means)
    if report.selected is None:
        raise TuningError(f"every grid step diverged for {config.solver}", report)
    return report
