"""Armijo backtracking with periodic resets of the initial step."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .oracles import SampledFunctions
from .prox import Regularizer
from .schedules import CycleSchedule


class LinesearchError(RuntimeError):
    """Backtracking safeguard tripped or the oracle returned a bad value.

    ``info`` holds the point, the initial trial step and the last sampled
    objective gap, which is usually enough to tell a smoothness violation
    from an oracle bug.
    """

    def __init__(self, msg, info=None):
        super().__init__(msg)
        self.info = info or {}


@dataclass(frozen=True)
class LinesearchConfig:
    s: float = 1.0
    alpha: float = 0.1
    beta: float = 0.9
    max_backtracks: int = 200
    convex: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.s) and self.s > 0):
            raise ValueError("s must be positive")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if self.convex:
            if not 0.5 <= self.alpha <= 1:
                raise ValueError("the convex condition needs alpha in [1/2, 1]")
        elif not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.max_backtracks < 1:
            raise ValueError("max_backtracks must be positive")


@dataclass
class LinesearchState:
    """Counters driving the reset-or-carry rule.

    ``t_prev`` starts at ``s`` so that a change at ``k = 0`` is counted only
    when the first accepted step is below ``s``.
    """

    s: float
    t_prev: float
    k: int = 0
    d: int = 1
    j: int = 0
    change_count: int = 0
    backtracks_last: int = 0

    @classmethod
    def start(cls, s: float) -> "LinesearchState":
        return cls(s=float(s), t_prev=float(s))

    def accept(self, t: float, n_backtracks: int) -> bool:
        """Record an accepted step; returns whether it differs from the last one."""
        changed = t != self.t_prev
        self.change_count += int(changed)
        self.t_prev = t
        self.backtracks_last = n_backtracks
        return changed


def initial_step(state: LinesearchState, schedule: CycleSchedule) -> tuple[float, LinesearchState]:
    """Initial trial step for iteration ``state.k``; advances the counters in place.

    Cycles are 0-indexed, so the reset that ends cycle ``j`` fires once
    ``d`` has reached ``p_j``.
    """
    if state.k == 0:
        t, state.d = state.s, 1
    elif state.d == schedule.period(state.j):
        t, state.d = state.s, 1
        state.j += 1
    else:
        t = state.t_prev
        state.d += 1
    state.k += 1
    return t, state


def _value(pair: SampledFunctions, r: Regularizer, x) -> float:
    return pair.value_at(x) + r.value(x)


def armijo_nonconvex(pair: SampledFunctions, r: Regularizer, x, x_t, t: float, alpha: float) -> bool:
    """``phi~(x_t) - phi~(x) <= -(alpha/t) ||x - x_t||^2`` with exact comparison."""
    base = _value(pair, r, x)
    trial = _value(pair, r, x_t)
    _check_values(base, trial, x, t)
    diff = x - x_t
    return trial - base <= -(alpha / t) * float(diff @ diff)


def armijo_convex(pair: SampledFunctions, r: Regularizer, x, x_t, t: float, alpha: float) -> bool:
    """``f~(x_t) <= f~(x) - g~(x)'(x - x_t) + ((1 - alpha)/t) ||x - x_t||^2``."""
    base = pair.value_at(x)
    trial = pair.value_at(x_t)
    _check_values(base, trial, x, t)
    diff = x - x_t
    return trial <= base - float(pair.grad_at(x) @ diff) + ((1.0 - alpha) / t) * float(diff @ diff)


def _check_values(base, trial, x, t):
    # +inf at a trial point just fails the test; anything else non-finite is a bug
    if not math.isfinite(base) or math.isnan(trial):
        raise LinesearchError(
            "non-finite sampled objective", {"x": np.array(x), "t": t, "base": base, "trial": trial}
        )


def trial_point(r: Regularizer, x, g, t: float) -> np.ndarray:
    return r.prox(x - t * g, t)


def backtrack(
    pair: SampledFunctions,
    r: Regularizer,
    x: np.ndarray,
    t_init: float,
    config: LinesearchConfig,
) -> tuple[float, np.ndarray, int]:
    """Shrink ``t`` by ``beta`` from ``t_init`` until the Armijo test passes.

    ``g~(x)`` is computed once; each trial costs one prox and one sampled
    value.  Returns ``(t, x(t), number of reductions)``.
    """
    if not 0 < t_init <= config.s:
        raise ValueError(f"t_init must lie in (0, s], got {t_init}")
    x = np.asarray(x, dtype=float)
    g = pair.grad_at(x)
    test = armijo_convex if config.convex else armijo_nonconvex
    t = t_init
    for n in range(config.max_backtracks + 1):
        x_t = trial_point(r, x, g, t)
        if test(pair, r, x, x_t, t, config.alpha):
            return t, x_t, n
        t = config.beta * t
    diff = x - x_t
    gap = _value(pair, r, x_t) - _value(pair, r, x)
    raise LinesearchError(
        f"no acceptable step after {config.max_backtracks} reductions",
        {"x": x.copy(), "t_init": t_init, "t_last": t / config.beta, "gap": gap,
         "required": -(config.alpha * config.beta / t) * float(diff @ diff)},
    )
