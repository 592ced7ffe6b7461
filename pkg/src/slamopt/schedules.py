"""Cycle-length sequences ``{p_j}`` and batch-size sequences ``{N_k}``."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

CYCLE_KINDS = ("constant", "fraction", "geometric", "linear", "single")
BATCH_KINDS = ("constant", "fraction", "linear", "power")


@dataclass(frozen=True)
class CycleSchedule:
    """Restart periods, 0-indexed (the first cycle has length ``p_0``).

    kinds
        ``constant``  p_j = length
        ``fraction``  p_j = ceil(c_p K), needs ``K``
        ``geometric`` p_j = 2^j l0
        ``linear``    p_j = l0 + j
        ``single``    p_0 = K (one cycle, never resets)
    """

    kind: str
    length: int | None = None
    c_p: float | None = None
    l0: int | None = None
    K: int | None = None

    def __post_init__(self):
        if self.kind not in CYCLE_KINDS:
            raise ValueError(f"unknown cycle schedule {self.kind!r}")
        if self.kind == "constant" and not (self.length and self.length >= 1):
            raise ValueError("constant cycles need length >= 1")
        if self.kind == "fraction":
            if self.c_p is None or not 0 < self.c_p <= 1:
                raise ValueError("fraction cycles need c_p in (0, 1]")
            if not self.K or self.K < 1:
                raise ValueError("fraction cycles need K")
        if self.kind in ("geometric", "linear") and not (self.l0 and self.l0 >= 1):
            raise ValueError(f"{self.kind} cycles need l0 >= 1")
        if self.kind == "single" and not (self.K and self.K >= 1):
            raise ValueError("single cycle needs K")

    @classmethod
    def constant(cls, length: int) -> "CycleSchedule":
        return cls("constant", length=int(length))

    @classmethod
    def fraction(cls, c_p: float, K: int) -> "CycleSchedule":
        return cls("fraction", c_p=float(c_p), K=int(K))

    @classmethod
    def geometric(cls, l0: int = 1) -> "CycleSchedule":
        return cls("geometric", l0=int(l0))

    @classmethod
    def linear(cls, l0: int = 1) -> "CycleSchedule":
        return cls("linear", l0=int(l0))

    @classmethod
    def single(cls, K: int) -> "CycleSchedule":
        return cls("single", K=int(K))

    def period(self, j: int) -> int:
        if j < 0:
            raise ValueError("cycle index must be >= 0")
        if self.kind == "constant":
            return self.length
        if self.kind == "fraction":
            return math.ceil(self.c_p * self.K)
        if self.kind == "geometric":
            return self.l0 * 2**j
        if self.kind == "linear":
            return self.l0 + j
        return self.K

    def periods(self) -> Iterator[int]:
        return (self.period(j) for j in itertools.count())

    def cycle_count(self, K: int) -> int:
        """``J(K) + 1``: cycles needed to cover ``K`` iterations."""
        if K < 1:
            raise ValueError("K must be >= 1")
        if self.kind in ("constant", "fraction", "single"):
            return -(-K // self.period(0))
        total = 0
        for j, p in enumerate(self.periods()):
            total += p
            if total >= K:
                return j + 1
        raise AssertionError("unreachable")

    def describe(self) -> str:
        if self.kind == "constant":
            return f"p{self.length}"
        if self.kind == "fraction":
            return f"p{math.ceil(self.c_p * self.K)}"
        if self.kind in ("geometric", "linear"):
            return f"{self.kind}{self.l0}"
        return "single"


def cycle_count(schedule: CycleSchedule, K: int) -> int:
    return schedule.cycle_count(K)


@dataclass(frozen=True)
class BatchSchedule:
    """Non-decreasing batch sizes.

    kinds
        ``constant``  N_k = size
        ``fraction``  N_k = ceil(c_b K), needs ``K``
        ``linear``    N_k = k + 1
        ``power``     N_k = ceil((k + 1)^b), b > 1
    """

    kind: str
    size_: int | None = None
    c_b: float | None = None
    b: float | None = None
    K: int | None = None

    def __post_init__(self):
        if self.kind not in BATCH_KINDS:
            raise ValueError(f"unknown batch schedule {self.kind!r}")
        if self.kind == "constant" and not (self.size_ and self.size_ >= 1):
            raise ValueError("constant batches need size >= 1")
        if self.kind == "fraction" and (self.c_b is None or self.c_b <= 0 or not self.K):
            raise ValueError("fraction batches need c_b > 0 and K")
        if self.kind == "power" and (self.b is None or self.b <= 1):
            raise ValueError("power batches need b > 1")

    @classmethod
    def constant(cls, size: int) -> "BatchSchedule":
        return cls("constant", size_=int(size))

    @classmethod
    def fraction(cls, c_b: float, K: int) -> "BatchSchedule":
        return cls("fraction", c_b=float(c_b), K=int(K))

    @classmethod
    def linear(cls) -> "BatchSchedule":
        return cls("linear")

    @classmethod
    def power(cls, b: float) -> "BatchSchedule":
        return cls("power", b=float(b))

    def size(self, k: int) -> int:
        if self.kind == "constant":
            return self.size_
        if self.kind == "fraction":
            return math.ceil(self.c_b * self.K)
        if self.kind == "linear":
            return k + 1
        return math.ceil((k + 1) ** self.b)

    def total(self, K: int) -> int:
        """Samples consumed by ``K`` iterations, ``sum_{k<K} N_k``."""
        return sum(self.size(k) for k in range(K))

    def inverse_sum(self, K: int) -> float:
        return math.fsum(1.0 / self.size(k) for k in range(K))

    def describe(self) -> str:
        if self.kind == "constant":
            return f"N{self.size_}"
        if self.kind == "fraction":
            return f"N{math.ceil(self.c_b * self.K)}"
        return self.kind if self.kind == "linear" else f"power{self.b:g}"


def batch_sum_bound(schedule: BatchSchedule, K: int) -> float:
    """Closed-form upper bound on ``sum_{k<K} 1/N_k`` for the schedule kind."""
    if schedule.kind == "constant":
        return K / schedule.size_
    if schedule.kind == "fraction":
        return 1.0 / schedule.c_b
    if schedule.kind == "linear":
        if K < 2:
            raise ValueError("the logarithmic bound needs K >= 2")
        return math.log(K) + 1.0
    if schedule.kind == "power":
        return schedule.b / (schedule.b - 1.0)
    raise ValueError(f"no analytic bound for {schedule.kind!r} batches")


def t_change_cap(s: float, L: float, alpha: float, beta: float, cycles: int) -> int:
    """Deterministic cap on the number of step changes over ``cycles`` cycles."""
    if s <= 0 or L <= 0:
        raise ValueError("s and L must be positive")
    if not (0 < alpha < 1 and 0 < beta < 1):
        raise ValueError("alpha and beta must lie in (0, 1)")
    if cycles < 1:
        raise ValueError("cycles must be >= 1")
    ratio = s * L / (2.0 * (1.0 - alpha))
    bracket = max(math.log(ratio) / math.log(1.0 / beta), 0.0) if ratio > 0 else 0.0
    return cycles * math.ceil(bracket + 2.0)
