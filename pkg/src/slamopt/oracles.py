"""Stochastic problem abstraction and sampled (frozen-batch) oracles.

A problem draws scenarios and evaluates ``F(x, xi)`` and its gradient for a
whole batch at once.  A :class:`SampleBatch` is frozen once drawn, and the
:class:`SampledFunctions` built on it may be evaluated at as many points as
the linesearch needs.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .prox import Regularizer, ZeroRegularizer, residual


class DomainError(ValueError):
    """Raised when an oracle is evaluated outside ``int(dom f)``."""


@dataclass(frozen=True)
class ProblemMetadata:
    """Problem constants known by construction.

    Only tests and reports read these; no solver ever does.
    """

    dimension: int
    L: float | None = None
    sigma2: float | None = None
    B_g: float | None = None
    L_r: float | None = None
    phi_inf: float | None = None
    mu: float | None = None
    D_x: float | None = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        for name in ("L", "sigma2", "B_g", "L_r", "mu", "D_x"):
            v = getattr(self, name)
            if v is not None and (not math.isfinite(v) or v < 0):
                raise ValueError(f"{name} must be finite and non-negative, got {v}")
        if self.phi_inf is not None and not math.isfinite(self.phi_inf):
            raise ValueError("phi_inf must be finite")


class StochasticProblem(ABC):
    """Base class for ``f(x) = E[F(x, xi)]``.

    Subclasses implement :meth:`sample` and :meth:`batch_value_grad`.  Those
    with a closed-form expectation set ``analytic = True`` and implement
    :meth:`true_value_grad`.
    """

    analytic: bool = False
    metadata: ProblemMetadata

    @property
    def dim(self) -> int:
        return self.metadata.dimension

    def default_regularizer(self) -> Regularizer:
        return ZeroRegularizer()

    def default_start(self) -> np.ndarray:
        return np.zeros(self.dim)

    @abstractmethod
    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` i.i.d. scenarios; the first axis indexes scenarios."""

    @abstractmethod
    def batch_value_grad(self, x: np.ndarray, samples: np.ndarray) -> tuple[float, np.ndarray]:
        """Mean of ``F(x, xi_i)`` and of ``grad F(x, xi_i)`` over ``samples``."""

    def batch_value(self, x: np.ndarray, samples: np.ndarray) -> float:
        return self.batch_value_grad(x, samples)[0]

    def batch_grad(self, x: np.ndarray, samples: np.ndarray) -> np.ndarray:
        return self.batch_value_grad(x, samples)[1]

    def true_value_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        raise NotImplementedError(f"{type(self).__name__} has no closed-form expectation")

    def in_domain(self, x: np.ndarray) -> bool:
        return True

    def check_point(self, x: np.ndarray) -> None:
        if x.shape != (self.dim,):
            raise DomainError(f"expected a point of shape ({self.dim},), got {x.shape}")
        if not np.all(np.isfinite(x)) or not self.in_domain(x):
            raise DomainError(f"point outside the domain of f: {x!r}")


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """An immutable mini-batch ``xi_{k,1..N_k}``."""

    samples: np.ndarray

    def __post_init__(self):
        arr = np.array(self.samples, copy=True)
        if arr.ndim == 0 or arr.shape[0] < 1:
            raise ValueError("a batch needs at least one scenario")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def size(self) -> int:
        return int(self.samples.shape[0])

    def __len__(self) -> int:
        return self.size


@dataclass(eq=False)
class SampledFunctions:
    """Sample-mean objective and gradient over one frozen batch.

    ``value_at`` and ``grad_at`` may be called at any number of points.  The
    two most recent (value, gradient) pairs are memoised by the bytes of
    ``x``: a linesearch alternates between the base point and the current
    trial point, and for the dispatch problem each evaluation solves ``N``
    QPs.
    """

    problem: StochasticProblem
    batch: SampleBatch
    evaluations: int = 0
    _memo: OrderedDict = field(default_factory=OrderedDict, repr=False)

    def _eval(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        x = np.asarray(x, dtype=float)
        key = x.tobytes()
        hit = self._memo.get(key)
        if hit is None:
            self.problem.check_point(x)
            value, grad = self.problem.batch_value_grad(x, self.batch.samples)
            self.evaluations += 1
            hit = (float(value), np.asarray(grad, dtype=float))
            self._memo[key] = hit
            if len(self._memo) > 2:
                self._memo.popitem(last=False)
        else:
            self._memo.move_to_end(key)
        return hit

    def value_at(self, x: np.ndarray) -> float:
        return self._eval(x)[0]

    def grad_at(self, x: np.ndarray) -> np.ndarray:
        return self._eval(x)[1].copy()


def draw_batch(problem: StochasticProblem, size: int, rng: np.random.Generator) -> SampleBatch:
    """Draw a frozen batch of ``size`` scenarios from ``rng``."""
    if size < 1:
        raise ValueError(f"batch size must be >= 1, got {size}")
    return SampleBatch(problem.sample(rng, int(size)))


def sampled_pair(problem: StochasticProblem, batch: SampleBatch) -> SampledFunctions:
    return SampledFunctions(problem, batch)


def true_metrics(
    problem: StochasticProblem,
    x: np.ndarray,
    estimator_batch_size: int,
    rng: np.random.Generator,
    regularizer: Regularizer | None = None,
    step: float = 1.0,
    batch: SampleBatch | None = None,
) -> tuple[float, float]:
    """Objective ``phi(x) = f(x) + r(x)`` and ``||G_step(x)||^2``.

    Closed forms are used when the problem has them (``rng`` is then left
    untouched); otherwise both quantities are estimated from one fresh batch
    of ``estimator_batch_size`` scenarios, or from ``batch`` when given.
    """
    if estimator_batch_size < 1:
        raise ValueError("estimator_batch_size must be >= 1")
    r = regularizer if regularizer is not None else problem.default_regularizer()
    x = np.asarray(x, dtype=float)
    problem.check_point(x)
    if problem.analytic:
        f, g = problem.true_value_grad(x)
    else:
        if batch is None:
            batch = draw_batch(problem, estimator_batch_size, rng)
        f, g = problem.batch_value_grad(x, batch.samples)
    G = residual(x, step, g, r)
    return float(f + r.value(x)), float(G @ G)

