"""Two-stage stochastic economic dispatch with a QP recourse.

First stage: ``min 1/2 x'H_g x + c_g'x + E F(x, xi)`` over
``{1'x = D_bar, delta <= x <= (1 - delta) Cap}``.  Second stage, with
``y = (u+, u-, a+, a-, s, v)``::

    F(x, xi) = min 1/2 y'Qy   s.t.  Wy = h(xi) - Tx,  y >= 0.

With the Lagrangian ``1/2 y'Qy + pi'(Wy - h + Tx) - y's`` the gradient is
``T'pi`` without a sign flip.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import rng as rngmod
from ..oracles import ProblemMetadata, StochasticProblem
from ..prox import BoxHyperplaneIndicator, project_dispatch_simplex
from ..qp import QpError, QpProblem, solve_qp


@dataclass(frozen=True, eq=False)
class DispatchInstance:
    n: int
    H_diag: np.ndarray
    c_g: np.ndarray
    cap: np.ndarray
    D_bar: float
    delta: float
    c_u: np.ndarray
    c_d: np.ndarray
    c_s: float
    c_v: float
    sigma: float
    Q: np.ndarray = field(init=False, repr=False)
    W: np.ndarray = field(init=False, repr=False)
    T: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = self.n
        Q = np.concatenate([self.c_u, self.c_d, 1e-4 * self.c_u, 1e-4 * self.c_d, [self.c_s, self.c_v]])
        I, Z = np.eye(n), np.zeros((n, n))
        one, zero = np.ones((1, n)), np.zeros((1, n))
        W = np.block([
            [one, -one, zero, zero, np.ones((1, 1)), -np.ones((1, 1))],
            [I, Z, I, Z, np.zeros((n, 1)), np.zeros((n, 1))],
            [Z, -I, Z, -I, np.zeros((n, 1)), np.zeros((n, 1))],
        ])
        T = np.vstack([one, I, I])
        for name, val in (("Q", Q), ("W", W), ("T", T)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def m(self) -> int:
        return 4 * self.n + 2

    @property
    def lo(self) -> np.ndarray:
        return np.full(self.n, self.delta)

    @property
    def hi(self) -> np.ndarray:
        return (1.0 - self.delta) * self.cap

    def h(self, demand: float) -> np.ndarray:
        return np.concatenate([[demand], self.cap, np.zeros(self.n)])

    def feasible_set(self) -> BoxHyperplaneIndicator:
        return BoxHyperplaneIndicator(self.D_bar, self.lo, self.hi)

    def first_stage(self, x) -> tuple[float, np.ndarray]:
        Hx = self.H_diag * x
        return 0.5 * float(x @ Hx) + float(self.c_g @ x), Hx + self.c_g

    def scaled(self, lam: float) -> "DispatchInstance":
        """Same instance with every second-stage cost multiplied by ``lam``."""
        return DispatchInstance(
            self.n, self.H_diag, self.c_g, self.cap, self.D_bar, self.delta,
            lam * self.c_u, lam * self.c_d, lam * self.c_s, lam * self.c_v, self.sigma,
        )


def make_dispatch_instance(n: int, seed: int = 0, sigma: float = 5.0, delta: float = 0.1) -> DispatchInstance:
    if n < 1:
        raise ValueError("n must be positive")
    g = rngmod.stream(seed, rngmod.INSTANCE)
    return DispatchInstance(
        n=n,
        H_diag=g.uniform(-1.0, 1.0, n),
        c_g=np.ones(n),
        cap=5.0 + 0.2 * np.arange(1, n + 1),
        D_bar=4.0 * n,
        delta=delta,
        c_u=np.full(n, 2.0),
        c_d=np.full(n, 2.0),
        c_s=20.0 * n,
        c_v=10.0 * n,
        sigma=sigma,
    )


def dispatch_feasible_start(inst: DispatchInstance, x, demand: float) -> np.ndarray:
    """Second-stage point with no redispatch; balance is closed by shedding or spillage."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > inst.cap):
        raise ValueError("x violates 0 <= x <= Cap, second stage is infeasible")
    n = inst.n
    gap = demand - float(x.sum())
    y = np.zeros(inst.m)
    y[2 * n:3 * n] = inst.cap - x
    y[3 * n:4 * n] = x
    y[4 * n] = max(gap, 0.0)
    y[4 * n + 1] = max(-gap, 0.0)
    return y


def dispatch_second_stage(inst: DispatchInstance, x, demand: float, return_solution: bool = False):
    """Optimal value, equality dual and primal of the recourse QP."""
    x = np.asarray(x, dtype=float)
    b = inst.h(demand) - inst.T @ x
    prob = QpProblem(inst.Q, inst.W, b)
    try:
        sol = solve_qp(prob, dispatch_feasible_start(inst, x, demand))
    except QpError as exc:
        exc.info.update({"x": x.copy(), "demand": demand, "n": inst.n})
        raise
    if return_solution:
        return sol.value, sol.pi, sol.y, sol
    return sol.value, sol.pi, sol.y


def dispatch_initial_point(inst: DispatchInstance, tol: float = 1e-6, max_iter: int = 100_000) -> np.ndarray:
    """Stationary point of the recourse-free first stage by projected gradient.

    The step is ``1 / max|H_g|`` capped at 1, and the stopping test uses the
    unit-step residual.  ``H_g`` is indefinite, so this is a local solution.
    """
    lo, hi = inst.lo, inst.hi
    x = project_dispatch_simplex(np.zeros(inst.n), inst.D_bar, lo, hi)
    L = float(np.abs(inst.H_diag).max(initial=0.0))
    step = 1.0 if L <= 1.0 else 1.0 / L
    for _ in range(max_iter):
        _, g = inst.first_stage(x)
        if np.linalg.norm(x - project_dispatch_simplex(x - g, inst.D_bar, lo, hi)) <= tol:
            return x
        x = project_dispatch_simplex(x - step * g, inst.D_bar, lo, hi)
    raise RuntimeError(f"projected gradient did not reach residual {tol} in {max_iter} iterations")


class DispatchProblem(StochasticProblem):
    """Expected recourse plus first-stage cost; ``xi`` is the realised demand."""

    analytic = False

    def __init__(self, inst: DispatchInstance):
        self.inst = inst
        self.metadata = ProblemMetadata(dimension=inst.n)
        self._x0 = None

    @classmethod
    def build(cls, n: int, seed: int = 0) -> "DispatchProblem":
        return cls(make_dispatch_instance(n, seed))

    def default_regularizer(self):
        return self.inst.feasible_set()

    def default_start(self):
        if self._x0 is None:
            self._x0 = dispatch_initial_point(self.inst)
        return self._x0.copy()

    def sample(self, rng, size):
        """Normal demand truncated to ``D_bar +- 3 sigma`` by rejection."""
        mu, sd = self.inst.D_bar, self.inst.sigma
        if sd == 0:
            return np.full(size, mu)
        out = np.empty(0)
        while out.size < size:
            draw = rng.normal(mu, sd, size)
            out = np.concatenate([out, draw[np.abs(draw - mu) <= 3.0 * sd]])
        return out[:size]

    def in_domain(self, x):
        return bool(np.all(x >= 0) and np.all(x <= self.inst.cap))

    def batch_value_grad(self, x, samples):
        x = np.asarray(x, dtype=float)
        value, grad = self.inst.first_stage(x)
        Fs = 0.0
        pis = np.zeros(2 * self.inst.n + 1)
        for d in np.asarray(samples, dtype=float):
            F, pi, _ = dispatch_second_stage(self.inst, x, float(d))
            Fs += F
            pis += pi
        N = len(samples)
        return value + Fs / N, grad + self.inst.T.T @ (pis / N)
