"""Dense primal active-set solver for ``min 1/2 y'Qy  s.t.  Wy = b, y >= 0``.

Multipliers follow the Lagrangian ``1/2 y'Qy + pi'(Wy - b) - y's``, so an
optimal triple satisfies::

    Q y + W' pi - s = 0,   W y = b,   y >= 0,   s >= 0,   y's = 0.

``Q`` may be passed as a vector, in which case it is the diagonal and the
working-set systems are solved through the ``p x p`` Schur complement
``W_F Q_F^{-1} W_F'`` instead of the full bordered matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class QpError(RuntimeError):
    """Solver failure; ``info`` carries the instance and the last state."""

    def __init__(self, msg, info=None):
        super().__init__(msg)
        self.info = info or {}


class QpDegenerateError(QpError):
    """Singular working-set system (LICQ fails on the current working set)."""


@dataclass(frozen=True)
class QpProblem:
    Q: np.ndarray
    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        W = np.asarray(self.W, dtype=float)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        m = Q.shape[0]
        if W.size == 0:
            W = np.zeros((0, m))
        if W.ndim != 2 or W.shape[1] != m or W.shape[0] != b.size:
            raise ValueError(f"inconsistent shapes Q{Q.shape} W{W.shape} b{b.shape}")
        if Q.ndim == 1:
            if np.any(Q <= 0):
                raise ValueError("diagonal Q must be positive")
        elif Q.shape != (m, m) or not np.allclose(Q, Q.T):
            raise ValueError("Q must be symmetric")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.Q.shape[0]

    @property
    def p(self) -> int:
        return self.W.shape[0]

    @property
    def diagonal(self) -> bool:
        return self.Q.ndim == 1

    def Qdot(self, y):
        return self.Q * y if self.diagonal else self.Q @ y

    def objective(self, y) -> float:
        return 0.5 * float(y @ self.Qdot(y))

    def check(self):
        """Full validation: positive definiteness and full row rank of W."""
        if not self.diagonal and np.linalg.eigvalsh(self.Q).min() <= 0:
            raise ValueError("Q is not positive definite")
        if self.p and np.linalg.matrix_rank(self.W) < self.p:
            raise ValueError("W does not have full row rank")


@dataclass
class QpSolution:
    y: np.ndarray
    pi: np.ndarray
    s: np.ndarray
    active: np.ndarray
    iterations: int
    status: str = "optimal"

    @property
    def value(self) -> float:
        return self._value

    def with_value(self, v):
        self._value = float(v)
        return self


def _solve_working_set(prob: QpProblem, free: np.ndarray):
    """Minimiser of the objective on ``{Wy = b, y_i = 0 for i not free}``."""
    m, p = prob.m, prob.p
    y = np.zeros(m)
    if p == 0:
        return y, np.zeros(0)
    WF = prob.W[:, free]
    if WF.shape[1] < p:
        raise QpDegenerateError("fewer free variables than equality rows")
    if prob.diagonal:
        dinv = 1.0 / prob.Q[free]
        S = (WF * dinv) @ WF.T
        try:
            c = scipy.linalg.cho_factor(S, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise QpDegenerateError("working-set Schur complement is singular") from exc
        if np.min(np.abs(np.diag(c[0]))) <= 1e-10 * np.sqrt(np.max(np.abs(np.diag(S)))):
            raise QpDegenerateError("working-set Schur complement is singular")
        pi = -scipy.linalg.cho_solve(c, prob.b, check_finite=False)
        y[free] = -dinv * (WF.T @ pi)
        return y, pi
    nf = int(free.sum())
    QF = prob.Q[np.ix_(free, free)]
    K = np.block([[QF, WF.T], [WF, np.zeros((p, p))]])
    rhs = np.concatenate([np.zeros(nf), prob.b])
    try:
        sol = scipy.linalg.solve(K, rhs, assume_a="sym", check_finite=False)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise QpDegenerateError("working-set KKT matrix is singular") from exc
    if np.linalg.cond(K) > 1e13:
        raise QpDegenerateError("working-set KKT matrix is numerically singular")
    y[free] = sol[:nf]
    return y, sol[nf:]


def _rank(M) -> int:
    return int(np.linalg.matrix_rank(M)) if M.size else 0


def _initial_working_set(prob: QpProblem, y: np.ndarray) -> np.ndarray:
    """Bounds active at ``y`` minus enough of them to keep ``W_F`` full rank."""
    fixed = y == 0.0
    if prob.p == 0:
        return fixed
    rank = _rank(prob.W[:, ~fixed])
    for i in np.flatnonzero(fixed):
        if rank == prob.p:
            return fixed
        fixed[i] = False
        r = _rank(prob.W[:, ~fixed])
        if r > rank:
            rank = r
        else:
            fixed[i] = True
    if rank == prob.p:
        return fixed
    raise QpDegenerateError("W does not have full row rank")


def solve_qp(
    prob: QpProblem,
    y_start: np.ndarray,
    max_iter: int | None = None,
    mult_tol: float = 1e-9,
    feas_tol: float = 1e-10,
) -> QpSolution:
    """Primal active-set method from a feasible ``y_start``.

    Each iteration minimises over the current working set; a blocking bound
    found by the ratio test is added, otherwise the bound with the most
    negative multiplier is released.  Ties go to the lowest index.
    """
    y = np.array(y_start, dtype=float, copy=True)
    m = prob.m
    if y.shape != (m,):
        raise ValueError(f"y_start must have shape ({m},)")
    scale = 1.0 + np.abs(prob.b).max(initial=0.0)
    if np.any(y < 0) or (prob.p and np.abs(prob.W @ y - prob.b).max() > feas_tol * scale):
        raise QpError("y_start is not feasible", {"y_start": y, "problem": prob})
    max_iter = 50 * m if max_iter is None else max_iter

    fixed = _initial_working_set(prob, y)
    y[fixed] = 0.0
    released: list[int] = []
    for it in range(1, max_iter + 1):
        try:
            y_ws, pi = _solve_working_set(prob, ~fixed)
        except QpDegenerateError as exc:
            exc.info.update({"problem": prob, "y": y, "fixed": fixed.copy(), "iteration": it})
            raise
        step = y_ws - y
        # the Schur route carries cond(W_F)^2 round-off into the step
        step_tol = 1e-10 * (1.0 + np.abs(y).max(initial=0.0))
        if np.abs(step).max(initial=0.0) <= step_tol:
            y = y_ws
            s = prob.Qdot(y) + prob.W.T @ pi
            s[~fixed] = 0.0
            cand = np.flatnonzero(fixed & (s < -mult_tol))
            if cand.size == 0:
                y[fixed] = 0.0
                y = np.maximum(y, 0.0)
                return QpSolution(y, pi, s, np.flatnonzero(fixed), it).with_value(prob.objective(y))
            smin = s[cand].min()
            drop = int(cand[s[cand] == smin][0])
            fixed[drop] = False
            released.append(drop)
            continue
        dec = np.flatnonzero(~fixed & (step < -step_tol))
        alpha, block = 1.0, -1
        if dec.size:
            ratios = y[dec] / -step[dec]
            rmin = ratios.min()
            if rmin < 1.0:
                alpha = max(rmin, 0.0)
                block = int(dec[ratios <= rmin][0])
        if block < 0:
            y = y_ws
        else:
            y = y + alpha * step
            y[block] = 0.0
            fixed[block] = True
        y[fixed] = 0.0
    raise QpError(
        f"active-set iteration limit {max_iter} reached",
        {"problem": prob, "y": y, "fixed": fixed, "released": released[-10:]},
    )


def kkt_residual(prob: QpProblem, sol: QpSolution) -> float:
    """Largest violation among stationarity, feasibility, sign and complementarity."""
    y, pi, s = sol.y, sol.pi, sol.s
    parts = [
        np.abs(prob.Qdot(y) + prob.W.T @ pi - s).max(initial=0.0),
        np.abs(prob.W @ y - prob.b).max(initial=0.0) if prob.p else 0.0,
        np.abs(y * s).max(initial=0.0),
        max(-y.min(initial=0.0), 0.0),
        max(-s.min(initial=0.0), 0.0),
    ]
    return float(max(parts))
