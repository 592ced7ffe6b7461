"""Regularizers, proximal maps and the prox-gradient residual."""

from __future__ import annotations

import math

import numpy as np


class InfeasibleSetError(ValueError):
    """The box-hyperplane intersection is empty."""


class Regularizer:
    """A proper closed convex ``r`` with a closed-form prox.

    ``lipschitz`` is the Lipschitz constant of ``r`` over ``dom r`` in the
    Euclidean norm.  Indicators are constant on their domain, so it is 0.
    """

    name = "regularizer"

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def prox(self, x: np.ndarray, t: float) -> np.ndarray:
        raise NotImplementedError

    def lipschitz(self, n: int) -> float:
        return 0.0

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        return math.isfinite(self.value(x))

    def __repr__(self):
        return f"{type(self).__name__}()"


class ZeroRegularizer(Regularizer):
    name = "zero"

    def value(self, x):
        return 0.0

    def prox(self, x, t):
        return np.array(x, dtype=float, copy=True)


class L1Regularizer(Regularizer):
    """``lam * ||x||_1``; prox is soft thresholding."""

    name = "l1"

    def __init__(self, lam: float):
        if lam < 0:
            raise ValueError("lam must be non-negative")
        self.lam = float(lam)

    def value(self, x):
        return self.lam * float(np.abs(x).sum())

    def prox(self, x, t):
        x = np.asarray(x, dtype=float)
        return np.sign(x) * np.maximum(np.abs(x) - t * self.lam, 0.0)

    def lipschitz(self, n):
        return self.lam * math.sqrt(n)

    def __repr__(self):
        return f"L1Regularizer(lam={self.lam})"


class BoxIndicator(Regularizer):
    """Indicator of ``{lo <= x <= hi}``."""

    name = "box"

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        if np.any(self.lo > self.hi):
            raise InfeasibleSetError("box has lo > hi")

    def value(self, x):
        return 0.0 if self.contains(x) else math.inf

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def prox(self, x, t):
        return np.clip(np.asarray(x, dtype=float), self.lo, self.hi)

    def __repr__(self):
        return f"BoxIndicator(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


class NonnegIndicator(Regularizer):
    name = "nonneg"

    def value(self, x):
        return 0.0 if self.contains(x) else math.inf

    def contains(self, x, tol=1e-9):
        return bool(np.all(np.asarray(x) >= -tol))

    def prox(self, x, t):
        return np.maximum(np.asarray(x, dtype=float), 0.0)


class BoxHyperplaneIndicator(Regularizer):
    """Indicator of ``{x : sum(x) = total, lo <= x <= hi}``."""

    name = "box_hyperplane"

    def __init__(self, total: float, lo, hi):
        self.total = float(total)
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        _check_box_hyperplane(self.total, self.lo, self.hi)

    def value(self, x):
        return 0.0 if self.contains(x) else math.inf

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        scale = max(1.0, abs(self.total))
        return bool(
            np.all(x >= self.lo - tol)
            and np.all(x <= self.hi + tol)
            and abs(x.sum() - self.total) <= tol * scale
        )

    def prox(self, x, t):
        return project_dispatch_simplex(x, self.total, self.lo, self.hi)

    def __repr__(self):
        return f"BoxHyperplaneIndicator(total={self.total}, n={self.lo.size})"


def prox_eval(r: Regularizer, x: np.ndarray, t: float) -> np.ndarray:
    """``argmin_y r(y) + ||y - x||^2 / (2t)``."""
    if not t > 0:
        raise ValueError(f"prox step must be positive, got {t}")
    return r.prox(np.asarray(x, dtype=float), t)


def residual(x: np.ndarray, t: float, grad: np.ndarray, r: Regularizer) -> np.ndarray:
    """Prox-gradient residual ``(x - prox_{t r}(x - t grad)) / t``.

    With the true gradient this is ``G_t(x)``; with a mini-batch gradient it
    is the sampled residual used in the linesearch analysis.
    """
    if not t > 0:
        raise ValueError(f"step must be positive, got {t}")
    x = np.asarray(x, dtype=float)
    return (x - r.prox(x - t * np.asarray(grad, dtype=float), t)) / t


def _check_box_hyperplane(total, lo, hi):
    if lo.shape != hi.shape or lo.ndim != 1:
        raise ValueError("lo and hi must be vectors of equal length")
    if np.any(lo > hi):
        raise InfeasibleSetError("box has lo > hi")
    if lo.sum() > total or hi.sum() < total:
        raise InfeasibleSetError(
            f"sum(lo)={lo.sum():g} <= total={total:g} <= sum(hi)={hi.sum():g} violated"
        )


def project_dispatch_simplex(x, total, lo, hi, tol: float = 1e-12) -> np.ndarray:
    """Euclidean projection onto ``{sum(y) = total, lo <= y <= hi}``.

    The projection is ``clip(x - lam, lo, hi)`` where ``lam`` is the root of
    the non-increasing map ``lam -> sum(clip(x - lam, lo, hi)) - total``.  The
    root is bracketed by ``[min(x - hi), max(x - lo)]`` and bisected down to
    width ``tol``; the multiplier is then recomputed in closed form on the
    identified free set so that the hyperplane holds to rounding.
    """
    x = np.asarray(x, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    total = float(total)
    _check_box_hyperplane(total, lo, hi)

    if np.all(x >= lo) and np.all(x <= hi) and abs(x.sum() - total) <= 4 * np.finfo(float).eps * max(1.0, abs(total)) * x.size:
        return x.copy()

    def excess(lam):
        return np.clip(x - lam, lo, hi).sum() - total

    a = float(np.min(x - hi))
    b = float(np.max(x - lo))
    # excess(a) >= 0 >= excess(b)
    while b - a > tol * max(1.0, abs(a), abs(b)):
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if excess(mid) > 0:
            a = mid
        else:
            b = mid
    lam = 0.5 * (a + b)

    z = x - lam
    at_lo = z <= lo
    at_hi = z >= hi
    free = ~(at_lo | at_hi)
    if free.any():
        fixed = lo[at_lo].sum() + hi[at_hi].sum()
        lam_exact = (x[free].sum() + fixed - total) / free.sum()
        z2 = x - lam_exact
        # keep the polished multiplier only if it preserves the active pattern
        slack = 1e-12 * max(1.0, float(np.abs(z).max()))
        if (
            np.all(z2[free] >= lo[free] - slack)
            and np.all(z2[free] <= hi[free] + slack)
            and np.all(z2[at_lo] <= lo[at_lo] + slack)
            and np.all(z2[at_hi] >= hi[at_hi] - slack)
        ):
            lam = lam_exact
    return np.clip(x - lam, lo, hi)
