"""Synthetic quadratics with known constants, used by the rate checks."""

from __future__ import annotations

import math

import numpy as np

from .. import rng as rngmod
from ..oracles import ProblemMetadata, StochasticProblem
from ..prox import BoxIndicator, BoxHyperplaneIndicator, Regularizer, ZeroRegularizer


class QuadraticProblem(StochasticProblem):
    """``F(x, xi) = 1/2 d'Hd + xi'd`` with ``d = x - center``.

    ``xi ~ N(0, (sigma^2/n) I)``, so the gradient noise of a batch of size
    ``N`` has expected squared norm exactly ``sigma^2 / N``.  ``H`` may be
    indefinite, in which case a bounded regularizer should be attached.
    """

    analytic = True

    def __init__(
        self,
        H: np.ndarray,
        center: np.ndarray | None = None,
        sigma: float = 0.0,
        regularizer: Regularizer | None = None,
        phi_inf: float | None = None,
        mu: float | None = None,
        start: np.ndarray | None = None,
    ):
        H = np.asarray(H, dtype=float)
        if H.ndim != 2 or H.shape[0] != H.shape[1] or not np.allclose(H, H.T):
            raise ValueError("H must be a symmetric matrix")
        n = H.shape[0]
        self.H = H
        self.center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
        self.sigma = float(sigma)
        self.regularizer = regularizer or ZeroRegularizer()
        self.eigenvalues = np.linalg.eigvalsh(H)
        self._start = None if start is None else np.asarray(start, dtype=float)
        if phi_inf is None and isinstance(self.regularizer, ZeroRegularizer) and self.eigenvalues[0] >= 0:
            phi_inf = 0.0
        if mu is None and isinstance(self.regularizer, ZeroRegularizer) and self.eigenvalues[0] > 0:
            mu = 2.0 * float(self.eigenvalues[0])
        self.metadata = ProblemMetadata(
            dimension=n,
            L=float(np.abs(self.eigenvalues).max()),
            sigma2=self.sigma**2,
            B_g=self._grad_bound(),
            L_r=self.regularizer.lipschitz(n),
            phi_inf=phi_inf,
            mu=mu,
        )

    def _grad_bound(self):
        r = self.regularizer
        if isinstance(r, (BoxIndicator, BoxHyperplaneIndicator)):
            lo = np.broadcast_to(r.lo, self.center.shape)
            hi = np.broadcast_to(r.hi, self.center.shape)
            reach = np.maximum(np.abs(lo - self.center), np.abs(hi - self.center))
            return float(np.abs(self.eigenvalues).max() * np.linalg.norm(reach))
        return None

    def default_regularizer(self):
        return self.regularizer

    def default_start(self):
        if self._start is not None:
            return self._start.copy()
        return super().default_start()

    def sample(self, rng, size):
        n = self.dim
        if self.sigma == 0:
            return np.zeros((size, n))
        return rng.normal(0.0, self.sigma / math.sqrt(n), (size, n))

    def batch_value_grad(self, x, samples):
        d = np.asarray(x, dtype=float) - self.center
        Hd = self.H @ d
        xi = samples.mean(axis=0)
        return 0.5 * float(d @ Hd) + float(xi @ d), Hd + xi

    def true_value_grad(self, x):
        d = np.asarray(x, dtype=float) - self.center
        Hd = self.H @ d
        return 0.5 * float(d @ Hd), Hd

    def in_domain(self, x):
        return True


def rotated_hessian(eigenvalues, seed: int) -> np.ndarray:
    """``U diag(eigenvalues) U'`` with ``U`` Haar-random from the instance stream."""
    ev = np.asarray(eigenvalues, dtype=float)
    g = rngmod.stream(seed, rngmod.INSTANCE)
    Z = g.standard_normal((ev.size, ev.size))
    U, R = np.linalg.qr(Z)
    U = U * np.sign(np.diag(R))
    H = (U * ev) @ U.T
    return 0.5 * (H + H.T)


def noisy_quadratic(
    n: int,
    eigenvalues,
    sigma: float,
    seed: int = 0,
    regularizer: Regularizer | None = None,
    center=None,
    start=None,
) -> QuadraticProblem:
    ev = np.asarray(eigenvalues, dtype=float)
    if ev.size != n:
        raise ValueError("need one eigenvalue per coordinate")
    return QuadraticProblem(rotated_hessian(ev, seed), center, sigma, regularizer, start=start)


class FiniteSumLeastSquares(StochasticProblem):
    """``f(x) = (1/2m) ||Ax - b||^2``; a scenario is a uniformly drawn row index."""

    analytic = True

    def __init__(self, A, b, regularizer: Regularizer | None = None, phi_inf: float | None = None,
                 start=None):
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        m, n = self.A.shape
        if self.b.shape != (m,):
            raise ValueError("b must have one entry per row of A")
        self.regularizer = regularizer or ZeroRegularizer()
        self._start = None if start is None else np.asarray(start, dtype=float)
        L = float(np.linalg.eigvalsh(self.A.T @ self.A / m).max())
        self.metadata = ProblemMetadata(dimension=n, L=L, L_r=self.regularizer.lipschitz(n), phi_inf=phi_inf)

    @property
    def m(self):
        return self.A.shape[0]

    def default_regularizer(self):
        return self.regularizer

    def default_start(self):
        if self._start is not None:
            return self._start.copy()
        return super().default_start()

    def sample(self, rng, size):
        return rng.integers(0, self.m, size)

    def batch_value_grad(self, x, samples):
        Ai = self.A[samples]
        res = Ai @ x - self.b[samples]
        N = len(samples)
        return 0.5 * float(res @ res) / N, Ai.T @ res / N

    def true_value_grad(self, x):
        res = self.A @ x - self.b
        return 0.5 * float(res @ res) / self.m, self.A.T @ res / self.m
