"""Stochastic Rosenbrock function with multiplicative coupling noise."""

from __future__ import annotations

import numpy as np

from ..oracles import ProblemMetadata, StochasticProblem


def _parts(x):
    """Coupling term ``sum (x_{i+1} - x_i^2)^2``, fit term and their gradients."""
    u = x[1:] - x[:-1] ** 2
    v = 1.0 - x[:-1]
    A = float(u @ u)
    B = float(v @ v)
    gA = np.zeros_like(x)
    gA[1:] += 2.0 * u
    gA[:-1] -= 4.0 * x[:-1] * u
    gB = np.zeros_like(x)
    gB[:-1] = -2.0 * v
    return A, B, gA, gB


def rosenbrock_true(x: np.ndarray) -> tuple[float, np.ndarray]:
    """Noise-free value and gradient of ``sum 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("Rosenbrock needs a vector with n >= 2")
    A, B, gA, gB = _parts(x)
    return 100.0 * A + B, 100.0 * gA + gB


class RosenbrockProblem(StochasticProblem):
    """``F(x, xi) = sum (100 + xi)(x_{i+1} - x_i^2)^2 + (1 - x_i)^2``, ``xi ~ N(0, noise^2)``.

    The noise enters linearly, so the batch mean only needs the mean of the
    scenarios and ``E F = f``.
    """

    analytic = True

    def __init__(self, n: int, noise: float = 10.0, start: float = 6.0):
        if n < 2:
            raise ValueError("n must be >= 2")
        if noise < 0:
            raise ValueError("noise must be non-negative")
        self.n = int(n)
        self.noise = float(noise)
        self.start = float(start)
        self.metadata = ProblemMetadata(dimension=self.n, phi_inf=0.0)

    def default_start(self):
        return np.full(self.n, self.start)

    def sample(self, rng, size):
        if self.noise == 0:
            return np.zeros(size)
        return rng.normal(0.0, self.noise, size)

    def batch_value_grad(self, x, samples):
        A, B, gA, gB = _parts(np.asarray(x, dtype=float))
        w = 100.0 + float(np.mean(samples))
        return w * A + B, w * gA + gB

    def true_value_grad(self, x):
        return rosenbrock_true(x)

    def __repr__(self):
        return f"RosenbrockProblem(n={self.n}, noise={self.noise})"
