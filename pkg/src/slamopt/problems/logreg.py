"""Ridge-regularised logistic regression over a finite data set."""

from __future__ import annotations

from importlib import resources

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import svds
from scipy.special import expit

from ..oracles import ProblemMetadata, StochasticProblem
from .libsvm import LibSVMData, parse_libsvm


class LogRegProblem(StochasticProblem):
    """``f(x) = (1/m) sum log(1 + exp(-y_i a_i'x)) + lam ||x||^2``.

    A scenario is a row index drawn uniformly with replacement.
    """

    analytic = True

    def __init__(self, data: LibSVMData, lam: float = 0.001, start=None):
        self.X = sp.csr_matrix(data.X, dtype=float)
        self.y = np.asarray(data.y, dtype=float)
        if not set(np.unique(self.y)) <= {-1.0, 1.0}:
            raise ValueError("labels must be in {-1, +1}")
        self.lam = float(lam)
        m, n = self.X.shape
        self._start = None if start is None else np.asarray(start, dtype=float)
        gram_max = _gram_norm(self.X)
        self.metadata = ProblemMetadata(dimension=n, L=gram_max / (4.0 * m) + 2.0 * self.lam)

    @property
    def m(self):
        return self.X.shape[0]

    def default_start(self):
        if self._start is not None:
            return self._start.copy()
        return super().default_start()

    def sample(self, rng, size):
        return rng.integers(0, self.m, size)

    def _value_grad(self, x, rows, y):
        z = -y * (rows @ x)
        N = rows.shape[0]
        value = float(np.logaddexp(0.0, z).sum()) / N + self.lam * float(x @ x)
        grad = rows.T @ (-y * expit(z)) / N + 2.0 * self.lam * x
        return value, np.asarray(grad).ravel()

    def batch_value_grad(self, x, samples):
        x = np.asarray(x, dtype=float)
        return self._value_grad(x, self.X[samples], self.y[samples])

    def true_value_grad(self, x):
        return self._value_grad(np.asarray(x, dtype=float), self.X, self.y)

    def sample_value_grad(self, x, i: int):
        """Single-row ``F(x, i)`` and its gradient."""
        return self._value_grad(np.asarray(x, dtype=float), self.X[[i]], self.y[[i]])


def _gram_norm(X) -> float:
    """Largest eigenvalue of ``X'X``."""
    m, n = X.shape
    if min(m, n) <= 2000:
        G = (X.T @ X).toarray() if n <= m else (X @ X.T).toarray()
        return float(np.linalg.eigvalsh(G)[-1]) if G.size else 0.0
    v0 = np.ones(min(m, n))
    return float(svds(X, k=1, v0=v0, return_singular_vectors=False)[0] ** 2)


def bundled_dataset(name: str = "synthetic") -> LibSVMData:
    ref = resources.files("slamopt").joinpath("data", f"{name}.svm")
    return parse_libsvm(ref.read_bytes())
