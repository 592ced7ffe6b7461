"""Test problems and a name-based factory used by the harness."""

from __future__ import annotations

import numpy as np

from .dispatch import (
    DispatchInstance,
    DispatchProblem,
    dispatch_feasible_start,
    dispatch_initial_point,
    dispatch_second_stage,
    make_dispatch_instance,
)
from .libsvm import LibSVMData, LibSVMParseError, dump_libsvm, load_libsvm, parse_libsvm
from .logreg import LogRegProblem, bundled_dataset
from .quadratic import FiniteSumLeastSquares, QuadraticProblem, noisy_quadratic, rotated_hessian
from .rosenbrock import RosenbrockProblem, rosenbrock_true

PROBLEM_KINDS = ("rosenbrock", "logreg", "quadratic", "dispatch")


def make_problem(kind: str, n: int | None = None, seed: int = 0, **params):
    """Build a problem from a descriptor such as ``{"kind": "rosenbrock", "n": 2}``."""
    if kind == "rosenbrock":
        return RosenbrockProblem(n or 2, noise=params.get("noise", 10.0), start=params.get("start", 6.0))
    if kind == "dispatch":
        return DispatchProblem.build(n or 3, seed)
    if kind == "logreg":
        path = params.get("path")
        data = load_libsvm(path) if path else bundled_dataset(params.get("dataset", "synthetic"))
        start = np.random.default_rng(seed).normal(0.0, 1.0, data.X.shape[1])
        return LogRegProblem(data, lam=params.get("lam", 0.001), start=start)
    if kind == "quadratic":
        n = n or 10
        lo, hi = params.get("eig_min", 1.0), params.get("eig_max", 10.0)
        return noisy_quadratic(n, np.linspace(lo, hi, n), params.get("sigma", 1.0), seed,
                               start=np.full(n, params.get("start", 1.0)))
    raise ValueError(f"unknown problem kind {kind!r}; expected one of {PROBLEM_KINDS}")


__all__ = [
    "DispatchInstance", "DispatchProblem", "FiniteSumLeastSquares", "LibSVMData", "LibSVMParseError",
    "LogRegProblem", "PROBLEM_KINDS", "QuadraticProblem", "RosenbrockProblem", "bundled_dataset",
    "dispatch_feasible_start", "dispatch_initial_point", "dispatch_second_stage", "dump_libsvm",
    "load_libsvm", "make_dispatch_instance", "make_problem", "noisy_quadratic", "parse_libsvm",
    "rosenbrock_true", "rotated_hessian",
]
