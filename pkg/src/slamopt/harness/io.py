"""CSV persistence for traces and per-solver aggregates.

Files use ``,`` separators, ``.`` decimals, LF line endings and ``repr``
floats, so identical runs give byte-identical files.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..solvers import TRACE_COLUMNS, RunTrace

AGG_METRICS = ("t_k", "f_batch", "f_est", "resid_sq_est")
AGG_HEADER = ("k", "runs", "N_k", "samples_cum") + tuple(
    f"{m}_{s}" for m in AGG_METRICS for s in ("mean", "std")
)
_INT_COLUMNS = {"seed", "k", "N_k", "backtracks", "step_changed", "samples_cum", "runs"}


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_rows(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def read_rows(path) -> tuple[list[str], list[dict]]:
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [
            {h: (int(v) if h in _INT_COLUMNS else float(v)) for h, v in zip(header, line)}
            for line in r
        ]
    return header, rows


TRACE_HEADER = ("seed",) + TRACE_COLUMNS


def write_trace_csv(path, trace: RunTrace) -> None:
    cols = [trace[c] for c in TRACE_COLUMNS]
    rows = ((trace.seed,) + tuple(c[i] for c in cols) for i in range(len(trace)))
    write_rows(path, TRACE_HEADER, rows)


def read_trace_csv(path) -> dict:
    header, rows = read_rows(path)
    if tuple(header) != TRACE_HEADER:
        raise ValueError(f"unexpected trace header {header}")
    return {h: np.array([r[h] for r in rows]) for h in header}


@dataclass
class Aggregate:
    """Mean and sample std over seeds at each ``k`` present in at least one run."""

    solver: str
    k: np.ndarray
    runs: np.ndarray
    N_k: np.ndarray
    samples_cum: np.ndarray
    mean: dict
    std: dict

    def rows(self):
        for i in range(len(self.k)):
            row = [self.k[i], self.runs[i], self.N_k[i], self.samples_cum[i]]
            for m in AGG_METRICS:
                row += [self.mean[m][i], self.std[m][i]]
            yield tuple(row)


def aggregate(solver: str, traces: list[RunTrace]) -> Aggregate:
    if not traces:
        raise ValueError(f"no traces to aggregate for {solver}")
    length = max(len(t) for t in traces)
    ks = np.arange(length)
    runs = np.array([sum(len(t) > k for t in traces) for k in ks], dtype=int)
    mean, std = {}, {}
    for m in AGG_METRICS:
        mu, sd = np.full(length, math.nan), np.full(length, math.nan)
        for k in ks:
            vals = np.array([t[m][k] for t in traces if len(t) > k])
            mu[k] = vals.mean()
            sd[k] = vals.std(ddof=1) if vals.size > 1 else 0.0
        mean[m], std[m] = mu, sd
    ref = max(traces, key=len)
    return Aggregate(solver, ks, runs, ref["N_k"].copy(), ref["samples_cum"].copy(), mean, std)


def write_aggregate_csv(path, agg: Aggregate) -> None:
    write_rows(path, AGG_HEADER, agg.rows())
