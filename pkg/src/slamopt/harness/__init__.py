"""Experiment harness: configuration, tuning, runs, CSV output and plots."""

from .config import ExperimentSpec, SolverSpec, build_spec, load_spec, parse_batch, parse_period
from .io import Aggregate, aggregate, read_trace_csv, write_aggregate_csv, write_trace_csv
from .plotting import emit_plot_data, render_png
from .runner import ExperimentResult, run_experiment
from .tuning import TUNING_GRID, TuningError, TuningReport, tune

__all__ = [
    "Aggregate", "ExperimentResult", "ExperimentSpec", "SolverSpec", "TUNING_GRID", "TuningError",
    "TuningReport", "aggregate", "build_spec", "emit_plot_data", "load_spec", "parse_batch",
    "parse_period", "read_trace_csv", "render_png", "run_experiment", "tune", "write_aggregate_csv",
    "write_trace_csv",
]
