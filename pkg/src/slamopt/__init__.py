"""Stochastic Armijo linesearch with periodic step resets (SLAM) and its harness."""

from .linesearch import (
    LinesearchConfig,
    LinesearchError,
    LinesearchState,
    armijo_convex,
    armijo_nonconvex,
    backtrack,
    initial_step,
)
from .oracles import (
    DomainError,
    ProblemMetadata,
    SampleBatch,
    SampledFunctions,
    StochasticProblem,
    draw_batch,
    sampled_pair,
    true_metrics,
)
from .prox import (
    BoxHyperplaneIndicator,
    BoxIndicator,
    InfeasibleSetError,
    L1Regularizer,
    NonnegIndicator,
    Regularizer,
    ZeroRegularizer,
    project_dispatch_simplex,
    prox_eval,
    residual,
)
from .qp import QpDegenerateError, QpError, QpProblem, QpSolution, kkt_residual, solve_qp
from .schedules import BatchSchedule, CycleSchedule, batch_sum_bound, cycle_count, t_change_cap
from .solvers import (
    RunConfig,
    RunTrace,
    SOLVERS,
    TRACE_COLUMNS,
    UnsupportedConfigurationError,
    pick_random_index,
    run,
    run_adam,
    run_sgd,
    run_slam,
    run_slam_convex,
    run_sls0,
)

__version__ = "0.1.0"
