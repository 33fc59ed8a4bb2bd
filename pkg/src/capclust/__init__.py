"""Capacitated, constrained spatial clustering and location-allocation.

Minimizes weighted point-to-center distances plus outlier, opening-cost
and center-release penalties under membership and capacity constraints,
by block coordinate descent with exact allocation subproblem solvers.
"""

from . import errors
from .allocation import allocate, allocate_fractional, allocate_hard, allocate_uncapacitated
from .datagen import GenSpec, generate_dataset, sample_gamma_copula_cluster
from .evaluation import adjusted_rand_index, distance_summary, solution_labels
from .location import (
    decide_release,
    update_center_continuous,
    update_center_discrete,
    weiszfeld,
)
from .metrics import (
    MetricSpec,
    distance,
    euclidean,
    manhattan,
    matrix_metric,
    pairwise_costs,
    sqeuclidean,
    threshold,
)
from .model import (
    Assignment,
    CenterSpec,
    ObjectiveBreakdown,
    Point,
    Problem,
    Solution,
    evaluate_objective,
    validate_problem,
)
from .selection import SweepReport, aic_bic_lambda, sweep_k
from .solver import SolverConfig, descend, kmeanspp_init, solve

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "CenterSpec",
    "GenSpec",
    "MetricSpec",
    "ObjectiveBreakdown",
    "Point",
    "Problem",
    "Solution",
    "SolverConfig",
    "SweepReport",
    "adjusted_rand_index",
    "aic_bic_lambda",
    "allocate",
    "allocate_fractional",
    "allocate_hard",
    "allocate_uncapacitated",
    "decide_release",
    "descend",
    "distance",
    "distance_summary",
    "errors",
    "euclidean",
    "evaluate_objective",
    "generate_dataset",
    "kmeanspp_init",
    "manhattan",
    "matrix_metric",
    "pairwise_costs",
    "sample_gamma_copula_cluster",
    "solution_labels",
    "solve",
    "sqeuclidean",
    "sweep_k",
    "threshold",
    "update_center_continuous",
    "update_center_discrete",
    "validate_problem",
    "weiszfeld",
]
