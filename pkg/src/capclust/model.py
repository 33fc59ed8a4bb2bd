"""Problem and solution representations plus exact objective evaluation.

The objective of a solution decomposes into four additive parts:

    total = sum_i sum_j w'_i d(x_i, c_j) y_ij      (distance)
          + lambda_o * sum_i w'_i y_i,outlier       (outliers)
          + lambda_k * k                            (opening cost)
          + lambda_f * t                            (released fixed centers)

where w'_i = w_i + gamma_i is the preference-corrected weight and t the
number of released fixed centers.  All types are immutable values after
construction; evaluation is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from . import metrics
from .errors import (
    CapacityWindowInverted,
    FixedCenterNotCandidate,
    KTooSmall,
    NegativeWeight,
    ShapeMismatch,
    ThresholdRequiresDiscrete,
    ValidationError,
)

HARD = "hard"
FRACTIONAL = "fractional"

NOISE_LABEL = -1


@dataclass(frozen=True)
class Point:
    """A weighted demand/data location.

    ``w`` is the demand mass entering the loss, ``gamma`` an extra
    preference weight that attracts centers, ``a`` the mass counted against
    capacity windows (defaults to ``w``), and ``q`` the number of centers
    the point must be assigned to.  Pseudo points encode prior information:
    they attract centers through ``gamma`` but carry no demand or capacity.
    """

    id: int
    coords: tuple[float, float] | None = None
    w: float = 1.0
    gamma: float = 0.0
    a: float | None = None
    q: int = 1
    pseudo: bool = False

    def __post_init__(self):
        if self.a is None:
            object.__setattr__(self, "a", self.w)
        if self.coords is not None:
            object.__setattr__(self, "coords", (float(self.coords[0]), float(self.coords[1])))

    @property
    def effective_weight(self) -> float:
        return self.w + self.gamma


@dataclass(frozen=True, eq=False)
class CenterSpec:
    """Placement rules for the k centers.

    ``fixed`` holds predetermined locations: coordinate pairs in continuous
    placement, candidate-site indices in discrete placement (coordinates are
    matched to sites during validation).  A fixed center may be released and
    relocated at cost ``release_penalty``; infinity means never releasable.
    """

    k: int
    placement: str = "continuous"
    candidates: np.ndarray | None = None
    fixed: tuple = ()
    release_penalty: float = math.inf

    def __post_init__(self):
        if self.candidates is not None:
            object.__setattr__(self, "candidates", np.asarray(self.candidates, dtype=float))
        object.__setattr__(self, "fixed", tuple(self.fixed))

    @property
    def n_fixed(self) -> int:
        return len(self.fixed)


@dataclass(frozen=True, eq=False)
class Problem:
    """A full clustering / location-allocation instance."""

    points: tuple[Point, ...]
    metric: metrics.MetricSpec
    centers: CenterSpec
    membership: str = HARD
    capacity: tuple[float, float] | None = None
    outlier_penalty: float | None = None
    opening_penalty: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def k(self) -> int:
        return self.centers.k

    @property
    def has_outlier_column(self) -> bool:
        return self.outlier_penalty is not None

    @cached_property
    def coords(self) -> np.ndarray | None:
        if any(p.coords is None for p in self.points):
            return None
        return np.array([p.coords for p in self.points], dtype=float)

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([p.w for p in self.points], dtype=float)

    @cached_property
    def effective_weights(self) -> np.ndarray:
        return np.array([p.w + p.gamma for p in self.points], dtype=float)

    @cached_property
    def capacity_coeffs(self) -> np.ndarray:
        return np.array([p.a for p in self.points], dtype=float)

    @cached_property
    def coverages(self) -> np.ndarray:
        return np.array([p.q for p in self.points], dtype=int)

    @cached_property
    def id_order(self) -> np.ndarray:
        """Permutation sorting points by id; fixes the summation order."""
        return np.array(sorted(range(self.n), key=lambda i: self.points[i].id), dtype=int)

    @cached_property
    def diameter(self) -> float:
        if self.coords is None or self.n == 0:
            return 1.0
        span = self.coords.max(axis=0) - self.coords.min(axis=0)
        return float(max(np.hypot(span[0], span[1]), 1e-300))


@dataclass(frozen=True)
class Assignment:
    """Membership matrix, one row per point.

    When the problem has an outlier penalty the last column is the outlier
    column and rows have k+1 entries; otherwise k entries.  Row sums equal
    each point's coverage q_i.
    """

    y: np.ndarray
    membership: str
    has_outlier: bool
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_centers(self) -> int:
        return self.y.shape[1] - (1 if self.has_outlier else 0)

    @property
    def outlier_column(self) -> np.ndarray:
        if not self.has_outlier:
            return np.zeros(self.y.shape[0])
        return self.y[:, -1]

    @property
    def center_block(self) -> np.ndarray:
        return self.y[:, : self.n_centers]

    def loads(self, capacity_coeffs: np.ndarray) -> np.ndarray:
        return capacity_coeffs @ self.center_block

    def row_sums(self) -> np.ndarray:
        return self.y.sum(axis=1)

    def hard_labels(self) -> np.ndarray:
        """Harden memberships to one label per point; outliers map to -1.

        Ties go to the lowest center index, and a center beats the outlier
        column at equal membership because the outlier column comes last.
        """
        labels = np.argmax(self.y, axis=1)
        if self.has_outlier:
            labels = np.where(labels == self.n_centers, NOISE_LABEL, labels)
        return labels


@dataclass(frozen=True)
class ObjectiveBreakdown:
    distance_term: float
    outlier_term: float
    opening_term: float
    release_term: float

    @property
    def total(self) -> float:
        return self.distance_term + self.outlier_term + self.opening_term + self.release_term


@dataclass(frozen=True)
class Solution:
    """Solver output: center locations, memberships, releases, objective.

    ``centers`` is a (k, 2) coordinate array in continuous placement or a
    length-k array of candidate-site indices in discrete placement.
    ``released`` holds indices of fixed centers moved away from their
    predetermined locations.
    """

    centers: np.ndarray
    assignment: Assignment
    released: frozenset[int]
    objective: ObjectiveBreakdown
    diagnostics: dict = field(default_factory=dict)


def validate_problem(problem: Problem) -> Problem:
    """Check structural invariants and return a normalized copy.

    Normalization turns fixed-center coordinates into candidate-site
    indices under discrete placement.  Effective weights are exposed as a
    computed property (never stored separately from w and gamma).
    """
    spec = problem.centers
    if spec.k < 1:
        raise ValidationError("k must be positive")
    for p in problem.points:
        if p.w < 0 or p.gamma < 0 or p.a < 0:
            raise NegativeWeight(f"point {p.id}: w, gamma and a must be nonnegative")
        if p.q < 1:
            raise ValidationError(f"point {p.id}: coverage q must be at least 1")
        if p.pseudo and (p.w != 0 or p.a != 0):
            raise ValidationError(f"pseudo point {p.id} must have w = 0 and a = 0")
    ids = [p.id for p in problem.points]
    if len(set(ids)) != len(ids):
        raise ValidationError("point ids must be unique")

    if problem.membership not in (HARD, FRACTIONAL):
        raise ValidationError(f"unknown membership mode: {problem.membership!r}")

    if problem.capacity is not None:
        lo, hi = problem.capacity
        if lo > hi:
            raise CapacityWindowInverted(f"capacity window [{lo}, {hi}] is inverted")
        if lo < 0:
            raise ValidationError("capacity lower limit must be nonnegative")

    if problem.outlier_penalty is not None and problem.outlier_penalty < 0:
        raise ValidationError("outlier penalty must be nonnegative")
    if problem.opening_penalty < 0:
        raise ValidationError("opening penalty must be nonnegative")

    if problem.metric.kind == metrics.THRESHOLD and spec.placement != "discrete":
        raise ThresholdRequiresDiscrete("threshold metric requires discrete placement")
    if problem.metric.kind == metrics.MATRIX and spec.placement != "discrete":
        raise ValidationError("distance-matrix metric requires discrete placement")

    if spec.placement == "discrete":
        if problem.metric.kind == metrics.MATRIX:
            n_sites = problem.metric.matrix.shape[1]
            if problem.metric.matrix.shape[0] != problem.n:
                raise ShapeMismatch(
                    f"cost matrix has {problem.metric.matrix.shape[0]} rows for {problem.n} points"
                )
        else:
            if spec.candidates is None:
                raise ValidationError("discrete placement needs candidate sites")
            n_sites = spec.candidates.shape[0]
        if n_sites < spec.k:
            raise ValidationError(f"{n_sites} candidate sites cannot host k={spec.k} centers")
    elif spec.placement != "continuous":
        raise ValidationError(f"unknown placement: {spec.placement!r}")

    if problem.metric.is_geometric or problem.metric.kind == metrics.THRESHOLD:
        if problem.coords is None:
            raise ValidationError("geometric metrics require point coordinates")

    if spec.n_fixed > spec.k:
        raise KTooSmall(f"k={spec.k} is smaller than the number of fixed centers ({spec.n_fixed})")
    if spec.release_penalty < 0:
        raise ValidationError("release penalty must be nonnegative")

    fixed = spec.fixed
    if spec.placement == "discrete" and fixed:
        resolved = []
        for f in fixed:
            if np.isscalar(f) or isinstance(f, (int, np.integer)):
                h = int(f)
                if not 0 <= h < n_sites:
                    raise FixedCenterNotCandidate(f"fixed site index {h} outside 0..{n_sites - 1}")
            else:
                if spec.candidates is None:
                    raise FixedCenterNotCandidate("fixed coordinates need candidate coordinates to match")
                d = np.abs(spec.candidates - np.asarray(f, dtype=float)).sum(axis=1)
                h = int(np.argmin(d))
                if d[h] > 1e-9:
                    raise FixedCenterNotCandidate(f"fixed location {f} is not a candidate site")
            resolved.append(h)
        if len(set(resolved)) != len(resolved):
            raise ValidationError("fixed centers must occupy distinct candidate sites")
        problem = replace(problem, centers=replace(spec, fixed=tuple(resolved)))
    elif fixed:
        coords = tuple((float(f[0]), float(f[1])) for f in fixed)
        problem = replace(problem, centers=replace(spec, fixed=coords))

    return problem


def _ordered_sum(problem: Problem, per_point: np.ndarray) -> float:
    # Pairwise summation over points sorted by id, for run-to-run determinism.
    return float(np.sum(per_point[problem.id_order]))


def evaluate_parts(problem: Problem, centers, assignment: Assignment, released) -> ObjectiveBreakdown:
    """Evaluate the decomposed objective for an explicit iterate."""
    k = problem.k
    expected_cols = k + (1 if problem.has_outlier_column else 0)
    if assignment.y.shape != (problem.n, expected_cols):
        raise ShapeMismatch(
            f"assignment shape {assignment.y.shape} does not match (n={problem.n}, columns={expected_cols})"
        )
    if len(centers) != k:
        raise ShapeMismatch(f"{len(centers)} centers for k={k}")
    if any(j >= problem.centers.n_fixed for j in released):
        raise ShapeMismatch("released set contains a non-fixed center index")

    costs = metrics.pairwise_costs(problem, centers)
    per_point = (costs * assignment.center_block).sum(axis=1)
    distance_term = _ordered_sum(problem, per_point)

    if problem.has_outlier_column:
        outlier_per_point = problem.effective_weights * assignment.outlier_column
        outlier_term = problem.outlier_penalty * _ordered_sum(problem, outlier_per_point)
    else:
        outlier_term = 0.0

    opening_term = problem.opening_penalty * k
    t = len(released)
    release_term = problem.centers.release_penalty * t if t else 0.0
    return ObjectiveBreakdown(distance_term, outlier_term, opening_term, release_term)


def evaluate_objective(problem: Problem, solution: Solution) -> ObjectiveBreakdown:
    """Exact evaluation of the decomposed objective for a solution."""
    return evaluate_parts(problem, solution.centers, solution.assignment, solution.released)
