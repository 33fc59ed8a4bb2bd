import math

import numpy as np
import pytest
import hypothesis.strategies as st
from hypothesis import given, settings

from capclust import (
    Assignment, CenterSpec, Point, Problem, Solution, euclidean,
    matrix_metric, sqeuclidean, threshold, validate_problem,
)
from capclust.errors import (
    CapacityWindowInverted, FixedCenterNotCandidate, KTooSmall, NegativeWeight,
    ShapeMismatch, ThresholdRequiresDiscrete, ValidationError,
)
from capclust.model import ObjectiveBreakdown, evaluate_parts


def make_solution(problem, centers, y, released=frozenset()):
    assignment = Assignment(y=np.asarray(y, dtype=float), membership=problem.membership,
                            has_outlier=problem.has_outlier_column)
    objective = evaluate_parts(problem, centers, assignment, released)
    return Solution(centers=np.asarray(centers), assignment=assignment,
                    released=frozenset(released), objective=objective)


def test_inverted_capacity_window():
    with pytest.raises(CapacityWindowInverted):
        validate_problem(Problem(
            points=(Point(0, coords=(0, 0)),), metric=sqeuclidean(),
            centers=CenterSpec(k=1), capacity=(3.0, 2.0),
        ))


def test_threshold_requires_discrete():
    with pytest.raises(ThresholdRequiresDiscrete):
        validate_problem(Problem(
            points=(Point(0, coords=(0, 0)),), metric=threshold(1.0),
            centers=CenterSpec(k=1, placement="continuous"),
        ))


def test_matrix_requires_discrete():
    with pytest.raises(ValidationError):
        validate_problem(Problem(
            points=(Point(0, coords=(0, 0)),), metric=matrix_metric([[1.0]]),
            centers=CenterSpec(k=1, placement="continuous"),
        ))


def test_valid_instance_materializes_effective_weights():
    pts = (Point(0, coords=(0, 0), w=1.0, gamma=0.5),
           Point(1, coords=(1, 0), w=2.0),
           Point(2, coords=(0, 1), w=0.0, gamma=3.0, a=0.0, pseudo=True))
    prob = validate_problem(Problem(points=pts, metric=sqeuclidean(), centers=CenterSpec(k=1)))
    assert np.array_equal(prob.effective_weights, [1.5, 2.0, 3.0])
    assert prob.points[0].effective_weight == 1.5


def test_negative_weight_rejected():
    with pytest.raises(NegativeWeight):
        validate_problem(Problem(points=(Point(0, coords=(0, 0), w=-1.0),),
                                 metric=sqeuclidean(), centers=CenterSpec(k=1)))


def test_pseudo_point_must_carry_no_demand():
    with pytest.raises(ValidationError):
        validate_problem(Problem(points=(Point(0, coords=(0, 0), w=1.0, pseudo=True),),
                                 metric=sqeuclidean(), centers=CenterSpec(k=1)))


def test_k_smaller_than_fixed_centers():
    with pytest.raises(KTooSmall):
        validate_problem(Problem(
            points=(Point(0, coords=(0, 0)),), metric=sqeuclidean(),
            centers=CenterSpec(k=1, fixed=((0.0, 0.0), (1.0, 1.0))),
        ))


def test_fixed_center_must_be_candidate_site():
    with pytest.raises(FixedCenterNotCandidate):
        validate_problem(Problem(
            points=(Point(0, coords=(0, 0)),), metric=sqeuclidean(),
            centers=CenterSpec(k=1, placement="discrete",
                               candidates=[[0.0, 0.0], [1.0, 0.0]], fixed=((0.5, 0.5),)),
        ))


def test_fixed_coordinates_resolve_to_site_indices():
    prob = validate_problem(Problem(
        points=(Point(0, coords=(0, 0)),), metric=sqeuclidean(),
        centers=CenterSpec(k=1, placement="discrete",
                           candidates=[[0.0, 0.0], [1.0, 0.0]], fixed=((1.0, 0.0),)),
    ))
    assert prob.centers.fixed == (1,)


def test_single_point_objective():
    prob = validate_problem(Problem(points=(Point(0, coords=(0.0, 0.0), w=2.0),),
                                    metric=euclidean(), centers=CenterSpec(k=1)))
    sol = make_solution(prob, np.array([[3.0, 0.0]]), [[1.0]])
    assert sol.objective.total == 6.0


def test_fully_outlier_point_costs_lambda_times_weight():
    prob = validate_problem(Problem(points=(Point(0, coords=(0.0, 0.0), w=2.0),),
                                    metric=euclidean(), centers=CenterSpec(k=1),
                                    outlier_penalty=5.0))
    sol = make_solution(prob, np.array([[3.0, 0.0]]), [[0.0, 1.0]])
    assert sol.objective.outlier_term == 10.0
    assert sol.objective.total == 10.0


def test_split_membership_objective_terms():
    # one unit-weight point split half/half between centers at distances 1 and 3
    D = np.array([[1.0, 3.0]])
    prob = validate_problem(Problem(points=(Point(0, w=1.0),), metric=matrix_metric(D),
                                    centers=CenterSpec(k=2, placement="discrete"),
                                    membership="fractional", opening_penalty=0.1))
    sol = make_solution(prob, np.array([0, 1]), [[0.5, 0.5]])
    assert sol.objective.distance_term == pytest.approx(2.0, abs=1e-12)
    assert sol.objective.opening_term == pytest.approx(0.2, abs=1e-12)


def test_two_split_points_cross_checked_by_direct_sum():
    D = np.array([[1.0, 3.0], [2.0, 0.5]])
    w = [1.0, 2.0]
    y = np.array([[0.5, 0.5], [0.25, 0.75]])
    prob = validate_problem(Problem(points=tuple(Point(i, w=w[i]) for i in range(2)),
                                    metric=matrix_metric(D),
                                    centers=CenterSpec(k=2, placement="discrete"),
                                    membership="fractional"))
    sol = make_solution(prob, np.array([0, 1]), y)
    direct = sum(w[i] * D[i, j] * y[i, j] for i in range(2) for j in range(2))
    assert sol.objective.total == pytest.approx(direct, rel=1e-15)


def test_release_term_counts_released_centers():
    prob = validate_problem(Problem(
        points=(Point(0, coords=(0.0, 0.0), w=1.0),), metric=euclidean(),
        centers=CenterSpec(k=1, fixed=((5.0, 0.0),), release_penalty=2.5),
    ))
    sol = make_solution(prob, np.array([[0.0, 0.0]]), [[1.0]], released={0})
    assert sol.objective.release_term == 2.5
    kept = make_solution(prob, np.array([[5.0, 0.0]]), [[1.0]])
    assert kept.objective.release_term == 0.0


def test_release_term_zero_even_with_infinite_penalty():
    prob = validate_problem(Problem(
        points=(Point(0, coords=(0.0, 0.0), w=1.0),), metric=euclidean(),
        centers=CenterSpec(k=1, fixed=((5.0, 0.0),), release_penalty=math.inf),
    ))
    sol = make_solution(prob, np.array([[5.0, 0.0]]), [[1.0]])
    assert sol.objective.release_term == 0.0
    assert not math.isnan(sol.objective.total)


def test_shape_mismatch():
    prob = validate_problem(Problem(points=(Point(0, coords=(0.0, 0.0)),),
                                    metric=euclidean(), centers=CenterSpec(k=1)))
    with pytest.raises(ShapeMismatch):
        make_solution(prob, np.array([[0.0, 0.0]]), [[1.0, 0.0]])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_point_order_permutation_leaves_total_bit_identical(seed):
    rng = np.random.default_rng(seed)
    n, k = 12, 3
    xy = rng.uniform(0, 10, size=(n, 2))
    w = rng.uniform(0.1, 4, size=n)
    gamma = rng.uniform(0, 1, size=n)
    centers = rng.uniform(0, 10, size=(k, 2))
    y = rng.dirichlet(np.ones(k), size=n)
    pts = [Point(i, coords=tuple(xy[i]), w=float(w[i]), gamma=float(gamma[i])) for i in range(n)]

    def total_for(order):
        prob = validate_problem(Problem(points=tuple(pts[i] for i in order),
                                        metric=euclidean(), centers=CenterSpec(k=k),
                                        membership="fractional"))
        sol = make_solution(prob, centers, y[order])
        return sol.objective.total

    base = total_for(list(range(n)))
    perm = rng.permutation(n)
    assert total_for(list(perm)) == base  # bit-identical under id-sorted summation


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_zero_preference_reduces_to_plain_weighted_loss(seed):
    rng = np.random.default_rng(seed)
    n, k = 8, 2
    xy = rng.uniform(0, 5, size=(n, 2))
    w = rng.uniform(0.5, 2, size=n)
    centers = rng.uniform(0, 5, size=(k, 2))
    labels = rng.integers(0, k, size=n)
    y = np.zeros((n, k))
    y[np.arange(n), labels] = 1.0
    pts = tuple(Point(i, coords=tuple(xy[i]), w=float(w[i]), gamma=0.0) for i in range(n))
    prob = validate_problem(Problem(points=pts, metric=euclidean(), centers=CenterSpec(k=k)))
    sol = make_solution(prob, centers, y)
    plain = sum(w[i] * np.hypot(*(xy[i] - centers[labels[i]])) for i in range(n))
    assert sol.objective.total == pytest.approx(plain, rel=1e-12)


def test_hard_labels_prefer_lowest_index_then_center_over_outlier():
    assignment = Assignment(y=np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.0, 0.0, 1.0]]),
                            membership="fractional", has_outlier=True)
    assert assignment.hard_labels().tolist() == [0, 1, -1]


def test_breakdown_total_is_sum_of_terms():
    b = ObjectiveBreakdown(1.0, 2.0, 3.0, 4.0)
    assert b.total == 10.0


def test_evaluate_objective_recomputes_stored_breakdown():
    from capclust import evaluate_objective

    prob = validate_problem(Problem(points=(Point(0, coords=(0.0, 0.0), w=2.0),),
                                    metric=euclidean(), centers=CenterSpec(k=1)))
    sol = make_solution(prob, np.array([[3.0, 0.0]]), [[1.0]])
    assert evaluate_objective(prob, sol) == sol.objective
