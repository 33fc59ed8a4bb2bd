import itertools

import numpy as np
import pytest
import hypothesis.strategies as st
from hypothesis import given, settings

from capclust import (
    CenterSpec, Point, Problem, allocate_uncapacitated, distance, euclidean,
    manhattan, matrix_metric, pairwise_costs, sqeuclidean, threshold, validate_problem,
)
from capclust.errors import MatrixIndexOutOfRange, ValidationError
from capclust.metrics import geometric_distances


def test_manhattan_example():
    assert distance(manhattan(), (1, 2), (4, 6)) == 7.0


def test_three_four_five():
    assert distance(sqeuclidean(), (0, 0), (3, 4)) == 25.0
    assert distance(euclidean(), (0, 0), (3, 4)) == 5.0


def test_threshold_boundary_counts_as_outside():
    # Euclidean distance exactly 5 is not under the radius, so cost 1.
    assert distance(threshold(5.0), (0, 0), (3, 4)) == 1.0
    assert distance(threshold(5.0 + 1e-9), (0, 0), (3, 4)) == 0.0


def test_threshold_needs_positive_radius():
    with pytest.raises(ValidationError):
        threshold(0.0)


def test_matrix_lookup_and_range():
    D = np.array([[1.0, 2.0], [3.0, 4.0]])
    m = matrix_metric(D)
    assert distance(m, 1, 0) == 3.0
    with pytest.raises(MatrixIndexOutOfRange):
        distance(m, 2, 0)
    with pytest.raises(MatrixIndexOutOfRange):
        distance(m, 0, 5)


def test_matrix_rejects_negative_entries():
    with pytest.raises(ValidationError):
        matrix_metric([[1.0, -0.5]])


def _problem(points, metric, k=1, **kw):
    return validate_problem(Problem(points=tuple(points), metric=metric, centers=CenterSpec(k=k), **kw))


def test_pairwise_costs_single_point():
    prob = _problem([Point(0, coords=(0, 0), w=2.0)], euclidean())
    costs = pairwise_costs(prob, np.array([[3.0, 0.0]]))
    assert costs.shape == (1, 1)
    assert costs[0, 0] == 6.0


def test_pairwise_costs_identical_points_identical_rows():
    pts = [Point(0, coords=(1, 1), w=2.0), Point(1, coords=(1, 1), w=2.0)]
    prob = _problem(pts, manhattan(), k=2)
    costs = pairwise_costs(prob, np.array([[0.0, 0.0], [4.0, 5.0]]))
    assert np.array_equal(costs[0], costs[1])


def test_pairwise_costs_matches_elementwise_recomputation():
    rng = np.random.default_rng(3)
    pts = [Point(i, coords=tuple(rng.uniform(0, 5, 2)), w=float(rng.uniform(0.5, 2)),
                 gamma=float(rng.uniform(0, 1))) for i in range(3)]
    prob = _problem(pts, euclidean(), k=2)
    centers = rng.uniform(0, 5, size=(2, 2))
    costs = pairwise_costs(prob, centers)
    for i, p in enumerate(pts):
        for j in range(2):
            expect = (p.w + p.gamma) * distance(euclidean(), p.coords, centers[j])
            assert costs[i, j] == pytest.approx(expect, rel=1e-12)


coords = st.tuples(st.floats(-100, 100), st.floats(-100, 100))


@given(coords, coords)
def test_geometric_symmetry_and_identity(p, q):
    for metric in (sqeuclidean(), euclidean(), manhattan()):
        assert distance(metric, p, p) == 0.0
        assert distance(metric, p, q) == pytest.approx(distance(metric, q, p), rel=1e-12, abs=1e-12)


@given(coords, coords, coords)
def test_triangle_inequality_euclidean_manhattan(p, q, r):
    for metric in (euclidean(), manhattan()):
        dpr = distance(metric, p, r)
        dpq = distance(metric, p, q)
        dqr = distance(metric, q, r)
        assert dpr <= dpq + dqr + 1e-9 * (1 + dpq + dqr)


def test_squared_euclidean_violates_triangle_inequality():
    # witness triple on a line: 4 > 1 + 1
    a, b, c = (0, 0), (1, 0), (2, 0)
    m = sqeuclidean()
    assert distance(m, a, c) > distance(m, a, b) + distance(m, b, c)


@given(coords, coords)
def test_euclidean_squared_matches_sqeuclidean(p, q):
    d = distance(euclidean(), p, q)
    d2 = distance(sqeuclidean(), p, q)
    assert d * d == pytest.approx(d2, rel=1e-12, abs=1e-30)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_threshold_assignment_matches_coverage_enumeration(seed):
    # Minimizing the 0/1 threshold cost over k open sites is maximal coverage:
    # check against direct coverage counting on 5-point instances.
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0, 10, size=(5, 2))
    sites = rng.uniform(0, 10, size=(4, 2))
    radius = float(rng.uniform(1, 6))
    w = rng.uniform(0.5, 3.0, size=5)
    pts = [Point(i, coords=tuple(xy[i]), w=float(w[i])) for i in range(5)]
    prob = validate_problem(Problem(
        points=tuple(pts), metric=threshold(radius),
        centers=CenterSpec(k=2, placement="discrete", candidates=sites),
    ))
    euclid = geometric_distances("euclidean", xy, sites)
    best_cost = None
    for subset in itertools.combinations(range(4), 2):
        covered = (euclid[:, list(subset)] < radius).any(axis=1)
        cost = float(w[~covered].sum())
        if best_cost is None or cost < best_cost:
            best_cost = cost
    mine = min(
        float((pairwise_costs(prob, np.array(subset)) *
               allocate_uncapacitated(prob, np.array(subset)).y).sum())
        for subset in itertools.combinations(range(4), 2)
    )
    assert mine == pytest.approx(best_cost, abs=1e-9)
