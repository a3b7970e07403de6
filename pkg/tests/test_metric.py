import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dmot.errors import AsymmetricMatrix, DuplicatePoint, InvalidId, MetricError, NegativeDistance, TriangleViolation
from dmot.metric import build_metric, compute_params, load_metric, read_matrix, read_points


def test_three_four_five():
    ms = build_metric(points=[[0, 0], [3, 4]])
    assert ms.distance(0, 1) == 5.0
    assert ms.min_dist == ms.max_dist == 5.0


def test_unit_diagonal():
    assert build_metric(points=[[0, 0], [1, 1]]).distance(0, 1) == pytest.approx(math.sqrt(2))


def test_matrix_input_and_block():
    m = [[0, 1, 2], [1, 0, 1.5], [2, 1.5, 0]]
    ms = build_metric(matrix=m)
    assert ms.source == "matrix"
    assert ms.distance(2, 1) == 1.5
    assert ms.block([0], [1, 2]).tolist() == [[1, 2]]
    assert ms.condensed().tolist() == [1, 2, 1.5]


def test_block_matches_full_matrix():
    pts = np.random.default_rng(0).random((20, 3))
    ms = build_metric(points=pts)
    assert np.allclose(ms.block(range(20), range(20)), ms.full_matrix())


@pytest.mark.parametrize(
    "kwargs, err",
    [
        ({"points": [[0, 0], [0, 0]]}, DuplicatePoint),
        ({"matrix": [[0, 1], [2, 0]]}, AsymmetricMatrix),
        ({"matrix": [[0, -1], [-1, 0]]}, NegativeDistance),
        ({"matrix": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}, TriangleViolation),
        ({"matrix": [[0, 0], [0, 0]]}, DuplicatePoint),
        ({"points": [[0, 0]]}, MetricError),
        ({}, MetricError),
    ],
)
def test_rejects_bad_input(kwargs, err):
    with pytest.raises(err):
        build_metric(**kwargs)


def test_distance_checks_ids():
    ms = build_metric(points=[[0], [1]])
    with pytest.raises(InvalidId):
        ms.distance(0, 2)


def test_readers(tmp_path):
    p = tmp_path / "pts.txt"
    p.write_text("# comment\n0,0\n3 4\n\n")
    assert read_points(p).tolist() == [[0, 0], [3, 4]]
    assert load_metric(p).distance(0, 1) == 5.0
    m = tmp_path / "m.txt"
    m.write_text("2\n0 7\n7 0\n")
    assert read_matrix(m).tolist() == [[0, 7], [7, 0]]
    assert load_metric(m, "matrix").distance(0, 1) == 7.0
    with pytest.raises(ValueError):
        load_metric(m, "nope")


def test_params_on_line():
    ms = build_metric(points=np.arange(10.0)[:, None])
    pr = compute_params(ms)
    assert pr.stretch == 9.0
    assert pr.r0 == 0.5
    assert pr.lambda_hat >= 2


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=2, max_size=12, unique=True))
def test_euclidean_points_always_accepted(pts):
    ms = build_metric(points=pts)
    D = ms.full_matrix()
    assert np.allclose(D, D.T)
    # the matrix route agrees with the point route
    assert build_metric(matrix=D).max_dist == pytest.approx(ms.max_dist)
