import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavehit import hausdorff as haus
from wavehit.errors import InvalidDomainError, ParameterError
from wavehit.targets import Ball, Box, CantorDust, Point, PointCloud, Union, segment

SCHEDULE = [0.4, 0.2, 0.1, 0.05, 0.025]


def test_negative_index_is_infinite():
    assert haus.estimate_hausdorff(segment(0, 1), -0.5, SCHEDULE).value == np.inf


def test_point_counts_one_at_index_zero():
    assert haus.estimate_hausdorff(Point((0.3, 0.1)), 0.0, SCHEDULE).value == 1.0
    assert haus.estimate_hausdorff(Point((0.3,)), 0.5, SCHEDULE).value == 0.0


def test_segment_length():
    est = haus.estimate_hausdorff(segment(0.0, 0.7), 1.0, SCHEDULE)
    assert est.value == pytest.approx(0.7, rel=0.05)
    assert len(est.upper_estimates) == len(SCHEDULE)


def test_ball_slope_is_dimension():
    radii = np.array([0.05, 0.1, 0.2, 0.4])
    vals = [haus.estimate_hausdorff(Ball((0.0, 0.0, 0.0), r), 3.0, SCHEDULE).value for r in radii]
    slope = np.polyfit(np.log(radii), np.log(vals), 1)[0]
    assert slope == pytest.approx(3.0, abs=0.1)


def test_empty_set():
    est = haus.estimate_hausdorff(PointCloud((), dim_=2), 1.0, SCHEDULE)
    assert est.value == 0.0


@pytest.mark.parametrize("eps", [[], [0.1, 0.2], [0.1, 0.1], [0.2, -0.1]])
def test_schedule_validation(eps):
    with pytest.raises(ParameterError):
        haus.estimate_hausdorff(segment(0, 1), 1.0, eps)


def test_every_cover_is_genuine():
    # each reported sum comes from balls of radius <= eps that cover the box
    A = Box((0.0, 0.0), (1.0, 0.5))
    for eps in SCHEDULE:
        r = A.cover(eps)
        assert np.all(r <= eps + 1e-15)
        assert np.sum(np.pi * r**2) >= 0.5


@settings(max_examples=20, deadline=None)
@given(ratio=st.floats(0.1, 0.45), depth=st.integers(2, 9))
def test_cantor_sum_at_similarity_dimension(ratio, depth):
    A = CantorDust((0.0, 1.0), ratio, depth)
    s = A.similarity_dimension
    eps = np.geomspace(0.5, 0.5 * ratio**depth, 6)
    est = haus.estimate_hausdorff(A, s, eps)
    assert est.value == pytest.approx(1.0, rel=1e-9)


def test_union_is_subadditive():
    a, b = segment(0.0, 0.3), segment(0.5, 1.0)
    u = haus.estimate_hausdorff(Union((a, b)), 1.0, SCHEDULE).value
    sa = haus.estimate_hausdorff(a, 1.0, SCHEDULE).value
    sb = haus.estimate_hausdorff(b, 1.0, SCHEDULE).value
    assert u <= sa + sb + 1e-12
    assert u == pytest.approx(0.8, rel=0.05)


@settings(max_examples=30, deadline=None)
@given(pts=st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=40),
       eps=st.floats(0.01, 1.0))
def test_point_cloud_cover_radii_bounded(pts, eps):
    A = PointCloud(tuple(pts))
    r = A.cover(eps)
    assert np.all(r <= eps) and 1 <= r.size <= len(pts)


def test_membership():
    B = Ball((0.0, 0.0), 0.5)
    assert haus.membership(B, np.array([0.3, 0.0]))
    assert not haus.membership(B, np.array([0.7, 0.0]))
    assert haus.membership(B, np.array([0.7, 0.0]), eta=0.2)
    z = np.array([[0.0, 0.0], [1.0, 1.0]])
    assert list(haus.membership(B, z)) == [True, False]
    assert not haus.membership(PointCloud((), dim_=2), np.array([0.0, 0.0]))
    # the boundary counts, up to a relative rounding allowance
    assert haus.membership(Point((1.0,)), np.array([1.0 + 1e-14]))


def test_target_validation():
    with pytest.raises(InvalidDomainError):
        Ball((0.0,), -1.0)
    with pytest.raises(InvalidDomainError):
        Box((1.0,), (0.0,))
    with pytest.raises(InvalidDomainError):
        CantorDust((0.0, 1.0), 0.6)


def test_cantor_distance():
    A = CantorDust((0.0, 1.0), 1 / 3, 3)
    d = A.distance(np.array([[0.5], [0.0], [1 / 3], [0.2]]))
    # 0.2 lies in the gap (1/9, 2/9) removed at level 2
    assert np.allclose(d, [1 / 6, 0.0, 0.0, min(0.2 - 1 / 9, 2 / 9 - 0.2)])


def test_estimates_csv(tmp_path):
    est = haus.estimate_hausdorff(segment(0, 1), 1.0, SCHEDULE)
    haus.write_estimates_csv(tmp_path / "h.csv", [est], {"set": "segment"})
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines[:2] == ["# set: segment", "gamma,eps,sum,value"] and len(lines) == 7


def test_membership_examples():
    assert haus.membership(Ball((0.0, 0.0), 1.0), np.array([0.3, 0.4]))
    assert not haus.membership(Point((1.0, 2.0)), np.array([1.3, 2.0]), eta=0.2)
    C = CantorDust((0.0, 1.0), 1 / 3, 5)
    assert not haus.membership(C, np.array([0.5]))
    assert haus.membership(C, np.array([1 / 3]))


def test_monotone_in_index_for_small_sets():
    A = Box((0.0, 0.0), (0.3, 0.2))
    vals = [haus.estimate_hausdorff(A, g, SCHEDULE).value for g in (0.5, 1.0, 1.5, 2.0, 3.0)]
    assert np.all(np.diff(vals) <= 0)


def test_cantor_bounded_across_depths():
    vals = []
    for depth in range(4, 9):
        A = CantorDust((0.0, 1.0), 1 / 3, depth)
        vals.append(haus.estimate_hausdorff(A, A.similarity_dimension, [0.3, 0.1, 0.03, 0.01, 0.003]).value)
    assert min(vals) > 0.2 and max(vals) < 5.0
