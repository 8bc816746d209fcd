from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from valsg import fatpoints as fp


def test_points_are_distinct_and_seeded():
    a = fp.random_points(9, 7)
    assert a == fp.random_points(9, 7)
    assert a != fp.random_points(9, 8)
    for i, p in enumerate(a.points):
        for q in a.points[:i]:
            assert not fp._proportional(p, q, a.field)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 8), st.integers(1, 10), st.integers(0, 1000))
def test_simple_points_impose_independent_conditions(d, r, seed):
    # r general simple points impose min(r, C(d+2,2)) conditions
    pts = fp.random_points(r, seed)
    assert fp.fatpoint_dim(d, 1, pts).dim == max(0, comb(d + 2, 2) - r)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 7), st.integers(0, 3), st.integers(1, 6), st.integers(0, 1000))
def test_dimension_bounds(d, n, r, seed):
    pts = fp.random_points(r, seed)
    dim = fp.fatpoint_dim(d, n, pts).dim
    assert max(0, fp.expected_lower_bound(d, n, r)) <= dim <= comb(d + 2, 2)
    if n >= 1:
        assert dim <= fp.fatpoint_dim(d, n - 1, pts).dim


def test_one_double_point():
    pts = fp.random_points(1, 0, fp.RATIONAL)
    assert fp.fatpoint_dim(2, 2, pts).dim == 3
    assert fp.fatpoint_dim(1, 2, pts).dim == 0


def test_two_double_points_are_special_in_degree_two():
    # the doubled line through two points: expected 6 - 6 = 0, actual 1
    pts = fp.random_points(2, 3, fp.RATIONAL)
    assert fp.fatpoint_dim(2, 2, pts).dim == 1


def test_small_characteristic_refused():
    pts = fp.random_points(4, 0, 7)
    with pytest.raises(ValueError):
        fp.fatpoint_dim(8, 2, pts)


def test_parse_field():
    assert fp.parse_field("q") == fp.RATIONAL
    assert fp.parse_field("p:101") == 101
    assert fp.parse_field(None) == fp.MERSENNE_31
    with pytest.raises(ValueError):
        fp.parse_field("p:100")
    with pytest.raises(ValueError):
        fp.parse_field("r")


def test_scan_s4_small_grid():
    rep = fp.semigroup_scan(4, 9, 2, seed=5)
    assert rep.ok
    assert all(d > 4 * n for d, n in rep.nonzero if n >= 1)
    assert rep.min_ratio is not None and rep.min_ratio > 4
    with pytest.raises(ValueError):
        fp.semigroup_scan(3, 5, 1)


def test_parallel_grid_matches_serial():
    pts = fp.random_points(16, 2)
    assert fp.dim_grid(pts, 6, 2, jobs=2) == fp.dim_grid(pts, 6, 2)
