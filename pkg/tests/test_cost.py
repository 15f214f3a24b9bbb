"""Segment statistics and per-option costs."""

import math

import numpy as np
import pytest

from capanom import (
    DegenerateSegmentError,
    classical_segment_cost,
    collective_cost,
    point_anomaly_cost,
    prefix_stats,
    segment_stats,
    typical_cost,
)
from capanom.cost import SegmentStats


def two_pass_stats(values, i, j):
    """Oracle: direct two-pass mean / mean squared deviation on the slice."""
    seg = np.asarray(values[i - 1 : j], dtype=float)
    mean = seg.mean()
    return seg.size, mean, float(((seg - mean) ** 2).mean())


def test_segment_stats_constant():
    p = prefix_stats([1.0, 1.0, 1.0])
    st = segment_stats(p, 1, 3)
    assert (st.length, st.mean, st.mean_sq_dev) == (3, 1.0, 0.0)


def test_segment_stats_simple():
    p = prefix_stats([0.0, 2.0])
    st = segment_stats(p, 1, 2)
    assert (st.length, st.mean, st.mean_sq_dev) == (2, 1.0, 1.0)


def test_segment_stats_matches_two_pass():
    rng = np.random.default_rng(11)
    x = rng.normal(3.0, 2.0, 400)
    p = prefix_stats(x)
    for _ in range(100):
        i = int(rng.integers(1, 400))
        j = int(rng.integers(i, 401))
        st = segment_stats(p, i, j)
        length, mean, msd = two_pass_stats(x, i, j)
        assert st.length == length
        assert st.mean == pytest.approx(mean, abs=1e-9)
        assert st.mean_sq_dev == pytest.approx(msd, abs=1e-9)


def test_segment_stats_bounds():
    p = prefix_stats([1.0, 2.0])
    with pytest.raises(IndexError):
        segment_stats(p, 0, 1)
    with pytest.raises(IndexError):
        segment_stats(p, 2, 3)


def test_segment_stats_never_negative():
    # near-constant data invites cancellation; the clamp must hold
    x = np.full(1000, 1e8) + np.random.default_rng(0).normal(0, 1e-6, 1000)
    p = prefix_stats(x)
    for j in range(2, 1000, 97):
        assert segment_stats(p, 1, j).mean_sq_dev >= 0.0


def test_typical_cost():
    assert typical_cost(0.0) == 0.0
    assert typical_cost(2.0) == 4.0
    assert typical_cost(-1.5) == 2.25


def test_point_anomaly_cost():
    assert point_anomaly_cost(0.0, 1.0) == pytest.approx(1.0)
    assert point_anomaly_cost(0.0, math.exp(-1.0)) == pytest.approx(0.0)
    assert point_anomaly_cost(3.0, 0.001) == pytest.approx(1.0 + math.log(9.001))
    with pytest.raises(ValueError):
        point_anomaly_cost(1.0, 0.0)


@pytest.mark.parametrize(
    "length,msd,expected",
    [
        (2, 1.0, 2.0),
        (5, math.e, 10.0),
        (3, 0.25, 3.0 * (1.0 + math.log(0.25))),
    ],
)
def test_collective_cost_values(length, msd, expected):
    st = SegmentStats(length, 0.0, msd)
    assert collective_cost(st) == pytest.approx(expected)
    assert classical_segment_cost(st) == pytest.approx(expected)


def test_collective_cost_degenerate():
    with pytest.raises(DegenerateSegmentError):
        collective_cost(SegmentStats(2, 1.0, 0.0))
    # a positive guard rescues the degenerate case
    assert collective_cost(SegmentStats(2, 1.0, 0.0), guard=1.0) == pytest.approx(2.0)
    with pytest.raises(DegenerateSegmentError):
        classical_segment_cost(SegmentStats(4, 1.0, 0.0))


def test_collective_cost_needs_two_points():
    with pytest.raises(ValueError):
        collective_cost(SegmentStats(1, 0.0, 1.0))


def test_subadditivity():
    # splitting a window never increases the fitted cost
    rng = np.random.default_rng(21)
    x = rng.standard_normal(300)
    x[100:140] += rng.uniform(0, 4)
    p = prefix_stats(x)
    min_len = 2
    for _ in range(1000):
        a = int(rng.integers(1, 250))
        b = int(rng.integers(a + min_len, a + min_len + 25))
        c = int(rng.integers(b + min_len + 1, b + min_len + 26))
        if c > 300:
            continue
        whole = collective_cost(segment_stats(p, a, c))
        left = collective_cost(segment_stats(p, a, b - 1))
        right = collective_cost(segment_stats(p, b, c))
        assert whole >= left + right - 1e-9


def test_collective_cost_permutation_invariant():
    rng = np.random.default_rng(4)
    x = rng.standard_normal(30)
    st = segment_stats(prefix_stats(x), 1, 30)
    shuffled = segment_stats(prefix_stats(rng.permutation(x)), 1, 30)
    assert collective_cost(shuffled) == pytest.approx(collective_cost(st), abs=1e-9)
