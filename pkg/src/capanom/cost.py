"""Segment statistics via prefix sums and the per-option fit costs.

All costs are expressed for standardized data (typical distribution
centred at 0 with unit scale): fitting one observation as typical costs
``x**2``, and fitting a segment with its own mean and variance costs
``len * (log(msd) + 1)`` where ``msd`` is the segment's mean squared
deviation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateSegmentError


@dataclass(frozen=True)
class SegmentStats:
    """Length, mean, and mean squared deviation of one segment."""

    length: int
    mean: float
    mean_sq_dev: float


@dataclass(frozen=True)
class PrefixStats:
    """Cumulative sums giving O(1) segment statistics.

    ``cum_sum[j] - cum_sum[i - 1]`` is the sum of observations i..j
    (1-based, inclusive); likewise for squares.
    """

    cum_sum: np.ndarray
    cum_sumsq: np.ndarray
    n: int


def prefix_stats(values) -> PrefixStats:
    arr = np.asarray(values, dtype=float)
    cs = np.concatenate(([0.0], np.cumsum(arr)))
    cs2 = np.concatenate(([0.0], np.cumsum(arr * arr)))
    return PrefixStats(cs, cs2, arr.size)


def segment_stats(p: PrefixStats, i: int, j: int) -> SegmentStats:
    """Statistics of observations i..j (1-based, inclusive).

    The mean squared deviation is clamped at zero: catastrophic
    cancellation on near-constant stretches must not yield a negative
    variance.
    """
    if not 1 <= i <= j <= p.n:
        raise IndexError(f"segment ({i}, {j}) out of range for n={p.n}")
    length = j - i + 1
    mean = (p.cum_sum[j] - p.cum_sum[i - 1]) / length
    msd = (p.cum_sumsq[j] - p.cum_sumsq[i - 1]) / length - mean * mean
    return SegmentStats(length, float(mean), max(0.0, float(msd)))


def typical_cost(x: float) -> float:
    """Cost of fitting one standardized observation as typical."""
    return x * x


def point_anomaly_cost(x: float, gamma: float) -> float:
    """Cost of fitting one standardized observation as a point anomaly.

    ``gamma`` keeps the log argument positive.  The point-anomaly penalty
    is added by the caller.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return 1.0 + math.log(gamma + x * x)


def collective_cost(s: SegmentStats, guard: float = 0.0) -> float:
    """Cost of fitting a segment with its own mean and variance.

    ``guard`` is added inside the logarithm; leave it at 0 for exact
    continuous-data behaviour, set it to the rounding level of the data
    when ties in the raw values are possible.
    """
    if s.length < 2:
        raise ValueError("collective segments need at least two observations")
    arg = guard + s.mean_sq_dev
    if arg <= 0:
        raise DegenerateSegmentError(
            "zero-variance segment; configure a positive variance guard"
        )
    return s.length * (math.log(arg) + 1.0)


def classical_segment_cost(s: SegmentStats) -> float:
    """Per-segment cost of the classical changepoint fit (guard-free)."""
    return collective_cost(s, 0.0)
