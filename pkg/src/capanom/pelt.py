"""Classical penalised changepoint detection for joint changes in mean and
variance, with PELT-style candidate pruning.

Unlike the anomaly detector, every segment here gets its own fitted mean
and variance: there is no shared typical distribution and no
standardization.  This is the comparison baseline for the benchmark
harness.

Changepoints follow slice convention: a changepoint ``t`` splits the data
into ``values[..:t]`` and ``values[t:..]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .capa import _segment_route_costs
from .exceptions import DegenerateSegmentError, InvalidInputError
from .series import as_series, observed


def bic_penalty(n: int) -> float:
    """The default (BIC-style) penalty for the mean+variance cost, 4 log n."""
    return 4.0 * math.log(n)


def strengthened_sic_penalty(n: int, alpha: float = 1.0, delta: float = 0.1) -> float:
    """Penalty ``alpha * log(n)**(1 + delta)``, slightly stronger than SIC."""
    return alpha * math.log(n) ** (1.0 + delta)


@dataclass(frozen=True)
class ChangepointResult:
    """Changepoint positions (0 and n excluded), total cost, and the penalty used."""

    changepoints: tuple[int, ...]
    total_cost: float
    penalty: float


def pelt_detect(series, penalty: float, min_seg_len: int = 10, pruning: bool = True) -> ChangepointResult:
    """Minimise total segment cost plus ``penalty`` per changepoint.

    Each segment of length >= ``min_seg_len`` is charged
    ``len * (log(msd) + 1)`` with its own fitted mean and variance.  A
    candidate segment with zero variance raises
    :class:`DegenerateSegmentError` (the cost is unbounded below there).
    Gaps (NaN) are dropped before fitting; changepoints are mapped back to
    the original axis.
    """
    if min_seg_len < 2:
        raise InvalidInputError("min_seg_len must be at least 2")
    vals, orig = observed(as_series(series))
    n = vals.size
    if n < min_seg_len:
        raise InvalidInputError(
            f"need at least min_seg_len={min_seg_len} observed values, got {n}"
        )
    cum = np.concatenate(([0.0], np.cumsum(vals)))
    cumsq = np.concatenate(([0.0], np.cumsum(vals * vals)))

    best = np.full(n + 1, np.inf)
    best[0] = -penalty
    prev = np.full(n + 1, -1, dtype=np.int64)
    cand = np.empty(n + 1, dtype=np.int64)
    ncand = 0
    removable = np.full(n + 1, n + 2, dtype=np.int64)

    for m in range(1, n + 1):
        k_new = m - min_seg_len
        # a split point must leave room for a full segment on its left
        if k_new == 0 or k_new >= min_seg_len:
            cand[ncand] = k_new
            ncand += 1
        if ncand == 0:
            continue
        ks = cand[:ncand]
        keep = removable[ks] > m
        if not keep.all():
            kept = ks[keep]
            ncand = kept.size
            cand[:ncand] = kept
            ks = cand[:ncand]

        seg, arg = _segment_route_costs(cum, cumsq, ks, m, 0.0)
        if not (arg > 0.0).all():
            k_bad = int(ks[np.flatnonzero(arg <= 0.0)[0]])
            raise DegenerateSegmentError(
                f"zero-variance candidate segment ({k_bad}, {m}]"
            )
        route = best[ks] + seg + penalty
        c = route.min()
        best[m] = c
        # ties: latest split point
        prev[m] = ks[np.flatnonzero(route == c)[-1]]

        if pruning:
            dead = route - penalty >= c
            if dead.any():
                dk = ks[dead]
                removable[dk] = np.minimum(removable[dk], m + min_seg_len)

    cps = []
    m = n
    while prev[m] > 0:
        m = int(prev[m])
        cps.append(m)
    cps.reverse()
    return ChangepointResult(
        changepoints=tuple(int(orig[t]) for t in cps),
        total_cost=float(best[n]),
        penalty=float(penalty),
    )
