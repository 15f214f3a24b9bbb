"""Synthetic benchmark harness.

Generates series from the epidemic-segment model (typical N(0,1) data,
segments arriving at a fixed rate with Poisson lengths and their own mean
and standard deviation, optional point anomalies), matches detections
against ground truth, sweeps penalties for ROC curves, and times the
detector across input sizes.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .capa import CapaConfig, Detection, detect
from .pelt import ChangepointResult, pelt_detect
from .series import Series


@dataclass(frozen=True)
class Scenario:
    """Parameters of one synthetic design.

    ``a`` scales the segment mean shifts (0 disables mean changes); ``b``
    is the variance of the segment standard deviations, drawn from a
    Gamma(1/b, rate 1/b) with mean 1 (0 pins all segment sds at 1).
    """

    n: int = 5000
    anomaly_rate: float = 5e-4
    mean_length: float = 30.0
    a: float = 0.0
    b: float = 0.0
    n_point_anomalies: int = 0
    point_anomaly_sd: float = 10.0
    seed: int = 0


@dataclass(frozen=True)
class GroundTruth:
    """Injected segments (start, end, mean, sd) in slice convention, plus
    the indices of injected point anomalies."""

    segments: tuple[tuple[int, int, float, float], ...]
    point_indices: tuple[int, ...]

    @property
    def boundaries(self) -> tuple[int, ...]:
        out: list[int] = []
        for start, end, _, _ in self.segments:
            out.append(start)
            out.append(end)
        return tuple(sorted(out))


@dataclass(frozen=True)
class EvalReport:
    true_positive_count: int
    false_positive_count: int
    true_count: int
    mean_abs_distance: float | None
    tolerance: int


def generate(scenario: Scenario) -> tuple[Series, GroundTruth]:
    """Draw one series and its ground truth, deterministically per seed.

    Every index outside an existing segment starts a new one with
    probability ``anomaly_rate``; lengths are Poisson(mean_length)
    truncated at 2 so each segment is a real collective event.  Point
    anomalies overwrite typical positions only.
    """
    rng = np.random.default_rng(scenario.seed)
    n = scenario.n
    values = rng.standard_normal(n)
    starts = rng.random(n)
    segments: list[tuple[int, int, float, float]] = []
    t = 0
    while t < n:
        if starts[t] < scenario.anomaly_rate:
            length = max(2, int(rng.poisson(scenario.mean_length)))
            end = min(t + length, n)
            if end - t >= 2:
                mean = float(rng.normal(0.0, scenario.a)) if scenario.a > 0 else 0.0
                sd = (
                    float(rng.gamma(1.0 / scenario.b, scenario.b))
                    if scenario.b > 0
                    else 1.0
                )
                values[t:end] = rng.normal(mean, sd, end - t)
                segments.append((t, end, mean, sd))
                t = end
                continue
        t += 1

    point_indices: tuple[int, ...] = ()
    if scenario.n_point_anomalies > 0:
        in_segment = np.zeros(n, dtype=bool)
        for start, end, _, _ in segments:
            in_segment[start:end] = True
        typical = np.flatnonzero(~in_segment)
        idx = np.sort(
            rng.choice(typical, size=scenario.n_point_anomalies, replace=False)
        )
        values[idx] = rng.normal(0.0, scenario.point_anomaly_sd, idx.size)
        point_indices = tuple(int(i) for i in idx)
    return Series(values), GroundTruth(tuple(segments), point_indices)


def _detected_boundaries(detected) -> list[int]:
    if isinstance(detected, Detection):
        out: list[int] = []
        for c in detected.collective:
            out.append(c.start)
            out.append(c.end)
        return out
    if isinstance(detected, ChangepointResult):
        return list(detected.changepoints)
    raise TypeError(f"cannot read boundaries from {type(detected).__name__}")


def boundary_distances(detected, truth: GroundTruth, tolerance: int = 20) -> list[float]:
    """Distance from each true boundary to its nearest detected change,
    for the true boundaries that have a detection within ``tolerance``."""
    det = _detected_boundaries(detected)
    out = []
    for b in truth.boundaries:
        if det:
            d = min(abs(b - x) for x in det)
            if d <= tolerance:
                out.append(float(d))
    return out


def match_events(detected, truth: GroundTruth, tolerance: int = 20) -> EvalReport:
    """Score a detection against the ground truth.

    Segment-style results match one-to-one (greedily by distance): a
    detected segment is a true positive only if its start and its end are
    both within ``tolerance`` of the same true segment's.  Changepoint-style
    results count a detected changepoint as a true positive when any true
    boundary is within ``tolerance``.  The precision figure averages, over
    true boundaries having a detection within ``tolerance``, the distance
    to the nearest detected change.
    """
    if tolerance < 0:
        raise ValueError("tolerance must be non-negative")
    if isinstance(detected, Detection):
        det_segs = [(c.start, c.end) for c in detected.collective]
        true_segs = [(s, e) for s, e, _, _ in truth.segments]
        pairs = []
        for i, (ds, de) in enumerate(det_segs):
            for j, (ts, te) in enumerate(true_segs):
                dist = max(abs(ds - ts), abs(de - te))
                if dist <= tolerance:
                    pairs.append((dist, i, j))
        pairs.sort()
        used_det: set[int] = set()
        used_true: set[int] = set()
        for _, i, j in pairs:
            if i not in used_det and j not in used_true:
                used_det.add(i)
                used_true.add(j)
        tp = len(used_det)
        fp = len(det_segs) - tp
        true_count = len(true_segs)
    else:
        cps = _detected_boundaries(detected)
        bounds = truth.boundaries
        tp = sum(1 for c in cps if any(abs(c - b) <= tolerance for b in bounds))
        fp = len(cps) - tp
        true_count = len(bounds)
    dists = boundary_distances(detected, truth, tolerance)
    mad = float(np.mean(dists)) if dists else None
    return EvalReport(tp, fp, true_count, mad, tolerance)


def run_method(series, method: str, penalty: float | None = None, min_seg_len: int = 10,
               beta_prime: float | None = None):
    """Run one detector by name ('capa' or 'pelt') on a series.

    For 'capa', ``penalty`` is the collective-anomaly penalty beta (None
    keeps the default); for 'pelt' it is the per-changepoint penalty (None
    means 4 log n).  When a swept beta falls below the default point-anomaly
    penalty, beta_prime is clamped down to beta so the penalty ordering
    survives at the permissive end of an ROC grid.
    """
    if method == "capa":
        if penalty is not None and beta_prime is None:
            n_obs = int(np.count_nonzero(~np.isnan(np.asarray(series.values, dtype=float))))
            default_bp = 3.0 * math.log(n_obs)
            if penalty < default_bp:
                beta_prime = penalty
        cfg = CapaConfig(beta=penalty, beta_prime=beta_prime, min_seg_len=min_seg_len)
        return detect(series, cfg)
    if method == "pelt":
        if penalty is None:
            n_obs = int(np.count_nonzero(~np.isnan(np.asarray(series.values, dtype=float))))
            penalty = 4.0 * math.log(n_obs)
        return pelt_detect(series, penalty, min_seg_len=min_seg_len)
    raise ValueError(f"unknown method {method!r}")


def roc_sweep(scenario: Scenario, method: str, penalty_grid, replicates: int = 100,
              tolerance: int = 20, min_seg_len: int = 10) -> list[tuple[float, float, float]]:
    """One (penalty, tp_rate, mean fp count) row per grid value.

    For 'capa' the grid varies the collective-anomaly penalty beta (the
    point-anomaly penalty stays at its default); for 'pelt' it varies the
    changepoint penalty.  True positives are pooled across replicates so a
    replicate without any true event still contributes its false positives.
    """
    grid = list(penalty_grid)
    if not grid:
        raise ValueError("penalty grid must be non-empty")
    rows = []
    for pen in grid:
        tp = fp = true_count = 0
        for r in range(replicates):
            series, truth = generate(replace(scenario, seed=scenario.seed + r))
            result = run_method(series, method, float(pen), min_seg_len)
            rep = match_events(result, truth, tolerance)
            tp += rep.true_positive_count
            fp += rep.false_positive_count
            true_count += rep.true_count
        rows.append(
            (float(pen), tp / true_count if true_count else 0.0, fp / replicates)
        )
    return rows


def runtime_experiment(sizes, stationary: bool = False, repeats: int = 1,
                       seed: int = 0, min_seg_len: int = 10) -> list[tuple[int, float]]:
    """Wall-clock detect() timing per input size (best of ``repeats`` runs).

    ``stationary=True`` times pure N(0,1) noise, the detector's worst case;
    otherwise anomalies arrive at the benchmark rate so pruning can work.
    """
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ValueError("sizes must be ascending")
    results = []
    for n in sizes:
        if stationary:
            series = Series(np.random.default_rng(seed).standard_normal(n))
        else:
            series, _ = generate(Scenario(n=n, anomaly_rate=5e-4, a=10.0, b=1.0, seed=seed))
        elapsed = []
        for _ in range(max(1, repeats)):
            t0 = time.perf_counter()
            detect(series, CapaConfig(min_seg_len=min_seg_len))
            elapsed.append(time.perf_counter() - t0)
        results.append((int(n), min(elapsed)))
    return results


def loglog_slope(timings) -> float:
    """Slope of log(seconds) vs log(n) between the first and last record."""
    (n1, t1) = timings[0]
    (n2, t2) = timings[-1]
    return math.log(t2 / t1) / math.log(n2 / n1)
