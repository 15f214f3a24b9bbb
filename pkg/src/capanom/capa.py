"""Joint detection of collective and point anomalies by penalised cost.

The series is standardized with robust estimates of the typical mean and
scale.  A dynamic program then chooses, for every prefix length ``m``, the
cheapest of three options:

* extend the typical fit by one observation (cost ``x**2``),
* close a collective anomaly at ``m`` -- a segment fitted with its own
  mean and variance -- paying the penalty ``beta``,
* flag observation ``m`` as a point anomaly, paying ``beta_prime``,

and the optimal labeling is recovered by backtracking.  A candidate
elimination rule drops segment start points that can never win again,
which keeps the search near-linear on data that actually contains
anomalies.

Indices follow slice convention throughout: a collective anomaly
``(start, end)`` covers ``values[start:end]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cost import SegmentStats, collective_cost
from .exceptions import DegenerateSegmentError, InvalidInputError
from .robust import TypicalParams, median, robust_sigma
from .series import as_series, observed

#: Lower bound for the automatic point-anomaly variance floor.
GAMMA_FLOOR = 1e-12

#: Largest series the exhaustive search will accept.
EXHAUSTIVE_LIMIT = 14


def default_beta(n: int) -> float:
    """Default collective-anomaly penalty, 4 log n."""
    return 4.0 * math.log(n)


def default_beta_prime(n: int) -> float:
    """Default point-anomaly penalty, 3 log n."""
    return 3.0 * math.log(n)


@dataclass(frozen=True)
class CapaConfig:
    """Penalties and search bounds for :func:`detect`.

    ``beta`` and ``beta_prime`` default to ``4 log n`` and ``3 log n`` (n
    being the number of observed values); ``gamma``, the point-anomaly
    variance floor, defaults to ``max(exp(-beta_prime), 1e-12)``.
    ``collective_guard`` is added inside the segment-cost logarithm and is
    0 by default (exact for continuous data); set it to the rounding level
    of the data when exactly repeated values can occur.
    """

    beta: float | None = None
    beta_prime: float | None = None
    gamma: float | None = None
    min_seg_len: int = 10
    max_seg_len: int | None = None
    pruning: bool = True
    known_params: TypicalParams | None = None
    collective_guard: float = 0.0

    def __post_init__(self):
        if self.min_seg_len < 2:
            raise InvalidInputError("min_seg_len must be at least 2")
        if self.max_seg_len is not None and self.max_seg_len < self.min_seg_len:
            raise InvalidInputError("max_seg_len must be >= min_seg_len")
        if self.beta is not None and self.beta <= 0:
            raise InvalidInputError("beta must be positive")
        if self.beta_prime is not None and self.beta_prime <= 0:
            raise InvalidInputError("beta_prime must be positive")
        if (
            self.beta is not None
            and self.beta_prime is not None
            and self.beta_prime > self.beta
        ):
            raise InvalidInputError("beta_prime must not exceed beta")
        if self.gamma is not None and not 0.0 < self.gamma <= 1.0:
            raise InvalidInputError("gamma must lie in (0, 1]")
        if self.collective_guard < 0:
            raise InvalidInputError("collective_guard must be non-negative")


def resolve_penalties(config: CapaConfig, n: int) -> tuple[float, float, float]:
    """Fill in the data-size-dependent defaults for (beta, beta_prime, gamma)."""
    beta = config.beta if config.beta is not None else default_beta(n)
    beta_prime = (
        config.beta_prime if config.beta_prime is not None else default_beta_prime(n)
    )
    if beta_prime > beta:
        raise InvalidInputError("beta_prime must not exceed beta")
    gamma = (
        config.gamma
        if config.gamma is not None
        else max(math.exp(-beta_prime), GAMMA_FLOOR)
    )
    return float(beta), float(beta_prime), float(gamma)


@dataclass(frozen=True)
class CollectiveAnomaly:
    """One detected segment: observations ``start..end-1`` on the original axis.

    ``mean``/``variance`` are on the data scale; ``delta_mu`` /
    ``delta_sigma_sq`` / ``delta`` are the scale-free strengths of the mean
    change, the variance change, and their combination; ``saving`` is how
    much cheaper the segment fit is than leaving its points typical
    (penalty not included).
    """

    start: int
    end: int
    mean: float
    variance: float
    delta_mu: float
    delta_sigma_sq: float
    delta: float
    saving: float


@dataclass(frozen=True)
class PointAnomaly:
    index: int
    value: float
    standardized_sq_residual: float


@dataclass(frozen=True)
class Detection:
    """Result of a detection run.

    ``total_cost`` is the minimised penalised cost of the standardized
    series; ``n`` is the length of the original input (gaps included --
    anomaly indices refer to this axis).
    """

    collective: tuple[CollectiveAnomaly, ...]
    points: tuple[PointAnomaly, ...]
    params: TypicalParams
    total_cost: float
    n: int


def _segment_route_costs(cum, cumsq, ks, m, guard):
    """Vectorised segment costs of the windows (k, m] for candidate starts ks."""
    lens = m - ks
    mean = (cum[m] - cum[ks]) / lens
    msd = np.maximum((cumsq[m] - cumsq[ks]) / lens - mean * mean, 0.0)
    arg = guard + msd
    with np.errstate(divide="ignore"):
        seg = lens * (np.log(arg) + 1.0)
    return seg, arg


def prune_candidates(candidates, dp_costs, prefix, m, config: CapaConfig):
    """Apply the candidate-elimination test at step ``m``.

    Returns the subset of ``candidates`` still worth keeping from step
    ``m + min_seg_len`` on; a candidate ``k`` is eliminated once
    ``dp_costs[k] + segment_cost(k+1..m) >= dp_costs[m]``.  Callers must
    keep the full set for the intermediate steps: the rule only licenses
    removal after the segment window has moved ``min_seg_len`` past ``m``.
    """
    ks = np.asarray(sorted(candidates), dtype=np.int64)
    costs = np.asarray(dp_costs, dtype=float)
    seg, arg = _segment_route_costs(prefix.cum_sum, prefix.cum_sumsq, ks, m, config.collective_guard)
    dead = (arg > 0.0) & (costs[ks] + seg >= costs[m])
    return set(int(k) for k in ks[~dead])


def _solve(z, beta, beta_prime, gamma, min_len, max_len, pruning, guard, trace=None):
    """Run the dynamic program on standardized values ``z``.

    Returns the cost array ``best`` (best[m] = minimal penalised cost of
    the first m observations), the per-step winning option (1 segment,
    2 typical, 3 point), and the winning segment start for option 1.
    """
    n = z.size
    cum = np.concatenate(([0.0], np.cumsum(z)))
    cumsq = np.concatenate(([0.0], np.cumsum(z * z)))
    best = np.empty(n + 1)
    best[0] = 0.0
    option = np.zeros(n + 1, dtype=np.int8)
    seg_from = np.full(n + 1, -1, dtype=np.int64)
    cand = np.empty(n + 1, dtype=np.int64)
    ncand = 0
    # step from which a candidate must be disregarded (pruning schedule)
    removable = np.full(n + 1, n + 2, dtype=np.int64)

    for m in range(1, n + 1):
        if m >= min_len:
            cand[ncand] = m - min_len
            ncand += 1
        ks = cand[:ncand]
        keep = removable[ks] > m
        if max_len is not None:
            keep &= ks >= m - max_len
        if not keep.all():
            kept = ks[keep]
            ncand = kept.size
            cand[:ncand] = kept
            ks = cand[:ncand]

        zm = z[m - 1]
        c_typ = best[m - 1] + zm * zm
        c_pt = best[m - 1] + 1.0 + math.log(gamma + zm * zm) + beta_prime
        if ncand:
            seg, arg = _segment_route_costs(cum, cumsq, ks, m, guard)
            route = best[ks] + seg + beta
            usable = arg > 0.0
            if not usable.all():
                route = np.where(usable, route, np.inf)
            c_seg = route.min()
        else:
            c_seg = np.inf

        # ties: keep the fit typical over point over segment
        if c_typ <= c_pt and c_typ <= c_seg:
            best[m] = c_typ
            option[m] = 2
        elif c_pt <= c_seg:
            best[m] = c_pt
            option[m] = 3
        else:
            best[m] = c_seg
            option[m] = 1
            # ties among starts: latest start, i.e. the shortest segment
            seg_from[m] = ks[np.flatnonzero(route == c_seg)[-1]]

        if pruning and ncand:
            dead = usable & (route - beta >= best[m])
            if dead.any():
                dk = ks[dead]
                removable[dk] = np.minimum(removable[dk], m + min_len)
        if trace is not None:
            trace.append(ncand)
    return best, option, seg_from


def _backtrack(n, option, seg_from):
    segments = []
    points = []
    m = n
    while m > 0:
        if option[m] == 2:
            m -= 1
        elif option[m] == 3:
            points.append(m - 1)
            m -= 1
        else:
            k = int(seg_from[m])
            segments.append((k, m))
            m = k
    segments.reverse()
    points.reverse()
    return segments, points


def _standardized(series, config: CapaConfig):
    s = as_series(series)
    vals, orig = observed(s)
    if vals.size < config.min_seg_len:
        raise InvalidInputError(
            f"need at least min_seg_len={config.min_seg_len} observed values, got {vals.size}"
        )
    params = config.known_params
    if params is None:
        params = TypicalParams(median(vals), robust_sigma(vals))
    z = (vals - params.mu0) / params.sigma0
    return s, z, orig, params


def _build_detection(s, z, orig, params, segments, points, beta, beta_prime, gamma, guard):
    # the reported total is assembled from the final labeling with two-pass
    # segment statistics: the dynamic program's prefix sums can lose several
    # digits through the log when a segment's variance is tiny
    in_block = np.zeros(z.size, dtype=bool)
    total = 0.0
    collective = []
    for start, end in segments:
        seg = z[start:end]
        in_block[start:end] = True
        mean = float(seg.mean())
        msd = max(float(((seg - mean) ** 2).mean()), 0.0)
        st = SegmentStats(end - start, mean, msd)
        sd = math.sqrt(msd)
        # zero segment spread: fall back to the typical scale so the
        # strengths stay finite
        sd_eff = sd if sd > 0 else 1.0
        d_mu = abs(mean) / math.sqrt(sd_eff)
        d_sig = sd_eff + 1.0 / sd_eff - 2.0
        delta = math.log(1.0 + 0.5 * d_sig + 0.25 * d_mu * d_mu)
        seg_fit = collective_cost(st, guard)
        total += seg_fit + beta
        saving = float((seg * seg).sum()) - seg_fit
        collective.append(
            CollectiveAnomaly(
                start=int(orig[start]),
                end=int(orig[end - 1]) + 1,
                mean=params.mu0 + params.sigma0 * mean,
                variance=params.sigma0**2 * msd,
                delta_mu=d_mu,
                delta_sigma_sq=d_sig,
                delta=delta,
                saving=saving,
            )
        )
    point_anoms = []
    for t in points:
        in_block[t] = True
        zsq = float(z[t] * z[t])
        total += 1.0 + math.log(gamma + zsq) + beta_prime
        point_anoms.append(
            PointAnomaly(
                index=int(orig[t]),
                value=float(s.values[orig[t]]),
                standardized_sq_residual=zsq,
            )
        )
    typical = z[~in_block]
    total += float((typical * typical).sum())
    return Detection(
        collective=tuple(collective),
        points=tuple(point_anoms),
        params=params,
        total_cost=total,
        n=len(s),
    )


def detect(series, config: CapaConfig | None = None) -> Detection:
    """Find the collective and point anomalies minimising the penalised cost.

    Gaps (NaN) are dropped before fitting; reported indices refer to the
    original axis.  When ``config.known_params`` is unset the typical
    distribution is estimated robustly from the observed values.
    """
    config = config or CapaConfig()
    s, z, orig, params = _standardized(series, config)
    beta, beta_prime, gamma = resolve_penalties(config, z.size)
    best, option, seg_from = _solve(
        z,
        beta,
        beta_prime,
        gamma,
        config.min_seg_len,
        config.max_seg_len,
        config.pruning,
        config.collective_guard,
    )
    segments, points = _backtrack(z.size, option, seg_from)
    return _build_detection(
        s, z, orig, params, segments, points, beta, beta_prime, gamma, config.collective_guard
    )


def pruning_trace(series, config: CapaConfig | None = None) -> np.ndarray:
    """Candidate-set size at every step of the dynamic program."""
    config = config or CapaConfig()
    _, z, _, _ = _standardized(series, config)
    beta, beta_prime, gamma = resolve_penalties(config, z.size)
    trace: list[int] = []
    _solve(
        z,
        beta,
        beta_prime,
        gamma,
        config.min_seg_len,
        config.max_seg_len,
        config.pruning,
        config.collective_guard,
        trace=trace,
    )
    return np.asarray(trace, dtype=np.int64)


def exhaustive_detect(series, config: CapaConfig | None = None) -> Detection:
    """Globally minimise the penalised cost by enumerating every labeling.

    Exponential in n; refuses ``n > 14``.  Exists to validate
    :func:`detect`: ties are broken by the same preference order (typical,
    then point, then the shortest segment, resolved right to left).  Unlike
    :func:`detect`, a zero-variance candidate segment raises
    :class:`DegenerateSegmentError` so a missing guard is surfaced rather
    than silently skipped.
    """
    config = config or CapaConfig()
    s, z, orig, params = _standardized(series, config)
    n = z.size
    if n > EXHAUSTIVE_LIMIT:
        raise InvalidInputError(f"exhaustive search is limited to n <= {EXHAUSTIVE_LIMIT}")
    beta, beta_prime, gamma = resolve_penalties(config, n)
    guard = config.collective_guard
    min_len = config.min_seg_len
    max_len = config.max_seg_len if config.max_seg_len is not None else n

    zs = z.tolist()
    typ = [v * v for v in zs]
    pt = [1.0 + math.log(gamma + v * v) + beta_prime for v in zs]

    # segment costs come from the same vectorised arithmetic the dynamic
    # program uses, so agreement is limited only by summation order
    cum = np.concatenate(([0.0], np.cumsum(z)))
    cumsq = np.concatenate(([0.0], np.cumsum(z * z)))
    seg_table: dict[tuple[int, int], float] = {}
    for j in range(min_len, n + 1):
        starts = np.arange(max(0, j - max_len), j - min_len + 1, dtype=np.int64)
        if starts.size == 0:
            continue
        seg, arg = _segment_route_costs(cum, cumsq, starts, j, guard)
        for idx, i in enumerate(starts):
            if arg[idx] <= 0.0:
                raise DegenerateSegmentError(
                    f"zero-variance candidate segment [{int(i)}, {j}) in exhaustive search"
                )
            seg_table[(int(i), j)] = float(seg[idx])

    def seg_fit(i, j):
        return seg_table[(i, j)]

    best_cost = math.inf
    best_blocks: list | None = None
    best_key: tuple | None = None
    blocks: list = []

    def key_of(blks):
        out = []
        for b in reversed(blks):
            if b[0] == 2:
                out.append(2)
                out.append(b[2] - b[1])
            else:
                out.append(b[0])
        return tuple(out)

    def consider(cost):
        nonlocal best_cost, best_blocks, best_key
        if cost < best_cost:
            best_cost = cost
            best_blocks = list(blocks)
            best_key = None
        elif cost == best_cost and best_blocks is not None:
            if best_key is None:
                best_key = key_of(best_blocks)
            k = key_of(blocks)
            if k < best_key:
                best_blocks = list(blocks)
                best_key = k

    def walk(i, cost):
        if i == n:
            consider(cost)
            return
        blocks.append((0, i))
        walk(i + 1, cost + typ[i])
        blocks.pop()
        blocks.append((1, i))
        walk(i + 1, cost + pt[i])
        blocks.pop()
        top = min(n, i + max_len)
        for j in range(i + min_len, top + 1):
            c = seg_fit(i, j)
            blocks.append((2, i, j))
            walk(j, cost + c + beta)
            blocks.pop()

    walk(0, 0.0)
    assert best_blocks is not None
    segments = [(b[1], b[2]) for b in best_blocks if b[0] == 2]
    points = [b[1] for b in best_blocks if b[0] == 1]
    return _build_detection(
        s, z, orig, params, segments, points, beta, beta_prime, gamma, guard
    )


def point_anomaly_threshold(beta_prime: float, gamma: float) -> float:
    """Squared-residual boundary between typical and point-anomaly labels.

    Solves ``K - 1 - log(K + gamma) = beta_prime`` on the increasing branch
    by bisection (absolute tolerance 1e-10).  An observation whose squared
    standardized residual exceeds K cannot stay typical; below K it cannot
    be flagged as a point anomaly.  Requires ``exp(-beta_prime) <= gamma <= 1``.
    """
    if beta_prime < 0:
        raise ValueError("beta_prime must be non-negative")
    if not math.exp(-beta_prime) <= gamma <= 1.0:
        raise ValueError("gamma must lie in [exp(-beta_prime), 1]")

    def f(k):
        return k - 1.0 - math.log(k + gamma) - beta_prime

    lo = max(beta_prime, 1.0 - gamma)
    hi = beta_prime + 1.0 + math.sqrt(2.0 * (beta_prime + gamma))
    while f(hi) < 0.0:  # proven bracket; widen defensively anyway
        hi = 2.0 * hi + 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-10:
            break
    return 0.5 * (lo + hi)


def fp_control_penalties(n: int, t: float) -> tuple[float, float]:
    """Penalty pair (beta, beta_prime) with provable false-positive control.

    With ``beta_prime = 2t`` and ``beta = 2(2 + 2t + 2 sqrt(2t))`` the
    probability of flagging anything on n typical Gaussian observations
    decays like ``n exp(-t)``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if t <= 0:
        raise ValueError("t must be positive")
    beta_prime = 2.0 * t
    beta = 2.0 * (2.0 + 2.0 * t + 2.0 * math.sqrt(2.0 * t))
    return beta, beta_prime


def detection_to_dict(det: Detection) -> dict:
    """JSON-ready mapping of a Detection (field names are stable)."""
    return {
        "n": det.n,
        "params": {"mu0": det.params.mu0, "sigma0": det.params.sigma0},
        "total_cost": det.total_cost,
        "collective": [
            {
                "start": c.start,
                "end": c.end,
                "mean": c.mean,
                "variance": c.variance,
                "delta_mu": c.delta_mu,
                "delta_sigma_sq": c.delta_sigma_sq,
                "delta": c.delta,
                "saving": c.saving,
            }
            for c in det.collective
        ],
        "points": [
            {
                "index": p.index,
                "value": p.value,
                "standardized_sq_residual": p.standardized_sq_residual,
            }
            for p in det.points
        ],
    }


def detection_from_dict(d: dict) -> Detection:
    """Inverse of :func:`detection_to_dict`."""
    return Detection(
        collective=tuple(CollectiveAnomaly(**c) for c in d["collective"]),
        points=tuple(PointAnomaly(**p) for p in d["points"]),
        params=TypicalParams(**d["params"]),
        total_cost=d["total_cost"],
        n=d["n"],
    )
