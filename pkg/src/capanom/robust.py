"""Robust location/scale estimation and standardization.

The detectors treat the bulk of a series as draws from one typical
distribution.  Its mean and standard deviation are estimated with order
statistics (median and interquartile range), so that the anomalies we are
trying to find cannot drag the estimates towards themselves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateScaleError, InvalidInputError
from .series import Series, as_series, observed

#: Interquartile range of the standard normal distribution (to 4 significant
#: figures).  Dividing a sample IQR by this makes it a consistent estimator
#: of the standard deviation under Gaussian typical data.
IQR_NORMAL_WIDTH = 1.349


@dataclass(frozen=True)
class TypicalParams:
    """Location and scale of the typical distribution."""

    mu0: float
    sigma0: float

    def __post_init__(self):
        if not (np.isfinite(self.mu0) and np.isfinite(self.sigma0)):
            raise InvalidInputError("typical parameters must be finite")
        if self.sigma0 <= 0:
            raise DegenerateScaleError("sigma0 must be positive")


def _clean(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise InvalidInputError("empty sample")
    if not np.isfinite(arr).all():
        raise InvalidInputError("sample contains non-finite values")
    return arr


def median(values) -> float:
    """Middle order statistic; mean of the two middle ones for even counts."""
    return float(np.median(_clean(values)))


def robust_sigma(values, consistent: bool = True) -> float:
    """Interquartile-range estimate of the typical standard deviation.

    Quantiles interpolate linearly between the closest order statistics.
    With ``consistent=True`` (the default) the IQR is divided by
    :data:`IQR_NORMAL_WIDTH` so the estimate targets the standard deviation
    of Gaussian data; ``consistent=False`` returns the raw IQR.

    Raises :class:`DegenerateScaleError` when the quartiles coincide (fewer
    than two distinct values, or a sample dominated by one value).
    """
    arr = _clean(values)
    q25, q75 = np.quantile(arr, [0.25, 0.75])
    iqr = float(q75 - q25)
    if iqr <= 0:
        raise DegenerateScaleError("interquartile range is zero")
    return iqr / IQR_NORMAL_WIDTH if consistent else iqr


def estimate_params(series, consistent: bool = True) -> TypicalParams:
    """Robust fit of the typical distribution (median, IQR-based sigma).

    Missing values are dropped before estimation.
    """
    vals, _ = observed(as_series(series))
    return TypicalParams(median(vals), robust_sigma(vals, consistent=consistent))


def standardize(series, params: TypicalParams) -> Series:
    """Center and rescale a series by the typical parameters.

    Gaps (NaN) and timestamps are preserved.
    """
    s = as_series(series)
    return Series((s.values - params.mu0) / params.sigma0, s.times)
