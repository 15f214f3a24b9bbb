"""Univariate series container and CSV ingestion.

A :class:`Series` is an ordered sequence of float observations.  NaN marks
a missing observation (a gap); infinities are rejected as garbage.  An
optional ``times`` array is carried along untouched.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError


@dataclass(frozen=True)
class Series:
    """Ordered observations; NaN marks a missing value."""

    values: np.ndarray
    times: np.ndarray | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise InvalidInputError("series values must be one-dimensional")
        object.__setattr__(self, "values", vals)
        if self.times is not None:
            t = np.asarray(self.times, dtype=float)
            if t.shape != vals.shape:
                raise InvalidInputError("times and values must have equal length")
            object.__setattr__(self, "times", t)

    def __len__(self) -> int:
        return self.values.size


def as_series(data) -> Series:
    """Coerce an array-like (or pass a Series through) to :class:`Series`."""
    if isinstance(data, Series):
        return data
    return Series(np.asarray(data, dtype=float))


def observed(series: Series) -> tuple[np.ndarray, np.ndarray]:
    """Observed values and their original indices; NaN gaps are dropped.

    Infinite values are rejected: they are measurement garbage, not gaps.
    """
    vals = series.values
    if np.isinf(vals).any():
        raise InvalidInputError("series contains infinite values")
    keep = ~np.isnan(vals)
    return vals[keep], np.flatnonzero(keep)


def read_value_series(path) -> Series:
    """Read a series from CSV.

    Accepts one column (value) or two columns (time, value), with an
    optional header row.  A blank value field marks a missing observation.
    Raises :class:`InvalidInputError` listing the line numbers of rows that
    cannot be parsed.
    """
    times: list[float] = []
    values: list[float] = []
    two_col = None
    bad_lines: list[int] = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            row = [f.strip() for f in row]
            if not any(row):
                continue
            if two_col is None:
                if not _is_number_or_blank(row[-1]):
                    continue  # header row
                two_col = len(row) >= 2
            if two_col and len(row) >= 2:
                tfield, vfield = row[0], row[1]
            elif not two_col and len(row) == 1:
                tfield, vfield = None, row[0]
            else:
                bad_lines.append(lineno)
                continue
            try:
                t = float(tfield) if tfield is not None else float(len(values))
                v = float(vfield) if vfield != "" else float("nan")
            except ValueError:
                bad_lines.append(lineno)
                continue
            times.append(t)
            values.append(v)
    if bad_lines:
        raise InvalidInputError(f"unparseable rows at lines {bad_lines}")
    if not values:
        raise InvalidInputError(f"no data rows in {path}")
    return Series(np.asarray(values), np.asarray(times) if two_col else None)


def _is_number_or_blank(field: str) -> bool:
    if field == "":
        return True
    try:
        float(field)
    except ValueError:
        return False
    return True
