from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import date, timedelta
from typing import NamedTuple

import numpy as np

from ..ingest import LocalityCategorySeries, LocalityKey, PlaceCategory
from .stl import StlParams, stl

VARIANTS = ("raw", "ma", "trend")


class CalibrationError(ValueError):
    pass


class IrreparableGapError(ValueError):
    pass


class GapError(ValueError):
    """Series has missing dates where a gap-free series is required."""


@dataclass(frozen=True)
class ProcessedSeries:
    key: LocalityKey
    category: PlaceCategory
    variant: str
    dates: tuple[date, ...]
    values: tuple[float, ...]
    calibration_offset: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if len(self.dates) != len(self.values):
            raise ValueError("dates and values differ in length")

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return len(self.dates)

    def with_values(self, values, variant: str | None = None) -> ProcessedSeries:
        return replace(self, values=tuple(float(v) for v in values),
                       variant=variant or self.variant)


def as_processed(series: LocalityCategorySeries | ProcessedSeries) -> ProcessedSeries:
    if isinstance(series, ProcessedSeries):
        return series
    return ProcessedSeries(series.key, series.category, "raw", series.dates,
                           tuple(float(v) for v in series.values))


def _require_gap_free(series: ProcessedSeries) -> None:
    if series.dates and (series.dates[-1] - series.dates[0]).days + 1 != len(series.dates):
        raise GapError(f"{series.key}/{series.category.name}: series has missing dates; repair gaps first")


def repair_gaps(series, max_gap: int = 3) -> ProcessedSeries:
    """Linearly interpolate interior runs of at most ``max_gap`` missing days.

    Leading and trailing gaps are never filled: the result spans the first to
    the last observation.
    """
    s = as_processed(series)
    if len(s) < 2:
        return s
    dates, values = [s.dates[0]], [s.values[0]]
    for (d0, v0), (d1, v1) in zip(zip(s.dates, s.values), zip(s.dates[1:], s.values[1:])):
        missing = (d1 - d0).days - 1
        if missing > max_gap:
            raise IrreparableGapError(
                f"{s.key}/{s.category.name}: {missing} missing days after {d0} (max {max_gap})")
        for k in range(1, missing + 1):
            dates.append(d0 + timedelta(days=k))
            values.append(v0 + (v1 - v0) * k / (missing + 1))
        dates.append(d1)
        values.append(v1)
    return replace(s, dates=tuple(dates), values=tuple(float(v) for v in values))


def calibrate(series, first_restriction: date) -> ProcessedSeries:
    """Shift the whole series so its strictly pre-restriction part has zero mean."""
    s = as_processed(series)
    pre = [v for d, v in zip(s.dates, s.values) if d < first_restriction]
    if not pre:
        raise CalibrationError(f"{s.key}/{s.category.name}: no observations before {first_restriction}")
    offset = float(np.mean(pre))
    return replace(s, values=tuple(v - offset for v in s.values),
                   calibration_offset=s.calibration_offset + offset)


def moving_average(series, window: int = 7, centered: bool = True) -> ProcessedSeries:
    """Moving mean with windows truncated at the series edges.

    Centered by default; ``centered=False`` gives a trailing mean over the
    current and previous ``window - 1`` days.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be an odd integer >= 1")
    s = as_processed(series)
    _require_gap_free(s)
    x = s.array
    n = x.size
    csum = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(n)
    if centered:
        half = window // 2
        lo, hi = np.maximum(idx - half, 0), np.minimum(idx + half + 1, n)
    else:
        lo, hi = np.maximum(idx - window + 1, 0), idx + 1
    out = (csum[hi] - csum[lo]) / (hi - lo)
    # guard the pointwise [min, max] bound against cumulative-sum rounding
    out = np.clip(out, x.min(), x.max()) if n else out
    return s.with_values(out, "ma")


class Decomposition(NamedTuple):
    trend: ProcessedSeries
    seasonal: ProcessedSeries
    remainder: ProcessedSeries


def stl_decompose(series, period: int = 7, params: StlParams | None = None) -> Decomposition:
    s = as_processed(series)
    _require_gap_free(s)
    res = stl(s.array, period, params)
    seasonal = replace(s, values=tuple(map(float, res.seasonal)), calibration_offset=0.0)
    remainder = replace(s, values=tuple(map(float, res.remainder)), calibration_offset=0.0)
    return Decomposition(s.with_values(res.trend, "trend"), seasonal, remainder)


def stl_trend(series, period: int = 7, params: StlParams | None = None) -> ProcessedSeries:
    return stl_decompose(series, period, params).trend
