"""Analysis windows, unit-variance scaling and temporal aggregation."""
from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import date, timedelta
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .ingest import ANALYSIS_CATEGORIES, LocalityKey, PlaceCategory
from .preprocess import ProcessedSeries

AGGREGATIONS = ("auc", "mean", "rs")


class WindowError(ValueError):
    pass


class DegenerateWindowError(WindowError):
    pass


class AggregationError(ValueError):
    pass


@dataclass(frozen=True)
class AnalysisWindow:
    key: LocalityKey
    category: PlaceCategory
    variant: str
    start: date
    values: tuple[float, ...]
    scaled: bool = False
    scale_divisor: float = 1.0
    period_index: int = 0
    day_offset: int = 0
    shift: float = 0.0

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ObjectiveVector:
    """Aggregated values of the five non-residential categories; lower is better."""

    key: LocalityKey
    period_index: int
    components: tuple[float, ...]

    def __post_init__(self):
        if not all(np.isfinite(self.components)):
            raise ValueError(f"{self.key}: non-finite objective component")

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.components, dtype=float)

    def __len__(self) -> int:
        return len(self.components)


def extract_window(series: ProcessedSeries, start: date, length: int = 50) -> AnalysisWindow:
    """The ``length`` consecutive daily values beginning at ``start`` (day 0)."""
    if length < 1:
        raise WindowError("window length must be >= 1")
    lookup = dict(zip(series.dates, series.values))
    days = [start + timedelta(days=k) for k in range(length)]
    missing = [d for d in days if d not in lookup]
    if missing:
        raise WindowError(
            f"{series.key}/{series.category.name}: {len(missing)} of {length} window days "
            f"missing (first {missing[0]})")
    return AnalysisWindow(series.key, series.category, series.variant, start,
                          tuple(lookup[d] for d in days))


def split_periods(window: AnalysisWindow, period_length: int = 10) -> list[AnalysisWindow]:
    n = len(window)
    if period_length < 1 or n % period_length:
        raise WindowError(f"window length {n} not divisible by period length {period_length}")
    out = []
    for i in range(n // period_length):
        lo = i * period_length
        out.append(replace(
            window,
            start=window.start + timedelta(days=lo),
            values=window.values[lo:lo + period_length],
            period_index=i,
            day_offset=window.day_offset + lo,
        ))
    return out


def scale_unit_variance(window: AnalysisWindow) -> AnalysisWindow:
    """Divide by the window's sample standard deviation (N - 1); no centering."""
    if window.scaled:
        raise WindowError("window already scaled")
    x = window.array
    if x.size < 2:
        raise DegenerateWindowError("need at least two values to scale")
    sd = float(np.std(x, ddof=1))
    if not sd > 0:
        raise DegenerateWindowError(f"{window.key}/{window.category.name}: zero variance")
    return replace(window, values=tuple(float(v) for v in x / sd), scaled=True, scale_divisor=sd)


def global_shift(windows: Sequence[AnalysisWindow],
                 pinned: float | None = None) -> tuple[list[AnalysisWindow], float]:
    """Add one scalar to every window so the run's minimum becomes non-negative.

    ``pinned`` replaces the computed shift (replication of a frozen shift).
    """
    if pinned is not None:
        shift = float(pinned)
    else:
        lows = [min(w.values) for w in windows if len(w)]
        shift = max(0.0, -min(lows)) if lows else 0.0
    if shift == 0.0:
        return list(windows), 0.0
    shifted = [replace(w, values=tuple(v + shift for v in w.values), shift=w.shift + shift)
               for w in windows]
    return shifted, shift


def agg_mean(window) -> float:
    x = _values(window)
    if x.size == 0:
        raise AggregationError("empty window")
    return float(np.mean(x))


def agg_auc(window) -> float:
    """Trapezoidal area with unit day spacing."""
    x = _values(window)
    if x.size == 0:
        raise AggregationError("empty window")
    if np.any(x < 0):
        raise AggregationError("negative values; apply global_shift before AUC")
    return float(np.sum((x[1:] + x[:-1]) / 2.0))


def agg_rank_sums(windows: Sequence) -> list[float]:
    """Per-day ascending ranks across localities (midranks on ties), summed."""
    if len(windows) < 2:
        raise AggregationError("rank sums need at least two localities")
    arrays = [_values(w) for w in windows]
    if len({a.size for a in arrays}) != 1:
        raise AggregationError("windows differ in length")
    ranks = rankdata(np.vstack(arrays), method="average", axis=0)
    return [float(v) for v in ranks.sum(axis=1)]


def _values(window) -> np.ndarray:
    if isinstance(window, AnalysisWindow):
        return window.array
    return np.asarray(window, dtype=float)


def aggregate_windows(windows: Sequence[AnalysisWindow], aggregation: str) -> list[float]:
    """Aggregate one same-category, same-period window per locality."""
    if aggregation == "mean":
        return [agg_mean(w) for w in windows]
    if aggregation == "auc":
        return [agg_auc(w) for w in windows]
    if aggregation == "rs":
        return agg_rank_sums(windows)
    raise ValueError(f"unknown aggregation {aggregation!r}")


@dataclass
class ObjectiveBuild:
    """Objective vectors for one factor combination plus what produced them."""

    vectors: list[list[ObjectiveVector]]  # [period][locality]
    windows: dict[tuple[LocalityKey, PlaceCategory], AnalysisWindow]
    shift: float
    period_days: list[int]

    @property
    def scale_divisors(self) -> dict[str, float]:
        return {f"{k.ident}|{c.value}": w.scale_divisor for (k, c), w in self.windows.items()}


def build_objective_vectors(
    series: dict[tuple[LocalityKey, PlaceCategory], ProcessedSeries],
    starts: dict[LocalityKey, date],
    aggregation: str,
    *,
    window_length: int = 50,
    period_length: int | None = None,
    scale: bool = True,
    pinned_shift: float | None = None,
    categories: Sequence[PlaceCategory] = ANALYSIS_CATEGORIES,
) -> ObjectiveBuild:
    """Window, scale, shift, split and aggregate one seasonality variant.

    ``series`` holds the calibrated, deseasonalized series per (locality,
    category); ``starts`` maps each locality (in output order) to its first
    restriction date. ``period_length=None`` keeps one period.
    """
    keys = list(starts)
    windows = {}
    for key in keys:
        for cat in categories:
            w = extract_window(series[(key, cat)], starts[key], window_length)
            windows[(key, cat)] = scale_unit_variance(w) if scale else w

    shift = 0.0
    if aggregation == "auc":
        shifted, shift = global_shift(list(windows.values()), pinned_shift)
        windows = dict(zip(windows, shifted))

    n_periods = 1
    split: dict[tuple[LocalityKey, PlaceCategory], list[AnalysisWindow]] = {}
    for k, w in windows.items():
        split[k] = split_periods(w, period_length) if period_length else [w]
        n_periods = len(split[k])

    agg: dict[tuple[LocalityKey, PlaceCategory], list[float]] = {}
    for cat in categories:
        for p in range(n_periods):
            values = aggregate_windows([split[(key, cat)][p] for key in keys], aggregation)
            for key, v in zip(keys, values):
                agg.setdefault((key, cat), []).append(v)

    vectors = [
        [ObjectiveVector(key, p, tuple(agg[(key, cat)][p] for cat in categories)) for key in keys]
        for p in range(n_periods)
    ]
    days = [len(split[(keys[0], categories[0])][p]) for p in range(n_periods)] if keys else []
    return ObjectiveBuild(vectors, windows, shift, days)
