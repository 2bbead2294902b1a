from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, replace
from datetime import date

from ..aggregate import ObjectiveBuild, ObjectiveVector, build_objective_vectors
from ..ingest import (
    ANALYSIS_CATEGORIES,
    CalendarEntry,
    CmrDataset,
    Coverage,
    IngestError,
    LocalityKey,
    PlaceCategory,
    RestrictionCalendar,
    parse_calendar,
    parse_cmr_csv,
    select_localities,
    validate_coverage,
)
from ..mcdm import Comparator, DepthRanking, rank_run
from ..preprocess import (
    IrreparableGapError,
    ProcessedSeries,
    as_processed,
    calibrate,
    moving_average,
    repair_gaps,
    stl_trend,
)
from .config import RunConfig

log = logging.getLogger(__name__)


@dataclass
class CombinationResult:
    seasonality: str
    granularity: str
    aggregation: str
    comparator: Comparator
    vectors: list[list[ObjectiveVector]]
    ranking: DepthRanking
    shift: float
    scale_divisors: dict[str, float]
    period_days: list[int]
    rank_sum_normalized: bool = False

    @property
    def label(self) -> str:
        return f"{self.aggregation}/{self.seasonality}/{self.granularity}/{self.comparator.label}"

    @property
    def column(self) -> str:
        return f"{self.aggregation}/{self.seasonality}"


@dataclass
class CategoryRanking:
    """Single-category ranking of unscaled aggregates (one locality order per column)."""

    category: PlaceCategory
    seasonality: str
    aggregation: str
    values: dict[LocalityKey, float]
    ranks: dict[LocalityKey, int]
    shift: float

    @property
    def column(self) -> str:
        return f"{self.aggregation}/{self.seasonality}"


@dataclass
class Failure:
    what: str
    error: str


@dataclass
class AnalysisResult:
    config: RunConfig
    config_hash: str
    localities: list[LocalityKey]
    calendar: dict[LocalityKey, CalendarEntry]
    combinations: list[CombinationResult] = field(default_factory=list)
    category_rankings: list[CategoryRanking] = field(default_factory=list)
    unscaled: dict[tuple[str, str], ObjectiveBuild] = field(default_factory=dict)
    processed: dict[str, dict[tuple[LocalityKey, PlaceCategory], ProcessedSeries]] = field(default_factory=dict)
    raw: dict[tuple[LocalityKey, PlaceCategory], ProcessedSeries] = field(default_factory=dict)
    coverage: dict[str, dict[str, str]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    failures: list[Failure] = field(default_factory=list)

    def find(self, aggregation: str, seasonality: str, granularity: str = "single50",
             comparison: str = "pareto", epsilon: float | None = None) -> CombinationResult:
        for c in self.combinations:
            if (c.aggregation, c.seasonality, c.granularity, c.comparator.kind) == \
                    (aggregation, seasonality, granularity, comparison) and \
                    (epsilon is None or c.comparator.epsilon == epsilon):
                return c
        raise KeyError((aggregation, seasonality, granularity, comparison, epsilon))


def _segment_around(series: ProcessedSeries, start: date, max_gap: int) -> ProcessedSeries:
    """Largest run of the series without gaps longer than ``max_gap`` that contains ``start``."""
    cuts = [0]
    for i in range(1, len(series.dates)):
        if (series.dates[i] - series.dates[i - 1]).days - 1 > max_gap:
            cuts.append(i)
    cuts.append(len(series.dates))
    for lo, hi in zip(cuts, cuts[1:]):
        if series.dates[lo] <= start <= series.dates[hi - 1]:
            return replace(series, dates=series.dates[lo:hi], values=series.values[lo:hi])
    raise IrreparableGapError(f"{series.key}/{series.category.name}: no repairable segment around {start}")


def comparators(config: RunConfig) -> list[Comparator]:
    out = []
    for kind in config.comparison:
        if kind == "epsilon":
            out += [Comparator("epsilon", e, config.additive_epsilon) for e in config.epsilon]
        else:
            out.append(Comparator(kind))
    return out


def _prepare(result: AnalysisResult, bundles, config: RunConfig):
    """Repair, calibrate and deseasonalize every series of every locality."""
    variants: dict[str, dict] = {s: {} for s in config.seasonality}
    for bundle in bundles:
        start = bundle.calendar.first_restriction
        cov = validate_coverage(bundle.series, bundle.calendar, config.window_length, config.max_gap)
        result.coverage[bundle.key.ident] = {c.value: v.value for c, v in cov.items()}
        for cat, series in bundle.series.items():
            if cat in ANALYSIS_CATEGORIES and cov[cat] is not Coverage.COMPLETE:
                result.warnings.append(f"coverage {bundle.key}/{cat.value}: {cov[cat].value}")
            where = f"{bundle.key}/{cat.value}"
            try:
                s = as_processed(series)
                try:
                    s = repair_gaps(s, config.max_gap)
                except IrreparableGapError as exc:
                    seg = _segment_around(s, start, config.max_gap)
                    result.warnings.append(f"repair {where}: {exc}; using {seg.dates[0]}..{seg.dates[-1]}")
                    s = repair_gaps(seg, config.max_gap)
                cal = calibrate(s, start)
                result.raw[(bundle.key, cat)] = cal
                if "ma" in variants:
                    variants["ma"][(bundle.key, cat)] = moving_average(cal, config.ma_window, config.ma_centered)
                if "trend" in variants:
                    variants["trend"][(bundle.key, cat)] = stl_trend(cal, config.stl_period, config.stl)
            except (ValueError, ArithmeticError) as exc:
                if cat in ANALYSIS_CATEGORIES:
                    result.failures.append(Failure(f"preprocess {where}", str(exc)))
                else:
                    result.warnings.append(f"preprocess {where}: {exc}")
    result.processed = variants


def _dense_ranks(values: dict[LocalityKey, float]) -> dict[LocalityKey, int]:
    order = sorted(set(values.values()))
    rank = {v: i + 1 for i, v in enumerate(order)}
    return {k: rank[v] for k, v in values.items()}


def run_pipeline(config: RunConfig, dataset: CmrDataset | None = None,
                 calendar: RestrictionCalendar | None = None) -> AnalysisResult:
    """Run every requested factor combination.

    Failures of one combination are recorded in ``result.failures``; the
    remaining combinations still run. Config and input errors raise.
    """
    config.validate()
    if dataset is None or calendar is None:
        loaded = load_inputs(config)
        dataset = loaded[0] if dataset is None else dataset
        calendar = loaded[1] if calendar is None else calendar
    bundles = select_localities(dataset, calendar, config.localities)
    keys = [b.key for b in bundles]
    result = AnalysisResult(config, config.hash(), keys, {b.key: b.calendar for b in bundles})
    for err in dataset.errors:
        result.warnings.append(f"input {err}")

    _prepare(result, bundles, config)
    starts = {b.key: b.calendar.first_restriction for b in bundles}
    comps = comparators(config)
    categories = [PlaceCategory.parse(c) for c in config.categories] or list(ANALYSIS_CATEGORIES)

    for season in config.seasonality:
        series = result.processed[season]
        for agg in config.aggregation:
            # single-category tables and the unscaled radar use unscaled windows
            try:
                build = build_objective_vectors(series, starts, agg, window_length=config.window_length,
                                                scale=False, pinned_shift=config.pin_shift)
                result.unscaled[(season, agg)] = build
                for cat in categories:
                    idx = ANALYSIS_CATEGORIES.index(cat)
                    values = {v.key: v.components[idx] for v in build.vectors[0]}
                    result.category_rankings.append(
                        CategoryRanking(cat, season, agg, values, _dense_ranks(values), build.shift))
            except (ValueError, ArithmeticError, KeyError) as exc:
                result.failures.append(Failure(f"category tables {agg}/{season}", _describe(exc)))

            for gran in config.granularity:
                period_length = config.period_length if gran == "five10" else None
                try:
                    build = build_objective_vectors(series, starts, agg, window_length=config.window_length,
                                                    period_length=period_length, scale=True,
                                                    pinned_shift=config.pin_shift)
                except (ValueError, ArithmeticError, KeyError) as exc:
                    result.failures.append(Failure(f"objectives {agg}/{season}/{gran}", _describe(exc)))
                    continue
                for comp in comps:
                    vectors = build.vectors
                    normalized = comp.kind == "epsilon" and agg == "rs"
                    if normalized:
                        # mean rank per day keeps epsilon on one scale across granularities
                        vectors = [[replace(v, components=tuple(c / days for c in v.components))
                                    for v in period] for period, days in zip(vectors, build.period_days)]
                    prov = {"config_hash": result.config_hash, "global_shift": build.shift,
                            "rank_sum_mean_normalized": normalized}
                    with warnings.catch_warnings(record=True) as caught:
                        warnings.simplefilter("always")
                        ranking = rank_run(vectors, comp, prov)
                    combo = CombinationResult(season, gran, agg, comp, vectors, ranking, build.shift,
                                              build.scale_divisors, build.period_days, normalized)
                    for w in caught:
                        result.warnings.append(f"{combo.label}: {w.message}")
                    result.combinations.append(combo)
    log.info("ran %d combinations, %d failures", len(result.combinations), len(result.failures))
    return result


def _describe(exc: BaseException) -> str:
    if isinstance(exc, KeyError):
        key, cat = exc.args[0] if isinstance(exc.args[0], tuple) and len(exc.args[0]) == 2 else (exc.args[0], "")
        return f"missing processed series {key} {getattr(cat, 'value', cat)}".strip()
    return str(exc)


def load_inputs(config: RunConfig) -> tuple[CmrDataset, RestrictionCalendar]:
    try:
        with open(config.data, "rb") as fh:
            dataset = parse_cmr_csv(fh, strict=False)
        with open(config.calendar, "rb") as fh:
            calendar = parse_calendar(fh)
    except OSError as exc:
        raise IngestError(str(exc)) from exc
    return dataset, calendar

