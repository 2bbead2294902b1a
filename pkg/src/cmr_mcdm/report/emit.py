"""Writing ranking tables, result bundles and charts to an output directory."""
from __future__ import annotations

import csv
import io
import json
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from statistics import mean
from typing import Sequence

from ..ingest import ANALYSIS_CATEGORIES, LocalityKey, PlaceCategory
from . import svg
from .pipeline import AnalysisResult, CombinationResult


@dataclass
class RankingTable:
    title: str
    columns: list[str]
    rows: list[LocalityKey]
    cells: dict[tuple[LocalityKey, str], int]
    provenance: dict

    def row(self, key: LocalityKey) -> list[int]:
        return [self.cells[(key, c)] for c in self.columns]


def modal_order(columns: dict[str, dict[LocalityKey, int]], keys: Sequence[LocalityKey]) -> list[LocalityKey]:
    """Sort by modal rank, then mean rank, then key; the smallest of tied modes is used."""

    def sort_key(k: LocalityKey):
        ranks = [col[k] for col in columns.values()]
        counts = Counter(ranks)
        top = max(counts.values())
        mode = min(r for r, c in counts.items() if c == top)
        return (mode, mean(ranks), k.sort_key())

    return sorted(keys, key=sort_key)


def build_table(title: str, columns: dict[str, dict[LocalityKey, int]], keys: Sequence[LocalityKey],
                provenance: dict) -> RankingTable:
    cells = {(k, c): ranks[k] for c, ranks in columns.items() for k in keys}
    return RankingTable(title, list(columns), modal_order(columns, keys), cells, provenance)


def _column_order(result: AnalysisResult) -> list[tuple[str, str]]:
    # aggregation-major, seasonality-minor
    return [(a, s) for a in result.config.aggregation for s in result.config.seasonality]


def ranking_tables(result: AnalysisResult) -> list[RankingTable]:
    """One table per (granularity, comparator, period) with a column per aggregation/seasonality."""
    groups: dict[tuple[str, str], list[CombinationResult]] = {}
    for combo in result.combinations:
        groups.setdefault((combo.granularity, combo.comparator.label), []).append(combo)
    order = {col: i for i, col in enumerate(_column_order(result))}
    tables = []
    for (gran, comp), combos in groups.items():
        combos = sorted(combos, key=lambda c: order[(c.aggregation, c.seasonality)])
        n_periods = len(combos[0].ranking.periods)
        for p in range(n_periods):
            columns = {c.column: c.ranking.periods[p] for c in combos}
            prov = {
                "config_hash": result.config_hash,
                "granularity": gran,
                "comparator": comp,
                "period_index": p,
                "columns": {c.column: _combo_provenance(c) for c in combos},
            }
            tables.append(build_table(f"{gran}_{comp}_p{p}", columns, result.localities, prov))
    return tables


def category_tables(result: AnalysisResult) -> list[RankingTable]:
    by_cat: dict[PlaceCategory, list] = {}
    for cr in result.category_rankings:
        by_cat.setdefault(cr.category, []).append(cr)
    order = {col: i for i, col in enumerate(_column_order(result))}
    tables = []
    for cat, entries in by_cat.items():
        entries = sorted(entries, key=lambda e: order[(e.aggregation, e.seasonality)])
        columns = {e.column: e.ranks for e in entries}
        prov = {
            "config_hash": result.config_hash,
            "category": cat.value,
            "scaled": False,
            "columns": {
                e.column: {
                    "global_shift": e.shift,
                    "values": {k.ident: v for k, v in e.values.items()},
                    "scale_divisors": {f"{k.ident}|{cat.value}": 1.0 for k in e.values},
                }
                for e in entries
            },
        }
        tables.append(build_table(f"category_{cat.value}", columns, result.localities, prov))
    return tables


def _combo_provenance(c: CombinationResult) -> dict:
    return {
        "global_shift": c.shift,
        "scale_divisors": c.scale_divisors,
        "comparator": c.comparator.to_dict(),
        "nonneg_lift": c.ranking.provenance.get("nonneg_lift"),
        "rank_sum_mean_normalized": c.rank_sum_normalized,
        "cycles": c.ranking.cycles,
    }


def table_to_csv(table: RankingTable) -> str:
    buf = io.StringIO()
    buf.write("# provenance: " + json.dumps(table.provenance, sort_keys=True, ensure_ascii=False) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["locality", "name", *table.columns])
    for key in table.rows:
        writer.writerow([key.ident, key.name, *table.row(key)])
    return buf.getvalue()


def table_to_json(table: RankingTable) -> str:
    doc = {
        "title": table.title,
        "provenance": table.provenance,
        "columns": table.columns,
        "rows": [{"locality": k.ident, "name": k.name, "cells": dict(zip(table.columns, table.row(k)))}
                 for k in table.rows],
    }
    return json.dumps(doc, indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def read_table_csv(text: str) -> tuple[list[str], dict[str, list[int]]]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    columns = rows[0][2:]
    return columns, {r[0]: [int(v) for v in r[2:]] for r in rows[1:]}


def emit_ranking_table(table: RankingTable, directory: Path, fmt: str) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        path, text = directory / f"{slug(table.title)}.csv", table_to_csv(table)
    elif fmt == "json":
        path, text = directory / f"{slug(table.title)}.json", table_to_json(table)
    else:
        raise ValueError(f"unsupported table format {fmt!r}")
    path.write_text(text, encoding="utf-8", newline="")
    return path


def slug(text: str) -> str:
    text = unicodedata.normalize("NFKD", text).encode("ascii", "ignore").decode()
    return re.sub(r"[^A-Za-z0-9.]+", "_", text).strip("_")


def _provenance_meta(result: AnalysisResult, combo_like: dict) -> dict:
    return {"config_hash": result.config_hash, **combo_like}


def _short_labels() -> list[str]:
    return [c.label for c in ANALYSIS_CATEGORIES]


def emit_radar_chart(result: AnalysisResult, season: str, agg: str, scaled: bool,
                     directory: Path) -> Path | None:
    if scaled:
        combos = [c for c in result.combinations
                  if (c.seasonality, c.aggregation, c.granularity) == (season, agg, "single50")
                  and not c.rank_sum_normalized]
        if not combos:
            return None
        c = combos[0]
        vectors, shift, divisors = c.vectors[0], c.shift, c.scale_divisors
    else:
        build = result.unscaled.get((season, agg))
        if build is None:
            return None
        vectors, shift, divisors = build.vectors[0], build.shift, build.scale_divisors
    kind = "scaled" if scaled else "original"
    text = svg.radar_chart(
        [v.key.name for v in vectors], [v.components for v in vectors], _short_labels(),
        title=f"{agg.upper()} / {season} ({kind})",
        metadata=_provenance_meta(result, {"global_shift": shift, "scale_divisors": divisors,
                                           "aggregation": agg, "seasonality": season, "scaled": scaled}),
    )
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"radar_{kind}_{agg}_{season}.svg"
    path.write_text(text, encoding="utf-8", newline="")
    return path


def emit_parallel_coordinates(result: AnalysisResult, combo: CombinationResult, directory: Path) -> Path | None:
    periods = combo.ranking.periods
    if len(periods) < 2:
        return None
    keys = result.localities
    offsets = [sum(combo.period_days[:p]) for p in range(len(periods))]
    text = svg.parallel_coordinates(
        [k.name for k in keys], [[periods[p][k] for p in range(len(periods))] for k in keys],
        [f"day {o}" for o in offsets],
        title=f"Dominance depth: {combo.aggregation.upper()} / {combo.seasonality} / {combo.comparator.label}",
        metadata=_provenance_meta(result, _combo_provenance(combo)),
    )
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"parallel_{slug(combo.comparator.label)}_{combo.aggregation}_{combo.seasonality}.svg"
    path.write_text(text, encoding="utf-8", newline="")
    return path


def emit_series_plots(result: AnalysisResult, directory: Path) -> list[Path]:
    """Per locality: all raw categories, and per category a calibrated/MA/trend overlay."""
    cfg = result.config
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    meta = {"config_hash": result.config_hash, "global_shift": None, "scale_divisors": {}}
    for key in result.localities:
        entry = result.calendar[key]
        window = (entry.first_restriction, cfg.window_length)
        lines = []
        for cat in PlaceCategory:
            s = result.raw.get((key, cat))
            if s is not None:
                lines.append((cat.label, s.dates, [v + s.calibration_offset for v in s.values]))
        text = svg.series_plot(lines, entry.first_restriction, entry.first_relaxation, window,
                               title=f"{key.name}: raw mobility (uncalibrated)",
                               metadata={**meta, "locality": key.ident, "calibrated": False})
        path = directory / f"series_{slug(key.ident)}_raw.svg"
        path.write_text(text, encoding="utf-8", newline="")
        paths.append(path)
        for cat in ANALYSIS_CATEGORIES:
            s = result.raw.get((key, cat))
            if s is None:
                continue
            lines = [("calibrated", s.dates, s.values)]
            for variant in cfg.seasonality:
                p = result.processed.get(variant, {}).get((key, cat))
                if p is not None:
                    lines.append((variant, p.dates, p.values))
            text = svg.series_plot(
                lines, entry.first_restriction, entry.first_relaxation, window,
                title=f"{key.name}: {cat.label} after calibration",
                metadata={**meta, "locality": key.ident, "category": cat.value,
                          "calibration_offset": s.calibration_offset})
            path = directory / f"series_{slug(key.ident)}_{cat.value}.svg"
            path.write_text(text, encoding="utf-8", newline="")
            paths.append(path)
    return paths


def result_bundle(result: AnalysisResult) -> dict:
    return {
        # the output directory is left out so bundles written to different places compare equal
        "config": {k: v for k, v in result.config.to_dict().items() if k != "out"},
        "config_hash": result.config_hash,
        "localities": [
            {"locality": k.ident, "name": k.name, "country": k.country_name,
             "first_restriction": result.calendar[k].first_restriction.isoformat(),
             "first_relaxation": (result.calendar[k].first_relaxation.isoformat()
                                  if result.calendar[k].first_relaxation else None),
             "coverage": result.coverage.get(k.ident, {}),
             "calibration_offsets": {c.value: result.raw[(k, c)].calibration_offset
                                     for c in PlaceCategory if (k, c) in result.raw}}
            for k in result.localities
        ],
        "categories": [c.value for c in ANALYSIS_CATEGORIES],
        "combinations": [
            {
                "label": c.label,
                "seasonality": c.seasonality,
                "granularity": c.granularity,
                "aggregation": c.aggregation,
                "period_days": c.period_days,
                "objective_vectors": [{v.key.ident: list(v.components) for v in period} for period in c.vectors],
                "depths": [{k.ident: d for k, d in p.items()} for p in c.ranking.periods],
                **_combo_provenance(c),
            }
            for c in result.combinations
        ],
        "category_rankings": [
            {"category": cr.category.value, "seasonality": cr.seasonality, "aggregation": cr.aggregation,
             "global_shift": cr.shift, "values": {k.ident: v for k, v in cr.values.items()},
             "ranks": {k.ident: r for k, r in cr.ranks.items()}}
            for cr in result.category_rankings
        ],
        "warnings": result.warnings,
        "failures": [{"what": f.what, "error": f.error} for f in result.failures],
    }


def emit_all(result: AnalysisResult, out: Path, formats: Sequence[str]) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in ("csv", "json"):
        if fmt in formats:
            for table in ranking_tables(result):
                written.append(emit_ranking_table(table, out / "rankings", fmt))
            for table in category_tables(result):
                written.append(emit_ranking_table(table, out / "categories", fmt))
    if "json" in formats:
        path = out / "result.json"
        path.write_text(json.dumps(result_bundle(result), indent=1, sort_keys=True, ensure_ascii=False) + "\n",
                        encoding="utf-8")
        written.append(path)
    if "svg" in formats:
        charts = out / "charts"
        for season in result.config.seasonality:
            for agg in result.config.aggregation:
                for scaled in (False, True):
                    p = emit_radar_chart(result, season, agg, scaled, charts)
                    if p:
                        written.append(p)
        for combo in result.combinations:
            if combo.granularity == "five10":
                p = emit_parallel_coordinates(result, combo, charts)
                if p:
                    written.append(p)
        if result.config.series_plots:
            written += emit_series_plots(result, out / "series")
    return written
