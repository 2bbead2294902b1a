"""Parsing of Community Mobility Report CSV files and restriction calendars.

Missing percent cells are kept as absent observations; they are never
coerced to zero, since zero is the baseline value.
"""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import IO, Iterable, Sequence

CMR_START = date(2020, 2, 15)


class PlaceCategory(enum.Enum):
    RETAIL_RECREATION = "retail_and_recreation"
    GROCERY_PHARMACY = "grocery_and_pharmacy"
    PARKS = "parks"
    TRANSIT_STATIONS = "transit_stations"
    WORKPLACES = "workplaces"
    RESIDENTIAL = "residential"

    @property
    def column(self) -> str:
        return f"{self.value}_percent_change_from_baseline"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def analysis_set(cls) -> tuple[PlaceCategory, ...]:
        """The five non-residential categories, in fixed order."""
        return ANALYSIS_CATEGORIES

    @classmethod
    def parse(cls, text: str) -> PlaceCategory:
        norm = text.strip().lower().replace("&", "and").replace(" ", "_").replace("-", "_")
        for cat in cls:
            if norm in (cat.value, cat.name.lower(), cat.column):
                return cat
        aliases = {"retail": cls.RETAIL_RECREATION, "grocery": cls.GROCERY_PHARMACY,
                   "transit": cls.TRANSIT_STATIONS}
        if norm in aliases:
            return aliases[norm]
        raise ValueError(f"unknown place category {text!r}")


_LABELS = {
    PlaceCategory.RETAIL_RECREATION: "Retail & recreation",
    PlaceCategory.GROCERY_PHARMACY: "Grocery & pharmacy",
    PlaceCategory.PARKS: "Parks",
    PlaceCategory.TRANSIT_STATIONS: "Transit stations",
    PlaceCategory.WORKPLACES: "Workplaces",
    PlaceCategory.RESIDENTIAL: "Residential",
}

ANALYSIS_CATEGORIES = tuple(c for c in PlaceCategory if c is not PlaceCategory.RESIDENTIAL)

KEY_COLUMNS = (
    "country_region_code",
    "country_region",
    "sub_region_1",
    "sub_region_2",
    "iso_3166_2_code",
    "census_fips_code",
)
CMR_COLUMNS = KEY_COLUMNS + ("date",) + tuple(c.column for c in PlaceCategory)
CALENDAR_COLUMNS = (
    "country_region_code",
    "sub_region_1",
    "sub_region_2",
    "first_restriction",
    "first_relaxation",
)


class IngestError(Exception):
    """Base class for input errors."""


class CmrFormatError(IngestError):
    pass


class RowError(IngestError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class DuplicateRecordError(RowError):
    pass


class CalendarError(IngestError):
    pass


class MissingLocalityError(IngestError):
    def __init__(self, key: LocalityKey, where: str):
        super().__init__(f"locality {key} not found in {where}")
        self.key = key


class DuplicateRequestError(IngestError):
    pass


@dataclass(frozen=True)
class LocalityKey:
    """Identity of a locality.

    Equality and hashing use only the country code and the two sub-region
    names, which is what the calendar file carries.
    """

    country_code: str
    sub_region_1: str = ""
    sub_region_2: str = ""
    country_name: str = field(default="", compare=False)
    iso_3166_2_code: str = field(default="", compare=False)
    census_fips_code: str = field(default="", compare=False)

    def __post_init__(self):
        for name in ("country_code", "sub_region_1", "sub_region_2", "country_name",
                     "iso_3166_2_code", "census_fips_code"):
            object.__setattr__(self, name, (getattr(self, name) or "").strip())
        if not self.country_code:
            raise ValueError("country code must be non-empty")
        if self.sub_region_2 and not self.sub_region_1:
            raise ValueError("sub_region_2 given without sub_region_1")

    @property
    def level(self) -> str:
        if not self.sub_region_1:
            return "country"
        if not self.sub_region_2:
            return "region"
        return "subregion"

    @property
    def name(self) -> str:
        """Most specific human-readable name."""
        return self.sub_region_2 or self.sub_region_1 or self.country_name or self.country_code

    @property
    def ident(self) -> str:
        return ":".join(p for p in (self.country_code, self.sub_region_1, self.sub_region_2) if p)

    @classmethod
    def parse(cls, text: str) -> LocalityKey:
        """Parse ``CC``, ``CC:region`` or ``CC:region:subregion``."""
        parts = [p.strip() for p in text.split(":")]
        if not 1 <= len(parts) <= 3 or not parts[0]:
            raise ValueError(f"bad locality key {text!r}")
        parts += [""] * (3 - len(parts))
        return cls(parts[0], parts[1], parts[2])

    def sort_key(self) -> tuple[str, str, str]:
        return (self.country_code, self.sub_region_1, self.sub_region_2)

    def __str__(self) -> str:
        return self.ident


@dataclass(frozen=True)
class LocalityCategorySeries:
    key: LocalityKey
    category: PlaceCategory
    dates: tuple[date, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.dates) != len(self.values):
            raise ValueError("dates and values differ in length")
        for a, b in zip(self.dates, self.dates[1:]):
            if b <= a:
                raise ValueError(f"{self.key}/{self.category.name}: dates not strictly increasing at {b}")
        if self.dates and self.dates[0] < CMR_START:
            raise ValueError(f"{self.key}: series starts before {CMR_START}")

    def __len__(self) -> int:
        return len(self.dates)

    def as_dict(self) -> dict[date, float]:
        return dict(zip(self.dates, self.values))


@dataclass(frozen=True)
class CalendarEntry:
    first_restriction: date
    first_relaxation: date | None = None

    def __post_init__(self):
        if self.first_relaxation is not None and self.first_relaxation <= self.first_restriction:
            raise CalendarError(
                f"relaxation {self.first_relaxation} not after restriction {self.first_restriction}")


@dataclass(frozen=True)
class RestrictionCalendar:
    entries: dict[LocalityKey, CalendarEntry]

    def __getitem__(self, key: LocalityKey) -> CalendarEntry:
        return self.entries[key]

    def __contains__(self, key: object) -> bool:
        return key in self.entries

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class CmrDataset:
    """Parsed CMR file: one series per (locality, category) encountered."""

    series: dict[tuple[LocalityKey, PlaceCategory], LocalityCategorySeries]
    localities: tuple[LocalityKey, ...]
    rows_read: int = 0
    rows_accepted: int = 0
    errors: list[RowError] = field(default_factory=list)

    def get(self, key: LocalityKey, category: PlaceCategory) -> LocalityCategorySeries:
        return self.series[(key, category)]

    def __contains__(self, key: object) -> bool:
        return key in self._locality_set

    @property
    def _locality_set(self) -> frozenset[LocalityKey]:
        return frozenset(self.localities)


@dataclass(frozen=True)
class LocalityBundle:
    key: LocalityKey
    series: dict[PlaceCategory, LocalityCategorySeries]
    calendar: CalendarEntry


def _text(stream: IO) -> IO[str]:
    if isinstance(stream, (bytes, bytearray)):
        return io.StringIO(stream.decode("utf-8-sig"))
    if isinstance(stream, io.TextIOBase) or hasattr(stream, "encoding"):
        return stream
    return io.TextIOWrapper(stream, encoding="utf-8-sig", newline="")


def _parse_date(text: str, line: int) -> date:
    try:
        return date.fromisoformat(text.strip())
    except ValueError:
        raise RowError(line, f"unparsable date {text!r}") from None


def _parse_value(text: str, line: int, column: str) -> float | None:
    text = text.strip()
    if not text:
        return None
    try:
        return float(text)
    except ValueError:
        raise RowError(line, f"unparsable number {text!r} in {column}") from None


def parse_cmr_csv(stream, strict: bool = True) -> CmrDataset:
    """Parse a CMR global CSV.

    With ``strict=False`` bad rows are collected in ``dataset.errors``
    instead of raising, so that ``rows_read == rows_accepted + len(errors)``.
    """
    reader = csv.reader(_text(stream))
    try:
        header = [h.strip().lstrip("﻿") for h in next(reader)]
    except StopIteration:
        raise CmrFormatError("empty file") from None
    missing = [c for c in CMR_COLUMNS if c not in header]
    if missing:
        raise CmrFormatError(f"missing column(s): {', '.join(missing)}")
    idx = {c: header.index(c) for c in CMR_COLUMNS}

    cells: dict[tuple[LocalityKey, PlaceCategory], dict[date, float]] = {}
    localities: dict[LocalityKey, None] = {}
    errors: list[RowError] = []
    rows_read = 0

    for line, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        rows_read += 1
        try:
            if len(row) < len(header):
                raise RowError(line, f"expected {len(header)} fields, got {len(row)}")
            try:
                key = LocalityKey(
                    row[idx["country_region_code"]],
                    row[idx["sub_region_1"]],
                    row[idx["sub_region_2"]],
                    country_name=row[idx["country_region"]],
                    iso_3166_2_code=row[idx["iso_3166_2_code"]],
                    census_fips_code=row[idx["census_fips_code"]],
                )
            except ValueError as exc:
                raise RowError(line, str(exc)) from None
            day = _parse_date(row[idx["date"]], line)
            if day < CMR_START:
                raise RowError(line, f"date {day} precedes CMR start {CMR_START}")
            parsed = {cat: _parse_value(row[idx[cat.column]], line, cat.column) for cat in PlaceCategory}
            for cat, value in parsed.items():
                if value is not None and day in cells.get((key, cat), ()):
                    raise DuplicateRecordError(line, f"duplicate record {key}/{cat.value}/{day}")
        except RowError as exc:
            if strict:
                raise
            errors.append(exc)
            continue
        localities.setdefault(key, None)
        for cat, value in parsed.items():
            slot = cells.setdefault((key, cat), {})
            if value is not None:
                slot[day] = value

    series = {}
    for key in localities:
        for cat in PlaceCategory:
            obs = cells.get((key, cat), {})
            days = tuple(sorted(obs))
            series[(key, cat)] = LocalityCategorySeries(key, cat, days, tuple(obs[d] for d in days))
    return CmrDataset(series, tuple(localities), rows_read, rows_read - len(errors), errors)


def _fmt_value(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def write_cmr_csv(dataset: CmrDataset, out: IO[str]) -> None:
    """Serialize a dataset in CMR column order; one row per locality-date."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CMR_COLUMNS)
    for key in dataset.localities:
        per_cat = {cat: dataset.get(key, cat).as_dict() for cat in PlaceCategory}
        days = sorted(set().union(*per_cat.values()))
        for day in days:
            values = [per_cat[cat].get(day) for cat in PlaceCategory]
            writer.writerow([
                key.country_code, key.country_name, key.sub_region_1, key.sub_region_2,
                key.iso_3166_2_code, key.census_fips_code, day.isoformat(),
                *("" if v is None else _fmt_value(v) for v in values),
            ])


def parse_calendar(stream) -> RestrictionCalendar:
    """Parse a restriction calendar CSV. Extra columns are ignored."""
    reader = csv.DictReader(_text(stream))
    header = [h.strip() for h in (reader.fieldnames or [])]
    missing = [c for c in CALENDAR_COLUMNS if c not in header and c != "first_relaxation"]
    if missing:
        raise CmrFormatError(f"calendar missing column(s): {', '.join(missing)}")
    entries: dict[LocalityKey, CalendarEntry] = {}
    for line, row in enumerate(reader, start=2):
        row = {(k or "").strip(): (v or "") for k, v in row.items()}
        if not any(v.strip() for v in row.values()):
            continue
        try:
            key = LocalityKey(row["country_region_code"], row["sub_region_1"], row["sub_region_2"])
        except ValueError as exc:
            raise CalendarError(f"line {line}: {exc}") from None
        restriction = _parse_date(row["first_restriction"], line)
        relax_text = row.get("first_relaxation", "").strip()
        relaxation = _parse_date(relax_text, line) if relax_text else None
        if key in entries:
            raise CalendarError(f"line {line}: duplicate calendar entry for {key}")
        try:
            entries[key] = CalendarEntry(restriction, relaxation)
        except CalendarError as exc:
            raise CalendarError(f"line {line}: {exc}") from None
    return RestrictionCalendar(entries)


def select_localities(dataset: CmrDataset, calendar: RestrictionCalendar,
                      keys: Sequence[LocalityKey]) -> list[LocalityBundle]:
    """Bundle all six category series and the calendar entry per requested key."""
    seen = set()
    for key in keys:
        if key in seen:
            raise DuplicateRequestError(f"locality {key} requested twice")
        seen.add(key)
    bundles = []
    for key in keys:
        if key not in dataset:
            raise MissingLocalityError(key, "dataset")
        if key not in calendar:
            raise MissingLocalityError(key, "calendar")
        series = {cat: dataset.get(key, cat) for cat in PlaceCategory}
        # carry the dataset's descriptive fields (country name etc.)
        full_key = next(s.key for s in series.values())
        bundles.append(LocalityBundle(full_key, series, calendar[key]))
    return bundles


class Coverage(enum.Enum):
    COMPLETE = "complete"
    REPAIRABLE = "repairable"
    IRREPARABLE = "irreparable"


def _missing_runs(present: set[date], first: date, last: date) -> list[tuple[date, int]]:
    runs = []
    day, start, length = first, None, 0
    while day <= last:
        if day in present:
            if start is not None:
                runs.append((start, length))
                start, length = None, 0
        else:
            if start is None:
                start = day
            length += 1
        day += timedelta(days=1)
    if start is not None:
        runs.append((start, length))
    return runs


def window_coverage(series: LocalityCategorySeries, start: date, window_length: int,
                    max_gap: int) -> Coverage:
    present = set(series.dates)
    end = start + timedelta(days=window_length - 1)
    if not present or series.dates[0] > start or series.dates[-1] < end:
        # window runs past a leading or trailing edge; edges are never filled
        return Coverage.IRREPARABLE
    runs = _missing_runs(present, series.dates[0], series.dates[-1])
    touching = [(s, n) for s, n in runs if s <= end and s + timedelta(days=n - 1) >= start]
    if not touching:
        return Coverage.COMPLETE
    if all(n <= max_gap for _, n in touching):
        return Coverage.REPAIRABLE
    return Coverage.IRREPARABLE


def validate_coverage(series: dict[PlaceCategory, LocalityCategorySeries] | Iterable[LocalityCategorySeries],
                      entry: CalendarEntry, window_length: int = 50,
                      max_gap: int = 3) -> dict[PlaceCategory, Coverage]:
    if isinstance(series, dict):
        series = series.values()
    return {s.category: window_coverage(s, entry.first_restriction, window_length, max_gap)
            for s in series}
