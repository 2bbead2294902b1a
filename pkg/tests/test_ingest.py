import io
from datetime import date, timedelta

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmr_mcdm.ingest import (
    ANALYSIS_CATEGORIES,
    CMR_COLUMNS,
    CalendarError,
    CmrFormatError,
    Coverage,
    DuplicateRecordError,
    DuplicateRequestError,
    LocalityCategorySeries,
    LocalityKey,
    MissingLocalityError,
    PlaceCategory,
    RowError,
    parse_calendar,
    parse_cmr_csv,
    select_localities,
    validate_coverage,
    window_coverage,
    write_cmr_csv,
)

from conftest import DATA

HEADER = ",".join(CMR_COLUMNS)
LOMBARDY = LocalityKey("IT", "Lombardy")
NZ = LocalityKey("NZ")


def csv_bytes(*rows):
    return io.BytesIO(("\n".join((HEADER,) + rows) + "\n").encode())


def test_place_categories():
    assert len(PlaceCategory) == 6
    assert PlaceCategory.analysis_set() == (
        PlaceCategory.RETAIL_RECREATION, PlaceCategory.GROCERY_PHARMACY, PlaceCategory.PARKS,
        PlaceCategory.TRANSIT_STATIONS, PlaceCategory.WORKPLACES)
    assert PlaceCategory.RESIDENTIAL not in ANALYSIS_CATEGORIES
    assert PlaceCategory.parse("Grocery & pharmacy") is PlaceCategory.GROCERY_PHARMACY
    assert PlaceCategory.parse("workplaces") is PlaceCategory.WORKPLACES


def test_locality_key_levels():
    assert LocalityKey("IT").level == "country"
    assert LocalityKey("IT", "Lombardy").level == "region"
    with pytest.raises(ValueError):
        LocalityKey("US", "", "Kings County")
    assert LocalityKey.parse("IT:Lombardy") == LocalityKey("IT", " Lombardy ", country_name="x")


def test_region_row_maps_fields():
    ds = parse_cmr_csv(csv_bytes("IT,Italy,Lombardy,,IT-25,,2020-02-23,-12,-5,18,-10,-8,3"))
    key = ds.localities[0]
    assert key == LOMBARDY and key.level == "region"
    assert key.country_name == "Italy" and key.iso_3166_2_code == "IT-25"
    s = ds.get(LOMBARDY, PlaceCategory.RETAIL_RECREATION)
    assert s.dates == (date(2020, 2, 23),) and s.values == (-12.0,)
    assert ds.get(LOMBARDY, PlaceCategory.RESIDENTIAL).values == (3.0,)


def test_country_row():
    ds = parse_cmr_csv(csv_bytes("NZ,New Zealand,,,,,2020-03-01,1,2,3,4,5,6"))
    assert ds.localities[0].level == "country"


def test_sample_fixture_hand_counts():
    with open(DATA / "cmr_sample.csv", "rb") as fh:
        ds = parse_cmr_csv(fh)
    assert ds.rows_read == 20 and ds.rows_accepted == 20 and not ds.errors
    assert ds.localities == (LOMBARDY, NZ)
    counts = {(k.ident, c): len(s) for (k, c), s in ds.series.items()}
    expected = {(k, c): 10 for k in ("IT:Lombardy", "NZ") for c in PlaceCategory}
    expected[("IT:Lombardy", PlaceCategory.PARKS)] = 8
    expected[("NZ", PlaceCategory.TRANSIT_STATIONS)] = 7
    expected[("NZ", PlaceCategory.RESIDENTIAL)] = 9
    assert counts == expected
    parks = ds.get(LOMBARDY, PlaceCategory.PARKS).as_dict()
    assert date(2020, 2, 16) not in parks and date(2020, 2, 20) not in parks
    assert ds.get(NZ, PlaceCategory.RETAIL_RECREATION).as_dict()[date(2020, 2, 21)] == 1.5


def test_missing_cell_is_absent_not_zero():
    ds = parse_cmr_csv(csv_bytes(
        "IT,Italy,Lombardy,,,,2020-03-01,1,1,,1,1,1",
        "IT,Italy,Lombardy,,,,2020-03-02,1,1,0,1,1,1",
    ))
    parks = ds.get(LOMBARDY, PlaceCategory.PARKS)
    assert parks.dates == (date(2020, 3, 2),) and parks.values == (0.0,)


def test_header_missing_column():
    bad = HEADER.replace(",parks_percent_change_from_baseline", "")
    with pytest.raises(CmrFormatError, match="parks_percent_change_from_baseline"):
        parse_cmr_csv(io.BytesIO((bad + "\n").encode()))


def test_row_errors_carry_line_numbers():
    with pytest.raises(RowError, match="line 3"):
        parse_cmr_csv(csv_bytes("NZ,NZ,,,,,2020-03-01,1,2,3,4,5,6", "NZ,NZ,,,,,2020-13-01,1,2,3,4,5,6"))
    with pytest.raises(RowError, match="line 2.*unparsable number"):
        parse_cmr_csv(csv_bytes("NZ,NZ,,,,,2020-03-01,1,x,3,4,5,6"))


def test_duplicate_record():
    with pytest.raises(DuplicateRecordError):
        parse_cmr_csv(csv_bytes("NZ,NZ,,,,,2020-03-01,1,2,3,4,5,6", "NZ,NZ,,,,,2020-03-01,1,2,3,4,5,6"))
    # complementary cells on the same date are not duplicates
    ds = parse_cmr_csv(csv_bytes("NZ,NZ,,,,,2020-03-01,1,,,,,", "NZ,NZ,,,,,2020-03-01,,2,,,,"))
    assert len(ds.get(NZ, PlaceCategory.GROCERY_PHARMACY)) == 1


def test_non_strict_totality():
    ds = parse_cmr_csv(csv_bytes(
        "NZ,NZ,,,,,2020-03-01,1,2,3,4,5,6",
        "NZ,NZ,,,,,bad-date,1,2,3,4,5,6",
        "NZ,NZ,,,,,2020-03-02,1,2,3,4,5,6",
        "NZ,NZ,,,,,2020-03-02,1,2,3,4,5,6",
        "NZ,NZ,,,,,2020-02-01,1,2,3,4,5,6",
    ), strict=False)
    assert ds.rows_read == 5
    assert ds.rows_accepted + len(ds.errors) == ds.rows_read
    assert [e.line for e in ds.errors] == [3, 5, 6]


def test_calendar_parsing():
    with open(DATA / "calendar_sample.csv", "rb") as fh:
        cal = parse_calendar(fh)
    assert cal[LOMBARDY].first_restriction == date(2020, 2, 23)
    assert cal[LOMBARDY].first_relaxation == date(2020, 5, 11)
    assert cal[NZ].first_relaxation is None
    head = "country_region_code,sub_region_1,sub_region_2,first_restriction,first_relaxation\n"
    with pytest.raises(CalendarError):
        parse_calendar(io.StringIO(head + "IT,Lombardy,,2020-02-23,2020-02-23\n"))
    with pytest.raises(CalendarError, match="duplicate"):
        parse_calendar(io.StringIO(head + "NZ,,,2020-03-01,\nNZ,,,2020-03-02,\n"))


def test_select_localities():
    with open(DATA / "cmr_sample.csv", "rb") as fh:
        ds = parse_cmr_csv(fh)
    with open(DATA / "calendar_sample.csv", "rb") as fh:
        cal = parse_calendar(fh)
    bundles = select_localities(ds, cal, [NZ, LOMBARDY])
    assert [b.key for b in bundles] == [NZ, LOMBARDY]
    assert all(len(b.series) == 6 for b in bundles)
    assert bundles[1].key.country_name == "Italy"
    with pytest.raises(DuplicateRequestError):
        select_localities(ds, cal, [NZ, NZ])
    with pytest.raises(MissingLocalityError, match="calendar"):
        select_localities(ds, parse_calendar(io.StringIO(
            "country_region_code,sub_region_1,sub_region_2,first_restriction,first_relaxation\n"
            "NZ,,,2020-02-20,\n")), [LOMBARDY])
    with pytest.raises(MissingLocalityError, match="dataset"):
        select_localities(ds, cal, [LocalityKey("FR")])


def _series(days_present, start=date(2020, 3, 1)):
    dates = tuple(start + timedelta(days=d) for d in days_present)
    return LocalityCategorySeries(NZ, PlaceCategory.PARKS, dates, tuple(float(d) for d in days_present))


def test_validate_coverage_levels():
    start = date(2020, 3, 11)
    full = _series(range(0, 80))
    one_gap = _series([d for d in range(80) if d != 30])
    long_gap = _series([d for d in range(80) if not 30 <= d < 40])
    assert window_coverage(full, start, 50, 3) is Coverage.COMPLETE
    assert window_coverage(one_gap, start, 50, 3) is Coverage.REPAIRABLE
    assert window_coverage(long_gap, start, 50, 3) is Coverage.IRREPARABLE
    assert window_coverage(_series(range(0, 20)), start, 50, 3) is Coverage.IRREPARABLE
    from cmr_mcdm.ingest import CalendarEntry
    report = validate_coverage([full, one_gap], CalendarEntry(start), 50, 3)
    assert set(report.values()) <= {Coverage.COMPLETE, Coverage.REPAIRABLE}


day_values = st.one_of(st.none(), st.integers(-100, 300), st.floats(-100, 300, allow_nan=False).map(lambda v: round(v, 2)))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["IT:Lombardy", "NZ", "BR:State of São Paulo"]),
                          st.integers(0, 40), st.lists(day_values, min_size=6, max_size=6)),
                min_size=1, max_size=40))
def test_round_trip(rows):
    seen, lines = set(), []
    for ident, day, vals in rows:
        if (ident, day) in seen or all(v is None for v in vals):
            continue
        seen.add((ident, day))
        key = LocalityKey.parse(ident)
        cells = ["" if v is None else repr(float(v)) for v in vals]
        lines.append(f"{key.country_code},Name,{key.sub_region_1},,,,"
                     f"{(date(2020, 2, 15) + timedelta(days=day)).isoformat()}," + ",".join(cells))
    if not lines:
        return
    first = parse_cmr_csv(csv_bytes(*lines))
    buf = io.StringIO()
    write_cmr_csv(first, buf)
    second = parse_cmr_csv(io.BytesIO(buf.getvalue().encode()))
    assert second.localities == first.localities
    assert second.series == first.series
