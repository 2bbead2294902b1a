from __future__ import annotations

import io
from datetime import date, timedelta
from pathlib import Path

import numpy as np
import pytest

from cmr_mcdm.ingest import CMR_COLUMNS, LocalityKey, PlaceCategory

DATA = Path(__file__).parent / "data"

# code, country name, region, restriction, relaxation, post-restriction drop level (percent points)
SYNTHETIC_REGIONS = [
    ("IT", "Italy", "Lombardy", date(2020, 2, 23), date(2020, 5, 11), -60.0),
    ("FR", "France", "Île-de-France", date(2020, 3, 16), date(2020, 5, 11), -70.0),
    ("US", "United States", "New York", date(2020, 3, 18), date(2020, 5, 15), -40.0),
    ("BR", "Brazil", "State of São Paulo", date(2020, 3, 16), date(2020, 6, 1), -48.0),
    ("BR", "Brazil", "State of Amazonas", date(2020, 3, 16), date(2020, 6, 1), -45.0),
]


def synthetic_cmr(regions=SYNTHETIC_REGIONS, seed: int = 7, end: date = date(2020, 8, 16),
                  drop_cells: int = 0) -> tuple[str, str]:
    """CMR-format CSV and calendar CSV for made-up regions.

    Each category dips after the restriction date to a locality-specific
    level, with weekday seasonality and integer-rounded noise.
    """
    rng = np.random.default_rng(seed)
    start = date(2020, 2, 15)
    n_days = (end - start).days + 1
    days = [start + timedelta(days=i) for i in range(n_days)]
    out = io.StringIO()
    out.write(",".join(CMR_COLUMNS) + "\n")
    cal = io.StringIO()
    cal.write("country_region_code,sub_region_1,sub_region_2,first_restriction,first_relaxation\n")
    for code, country, region, restr, relax, level in regions:
        cal.write(f"{code},{region},,{restr.isoformat()},{relax.isoformat() if relax else ''}\n")
        t = np.arange(n_days)
        k = (np.array([(d - restr).days for d in days]))
        cols = []
        for ci, cat in enumerate(PlaceCategory):
            cat_level = level * (0.6 + 0.15 * ci) * (-0.3 if cat is PlaceCategory.RESIDENTIAL else 1.0)
            ramp = np.clip(k / 10.0, 0.0, 1.0) * cat_level
            recovery = np.clip((k - 60) / 80.0, 0.0, 1.0) * (-cat_level * 0.6)
            weekly = (4 + ci) * np.sin(2 * np.pi * (t % 7) / 7 + ci)
            pre_bias = rng.normal(0, 5)
            noise = rng.normal(0, 2.5, n_days)
            cols.append(np.round(pre_bias + ramp + recovery + weekly + noise))
        cells = np.array(cols).T
        blank = set()
        if drop_cells:
            rows = rng.choice(np.arange(5, n_days - 5), size=drop_cells, replace=False)
            blank = {(int(r), int(rng.integers(0, 6))) for r in rows}
        for i, d in enumerate(days):
            vals = ["" if (i, j) in blank else str(int(v)) for j, v in enumerate(cells[i])]
            out.write(f"{code},{country},{region},,,,{d.isoformat()}," + ",".join(vals) + "\n")
    return out.getvalue(), cal.getvalue()


def region_keys(regions=SYNTHETIC_REGIONS) -> list[LocalityKey]:
    return [LocalityKey(code, region) for code, _, region, *_ in regions]


@pytest.fixture(scope="session")
def synthetic_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("synthetic")
    data, cal = synthetic_cmr(drop_cells=6)
    (root / "cmr.csv").write_text(data, encoding="utf-8")
    (root / "calendar.csv").write_text(cal, encoding="utf-8")
    return root / "cmr.csv", root / "calendar.csv"


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
