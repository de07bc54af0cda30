import sys
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import reference_tables  # noqa: E402

FIRST_DAY = date(2000, 5, 5)   # Friday
LAST_DAY = date(2000, 6, 15)   # Thursday
WEEKDAY_COLUMN = {1: 0, 2: 1, 3: 2, 4: 3, 5: 4, 7: 5}  # ISO weekday -> count column


def _days_by_weekday():
    days = {}
    d = FIRST_DAY
    while d <= LAST_DAY:
        days.setdefault(d.isoweekday(), []).append(d)
        d += timedelta(days=1)
    return days


def write_reference_shaped_quotes(path, seed=7):
    """Quote file whose hour x weekday counts equal the reference cross-tab.

    Each (hour, weekday) cell's quotes are dealt round-robin over the
    calendar days with that weekday between 5 May and 15 June 2000, at random
    seconds inside the hour.  Mid prices follow a small random walk around
    0.58 with a 5-pip spread.
    """
    rng = np.random.default_rng(seed)
    days = _days_by_weekday()
    stamps = []
    for hour, row in reference_tables.QUOTE_COUNTS.items():
        for iso, col in WEEKDAY_COLUMN.items():
            count = row[col]
            pool = days[iso]
            for k in range(count):
                d = pool[k % len(pool)]
                sec = int(rng.integers(0, 3600))
                stamps.append(datetime(d.year, d.month, d.day, hour, tzinfo=timezone.utc)
                              + timedelta(seconds=sec))
    stamps.sort()
    mids = 0.58 + np.cumsum(rng.normal(0, 2e-4, len(stamps)))
    with open(path, "w") as fh:
        fh.write("timestamp,bid,ask\n")
        for ts, m in zip(stamps, mids):
            fh.write(f"{ts:%Y-%m-%dT%H:%M:%SZ},{m - 0.00025:.5f},{m + 0.00025:.5f}\n")
    return path


def poisson_quotes(path, base_rate_per_min=1.0, peak_hours=range(12, 16), days=20, seed=11):
    """Quotes with Poisson arrivals, rate doubled during ``peak_hours``."""
    rng = np.random.default_rng(seed)
    start = datetime(2000, 5, 8, tzinfo=timezone.utc)
    t, end = 0.0, days * 86400.0
    stamps = []
    while t < end:
        hour = int(t // 3600) % 24
        rate = base_rate_per_min * (2 if hour in peak_hours else 1) / 60.0
        # thinning against the peak rate keeps the process exact across hour edges
        t += rng.exponential(1.0 / (2 * base_rate_per_min / 60.0))
        if rng.random() < rate / (2 * base_rate_per_min / 60.0):
            stamps.append(start + timedelta(seconds=int(t)))
    with open(path, "w") as fh:
        fh.write("timestamp,price\n")
        for i, ts in enumerate(stamps):
            fh.write(f"{ts:%Y-%m-%dT%H:%M:%SZ},{0.58 + 0.0001 * (i % 7):.5f}\n")
    return path


def write_quotes(path, rows, header="timestamp,bid,ask"):
    Path(path).write_text(header + "\n" + "\n".join(rows) + ("\n" if rows else ""))
    return path


@pytest.fixture(scope="session")
def reference_quote_file(tmp_path_factory):
    return write_reference_shaped_quotes(tmp_path_factory.mktemp("ref") / "quotes.csv")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def record_acceptance(number, passed, detail, seconds):
    ACCEPTANCE_LINES[number] = (
        f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}  [{seconds:.2f} s]")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
