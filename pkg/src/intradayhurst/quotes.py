"""
Quote ingestion
===============

Parse delimited quote files into a validated, time-ordered :class:`QuoteSeries`
and derive the clock-time quantities used downstream: day fractions, gaps
between consecutive quotes, and the hour x weekday cross-tabulation of quote
arrivals.

Input format
------------
A delimited text file (comma by default) with a header row.  The timestamp
column holds either

- ``iso``: ISO-8601 instants, e.g. ``2000-05-05T09:49:11Z`` (naive values are
  read as GMT), or
- ``day-offset``: ``D:HH:MM:SS`` where ``D`` counts whole days from
  ``FormatConfig.base_date``.

Prices come from a single ``price`` column or from ``bid``/``ask`` columns, in
which case the mid is their arithmetic mean.  Rows that fail validation are
kept in ``QuoteSeries.rejects`` with a reason instead of being dropped silently.

All times are GMT.  Weekdays are coded 1 = Monday ... 7 = Sunday.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from typing import IO, Iterable, NamedTuple, Sequence

import numpy as np

SECONDS_PER_DAY = 86400
WEEKDAY_NAMES = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")
TIE_POLICIES = ("keep-order", "drop-later", "average-price")


class QuoteDataError(ValueError):
    """Raised when quote input cannot be turned into a usable series."""


@dataclass(frozen=True)
class FormatConfig:
    """Column layout and validation settings for :func:`parse_quote_file`.

    Set ``price_column`` for single-price files; otherwise ``bid_column`` and
    ``ask_column`` are read.  ``ask_bid_tolerance`` is the largest allowed
    amount by which a bid may exceed its ask.
    """

    timestamp_column: str = "timestamp"
    timestamp_layout: str = "iso"
    base_date: date = date(2000, 1, 1)
    price_column: str | None = None
    bid_column: str = "bid"
    ask_column: str = "ask"
    delimiter: str = ","
    ask_bid_tolerance: float = 0.0
    tie_policy: str = "keep-order"
    exclude_weekdays: tuple[int, ...] = ()
    strict: bool = False

    def __post_init__(self):
        if self.timestamp_layout not in ("iso", "day-offset"):
            raise ValueError(f"unknown timestamp layout {self.timestamp_layout!r}")
        if self.tie_policy not in TIE_POLICIES:
            raise ValueError(f"unknown tie policy {self.tie_policy!r}")
        if any(not 1 <= d <= 7 for d in self.exclude_weekdays):
            raise ValueError("exclude_weekdays entries must be in 1..7")


@dataclass(frozen=True)
class QuoteTick:
    timestamp: datetime
    mid: float
    bid: float | None = None
    ask: float | None = None
    price: float | None = None

    @property
    def epoch_seconds(self) -> int:
        return int(self.timestamp.timestamp())

    @property
    def day_fraction(self) -> float:
        return to_day_fraction(self.timestamp)

    @property
    def hour(self) -> int:
        return self.timestamp.hour

    @property
    def weekday(self) -> int:
        return self.timestamp.isoweekday()


class Reject(NamedTuple):
    line: int
    raw: str
    reason: str


@dataclass(frozen=True)
class QuoteSeries:
    """Immutable, chronologically ordered quotes.

    ``ties`` holds the indices of ticks whose timestamp equals that of the
    previous tick (only possible under the ``keep-order`` policy).
    """

    ticks: tuple[QuoteTick, ...]
    source_label: str = ""
    rejects: tuple[Reject, ...] = ()
    ties: tuple[int, ...] = ()

    def __len__(self):
        return len(self.ticks)

    def __getitem__(self, i):
        return self.ticks[i]

    @property
    def span(self) -> tuple[datetime, datetime]:
        return self.ticks[0].timestamp, self.ticks[-1].timestamp

    @property
    def epoch_seconds(self) -> np.ndarray:
        return np.array([t.epoch_seconds for t in self.ticks], dtype=np.int64)

    @property
    def mids(self) -> np.ndarray:
        return np.array([t.mid for t in self.ticks], dtype=float)

    @property
    def hours(self) -> np.ndarray:
        return np.array([t.hour for t in self.ticks], dtype=np.int64)

    @property
    def weekdays(self) -> np.ndarray:
        return np.array([t.weekday for t in self.ticks], dtype=np.int64)

    @classmethod
    def from_ticks(cls, ticks: Iterable[QuoteTick], source_label="",
                   tie_policy="keep-order", rejects=()):
        """Sort ticks (stably) and resolve equal timestamps per ``tie_policy``."""
        ordered = sorted(ticks, key=lambda t: t.timestamp)
        ordered = _resolve_ties(ordered, tie_policy)
        ties = tuple(i for i in range(1, len(ordered))
                     if ordered[i].timestamp == ordered[i - 1].timestamp)
        return cls(tuple(ordered), source_label, tuple(rejects), ties)


class Gap(NamedTuple):
    seconds: int
    hour: int
    weekday: int
    tie: bool

    @property
    def day_fraction(self) -> float:
        return self.seconds / SECONDS_PER_DAY


@dataclass(frozen=True)
class ArrivalStats:
    hour: int
    count: int
    mean_gap: float  # minutes
    cv_gap: float
    defined: bool


@dataclass(frozen=True)
class Crosstab:
    counts: np.ndarray  # (24, 7), columns Monday..Sunday
    arrival: tuple[ArrivalStats, ...]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def hour_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def weekday_totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)


# --------------------------------------------------------------------------- #
# Parsing
# --------------------------------------------------------------------------- #
def to_day_fraction(timestamp: datetime) -> float:
    """Seconds since midnight GMT divided by 86400; 12:00 maps to 0.5."""
    ts = _as_utc(timestamp)
    seconds = ts.hour * 3600 + ts.minute * 60 + ts.second + ts.microsecond / 1e6
    return seconds / SECONDS_PER_DAY


def parse_timestamp(text: str, layout: str = "iso",
                    base_date: date = date(2000, 1, 1)) -> datetime:
    text = text.strip()
    if layout == "iso":
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        ts = datetime.fromisoformat(text)
        return _as_utc(ts)
    parts = text.split(":")
    if len(parts) != 4:
        raise ValueError(f"expected D:HH:MM:SS, got {text!r}")
    day, hour, minute, second = (int(p) for p in parts)
    if not (0 <= hour < 24 and 0 <= minute < 60 and 0 <= second < 60) or day < 0:
        raise ValueError(f"time field out of range in {text!r}")
    start = datetime(base_date.year, base_date.month, base_date.day, tzinfo=timezone.utc)
    return start + timedelta(days=day, hours=hour, minutes=minute, seconds=second)


def format_timestamp(ts: datetime, layout: str = "iso",
                     base_date: date = date(2000, 1, 1)) -> str:
    ts = _as_utc(ts)
    if layout == "iso":
        return ts.strftime("%Y-%m-%dT%H:%M:%SZ")
    day = (ts.date() - base_date).days
    return f"{day}:{ts.hour:02d}:{ts.minute:02d}:{ts.second:02d}"


def parse_quote_file(path_or_stream: str | os.PathLike | IO[str],
                     config: FormatConfig | None = None) -> QuoteSeries:
    """Read a quote file into a :class:`QuoteSeries`.

    Parameters
    ----------
    path_or_stream : path or text stream
    config : FormatConfig, optional
        Column names, timestamp layout, tie policy.  Defaults to ISO
        timestamps with ``bid``/``ask`` columns.

    Returns
    -------
    QuoteSeries
        Rows failing validation are listed in ``rejects``.  With
        ``config.strict`` the first such row raises instead.

    Raises
    ------
    QuoteDataError
        Unreadable input, missing columns, or fewer than 2 valid rows.
    """
    config = config or FormatConfig()
    if hasattr(path_or_stream, "read"):
        label = getattr(path_or_stream, "name", "<stream>")
        text = path_or_stream.read()
    else:
        label = os.fspath(path_or_stream)
        try:
            with open(path_or_stream, newline="", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise QuoteDataError(f"cannot read quote file {label}: {exc}") from exc

    reader = csv.reader(io.StringIO(text), delimiter=config.delimiter)
    header = next(reader, None)
    if header is None:
        raise QuoteDataError("fewer than 2 valid rows")
    header = [h.strip() for h in header]
    columns = _column_indices(header, config)

    ticks, rejects = [], []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            tick = _row_to_tick(row, columns, config)
        except ValueError as exc:
            if config.strict:
                raise QuoteDataError(f"line {line_no}: {exc}") from exc
            rejects.append(Reject(line_no, config.delimiter.join(row), str(exc)))
            continue
        if tick.weekday in config.exclude_weekdays:
            continue
        ticks.append(tick)

    if len(ticks) < 2:
        raise QuoteDataError("fewer than 2 valid rows")
    return QuoteSeries.from_ticks(ticks, label, config.tie_policy, rejects)


def format_tick(tick: QuoteTick, config: FormatConfig | None = None) -> str:
    """Render a tick as one data row in the layout ``config`` describes."""
    config = config or FormatConfig()
    ts = format_timestamp(tick.timestamp, config.timestamp_layout, config.base_date)
    if config.price_column is not None:
        return config.delimiter.join([ts, repr(tick.price)])
    return config.delimiter.join([ts, repr(tick.bid), repr(tick.ask)])


def format_header(config: FormatConfig | None = None) -> str:
    config = config or FormatConfig()
    if config.price_column is not None:
        cols = [config.timestamp_column, config.price_column]
    else:
        cols = [config.timestamp_column, config.bid_column, config.ask_column]
    return config.delimiter.join(cols)


def write_quote_file(series: QuoteSeries | Sequence[QuoteTick], path,
                     config: FormatConfig | None = None):
    ticks = series.ticks if isinstance(series, QuoteSeries) else series
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_header(config) + "\n")
        for t in ticks:
            fh.write(format_tick(t, config) + "\n")


def write_rejects(series: QuoteSeries, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["line", "raw", "reason"])
        w.writerows(series.rejects)


def _as_utc(ts: datetime) -> datetime:
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _column_indices(header, config):
    def find(name):
        try:
            return header.index(name)
        except ValueError:
            raise QuoteDataError(f"missing column {name!r} in header {header}") from None

    cols = {"timestamp": find(config.timestamp_column)}
    if config.price_column is not None:
        cols["price"] = find(config.price_column)
    else:
        cols["bid"] = find(config.bid_column)
        cols["ask"] = find(config.ask_column)
    return cols


def _parse_positive(text, what):
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"unparseable {what} {text!r}") from None
    if not math.isfinite(value) or value <= 0:
        raise ValueError(f"non-positive {what} {text!r}")
    return value


def _row_to_tick(row, columns, config):
    try:
        raw_ts = row[columns["timestamp"]]
    except IndexError:
        raise ValueError("short row") from None
    try:
        ts = parse_timestamp(raw_ts, config.timestamp_layout, config.base_date)
    except ValueError:
        raise ValueError(f"unparseable timestamp {raw_ts!r}") from None
    try:
        if "price" in columns:
            price = _parse_positive(row[columns["price"]], "price")
            return QuoteTick(ts, mid=price, price=price)
        bid = _parse_positive(row[columns["bid"]], "bid")
        ask = _parse_positive(row[columns["ask"]], "ask")
    except IndexError:
        raise ValueError("short row") from None
    if bid - ask > config.ask_bid_tolerance:
        raise ValueError(f"ask {ask} below bid {bid}")
    # crossed quotes within tolerance are accepted as-is
    return QuoteTick(ts, mid=(bid + ask) / 2, bid=bid, ask=ask)


def _resolve_ties(ordered, policy):
    if policy == "keep-order" or len(ordered) < 2:
        return ordered
    out = []
    i = 0
    while i < len(ordered):
        j = i + 1
        while j < len(ordered) and ordered[j].timestamp == ordered[i].timestamp:
            j += 1
        group = ordered[i:j]
        if len(group) == 1 or policy == "drop-later":
            out.append(group[0])
        else:
            out.append(_average_ticks(group))
        i = j
    return out


def _average_ticks(group):
    ts = group[0].timestamp
    if all(t.bid is not None for t in group):
        bid = sum(t.bid for t in group) / len(group)
        ask = sum(t.ask for t in group) / len(group)
        return QuoteTick(ts, mid=(bid + ask) / 2, bid=bid, ask=ask)
    price = sum(t.mid for t in group) / len(group)
    return QuoteTick(ts, mid=price, price=price)


# --------------------------------------------------------------------------- #
# Gaps and cross-tabulation
# --------------------------------------------------------------------------- #
def inter_quote_gaps(series: QuoteSeries) -> list[Gap]:
    """Gaps between consecutive quotes, each tagged with the later quote's hour/weekday."""
    if len(series) < 2:
        raise QuoteDataError("need at least 2 quotes for gaps")
    secs = series.epoch_seconds
    diffs = np.diff(secs)
    gaps = []
    for i, d in enumerate(diffs.tolist()):
        later = series.ticks[i + 1]
        gaps.append(Gap(d, later.hour, later.weekday, d == 0))
    return gaps


def arrival_stats(gaps: Sequence[Gap], hour: int, count: int) -> ArrivalStats:
    seconds = np.array([g.seconds for g in gaps if g.hour == hour], dtype=float)
    if seconds.size < 2:
        return ArrivalStats(hour, count, float("nan"), float("nan"), False)
    mean = seconds.mean()
    cv = seconds.std(ddof=1) / mean if mean > 0 else float("nan")
    return ArrivalStats(hour, count, mean / 60.0, cv, mean > 0)


def crosstab_by_hour_weekday(series: QuoteSeries) -> Crosstab:
    """24 x 7 quote counts plus mean gap (minutes) and gap CV per hour.

    The cross-tab counts quotes, so its grand total equals ``len(series)``.
    Arrival statistics use the gaps attributed to each hour; hours with fewer
    than two gaps are marked ``defined=False`` and carry NaN.
    """
    counts = np.zeros((24, 7), dtype=np.int64)
    np.add.at(counts, (series.hours, series.weekdays - 1), 1)
    gaps = inter_quote_gaps(series)
    arrival = tuple(arrival_stats(gaps, h, int(counts[h].sum())) for h in range(24))
    return Crosstab(counts, arrival)


def crosstab_rows(tab: Crosstab) -> list[dict]:
    """Rows in the fixed column order hour, mon..sun, total, mean_gap_min, cv_gap."""
    rows = []
    for h in range(24):
        a = tab.arrival[h]
        row = {"hour": h}
        row.update({name: int(tab.counts[h, d]) for d, name in enumerate(WEEKDAY_NAMES)})
        row["total"] = int(tab.counts[h].sum())
        row["mean_gap_min"] = a.mean_gap if a.defined else None
        row["cv_gap"] = a.cv_gap if a.defined else None
        rows.append(row)
    total = {"hour": "total"}
    total.update({name: int(v) for name, v in zip(WEEKDAY_NAMES, tab.weekday_totals)})
    total.update(total=tab.total, mean_gap_min=None, cv_gap=None)
    rows.append(total)
    return rows


def write_crosstab_csv(tab: Crosstab, path):
    rows = crosstab_rows(tab)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: ("" if v is None else _fmt(v)) for k, v in row.items()})


def write_crosstab_json(tab: Crosstab, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"columns": list(crosstab_rows(tab)[0]), "rows": crosstab_rows(tab)},
                  fh, indent=2)
        fh.write("\n")


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4f}"
    return v
