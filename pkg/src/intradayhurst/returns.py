"""
Gap-adjusted returns
====================

Quotes arrive irregularly, so each log price change is rescaled by the time it
took to happen::

    ar = [log(Q_i) - log(Q_next)] * scale_seconds / tau_seconds

with ``tau_seconds`` the gap in seconds between the two quotes and
``scale_seconds`` 360 by default.  The default sign is "paper" (earlier minus
later), the negative of a conventional forward return; ``sign="forward"``
flips it.

Pairs with a zero gap (equal timestamps) are excluded because the scaling is
undefined there; they are counted in ``ReturnSeries.diagnostics``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import NamedTuple

import numpy as np

from .quotes import QuoteDataError, QuoteSeries


@dataclass(frozen=True)
class ReturnsConfig:
    sign: str = "paper"
    scale_seconds: float = 360.0
    log_base: float = math.e
    max_gap_seconds: float | None = None

    def __post_init__(self):
        if self.sign not in ("paper", "forward"):
            raise ValueError(f"sign must be 'paper' or 'forward', got {self.sign!r}")
        if self.scale_seconds <= 0:
            raise ValueError("scale_seconds must be positive")
        if self.log_base <= 0 or self.log_base == 1:
            raise ValueError("log_base must be positive and != 1")


class ReturnObservation(NamedTuple):
    ar: float
    tau_seconds: float
    raw_logdiff: float
    timestamp: int
    hour: int
    weekday: int


@dataclass(frozen=True)
class ReturnSeries:
    """Column-oriented container of adjusted returns.

    ``timestamp`` holds epoch seconds (GMT) of the later quote of each pair.
    """

    ar: np.ndarray
    tau_seconds: np.ndarray
    raw_logdiff: np.ndarray
    timestamp: np.ndarray
    hour: np.ndarray
    weekday: np.ndarray
    config: ReturnsConfig = field(default_factory=ReturnsConfig)
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.ar)

    def __getitem__(self, i) -> ReturnObservation:
        return ReturnObservation(float(self.ar[i]), float(self.tau_seconds[i]),
                                 float(self.raw_logdiff[i]), int(self.timestamp[i]),
                                 int(self.hour[i]), int(self.weekday[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @classmethod
    def from_values(cls, values, timestamps=None, spacing_seconds=1.0, start=0):
        """Wrap a ready-made return sequence (e.g. synthetic noise).

        Without ``timestamps`` the observations are placed ``spacing_seconds``
        apart starting at epoch second ``start``.
        """
        values = np.asarray(values, dtype=float)
        if timestamps is None:
            timestamps = start + np.round(np.arange(1, len(values) + 1) * spacing_seconds)
        timestamps = np.asarray(timestamps, dtype=np.int64)
        if timestamps.shape != values.shape:
            raise ValueError("values and timestamps differ in length")
        if len(values) > 1:
            tau = np.diff(timestamps, prepend=timestamps[0] - round(spacing_seconds))
        else:
            tau = np.full(len(values), float(spacing_seconds))
        hour, weekday = calendar_tags(timestamps)
        return cls(values, tau.astype(float), values.copy(), timestamps, hour, weekday,
                   ReturnsConfig(), {"source": "values"})


def calendar_tags(epoch_seconds):
    """Hour (0..23) and ISO weekday (1..7) for epoch seconds, GMT."""
    secs = np.asarray(epoch_seconds, dtype=np.int64)
    days = np.floor_divide(secs, 86400)
    hour = np.floor_divide(secs - days * 86400, 3600)
    # 1970-01-01 was a Thursday (ISO 4)
    weekday = (days + 3) % 7 + 1
    return hour.astype(np.int64), weekday.astype(np.int64)


def adjusted_returns(series: QuoteSeries, config: ReturnsConfig | None = None) -> ReturnSeries:
    """Gap-adjusted log returns between consecutive quotes of ``series``."""
    config = config or ReturnsConfig()
    if len(series) < 2:
        raise QuoteDataError("need at least 2 quotes for returns")
    prices = series.mids
    if np.any(prices <= 0):
        raise QuoteDataError("non-positive price encountered")
    secs = series.epoch_seconds

    logp = np.log(prices) / math.log(config.log_base)
    diff = logp[:-1] - logp[1:]
    if config.sign == "forward":
        diff = -diff
    tau = np.diff(secs).astype(float)

    keep = tau > 0
    zero_gap = int(np.count_nonzero(~keep))
    long_gap = 0
    if config.max_gap_seconds is not None:
        too_long = keep & (tau > config.max_gap_seconds)
        long_gap = int(np.count_nonzero(too_long))
        keep &= ~too_long

    tau_k = tau[keep]
    diff_k = diff[keep]
    later = secs[1:][keep]
    hour, weekday = calendar_tags(later)
    ar = diff_k * (config.scale_seconds / tau_k)
    diagnostics = {
        "quotes": len(series),
        "observations": int(keep.sum()),
        "excluded_zero_gap": zero_gap,
        "excluded_long_gap": long_gap,
        "config": _config_echo(config),
    }
    return ReturnSeries(ar, tau_k, diff_k, later, hour, weekday, config, diagnostics)


@dataclass(frozen=True)
class HourlyReturnRow:
    hour: int
    count: int
    mean: float
    std: float
    flagged: bool


def hourly_return_summary(returns: ReturnSeries) -> list[HourlyReturnRow]:
    """Per-hour mean and sample standard deviation of adjusted returns.

    Hours with fewer than two observations are flagged; their std is NaN
    (and their mean too when empty).
    """
    rows = []
    for h in range(24):
        v = returns.ar[returns.hour == h]
        mean = float(v.mean()) if v.size else float("nan")
        std = float(v.std(ddof=1)) if v.size >= 2 else float("nan")
        rows.append(HourlyReturnRow(h, int(v.size), mean, std, v.size < 2))
    return rows


RETURNS_COLUMNS = ("timestamp", "tau_seconds", "ar", "hour", "weekday")


def write_returns_csv(returns: ReturnSeries, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RETURNS_COLUMNS)
        for t, tau, ar, h, d in zip(returns.timestamp, returns.tau_seconds, returns.ar,
                                    returns.hour, returns.weekday):
            w.writerow([_iso(t), repr(float(tau)), repr(float(ar)), int(h), int(d)])


def read_returns_csv(path) -> ReturnSeries:
    """Load a file written by :func:`write_returns_csv` (or the simulator)."""
    ts, tau, ar = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(RETURNS_COLUMNS[:3]) - set(reader.fieldnames or ())
        if missing:
            raise QuoteDataError(f"returns file {path} lacks columns {sorted(missing)}")
        for row in reader:
            stamp = row["timestamp"].replace("Z", "+00:00")
            ts.append(int(datetime.fromisoformat(stamp).timestamp()))
            tau.append(float(row["tau_seconds"]))
            ar.append(float(row["ar"]))
    ts = np.array(ts, dtype=np.int64)
    ar = np.array(ar, dtype=float)
    hour, weekday = calendar_tags(ts)
    return ReturnSeries(ar, np.array(tau, dtype=float), ar.copy(), ts, hour, weekday,
                        ReturnsConfig(), {"source": str(path)})


def write_returns_json(returns: ReturnSeries, path):
    obs = [{"timestamp": _iso(o.timestamp), "tau_seconds": o.tau_seconds, "ar": o.ar,
            "hour": o.hour, "weekday": o.weekday} for o in returns]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"observations": obs}, fh)
        fh.write("\n")


def write_diagnostics(returns: ReturnSeries, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(returns.diagnostics, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _iso(epoch):
    return datetime.fromtimestamp(int(epoch), tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _config_echo(config):
    echo = asdict(config)
    echo["log_base"] = "e" if config.log_base == math.e else config.log_base
    return echo
