"""
Hourly session statistics
=========================

Bundle returns and local-Hurst streams into the 24 GMT hours, test for
differences between hours (one-way ANOVA and Kruskal-Wallis), and build the
hourly range / standard-deviation decomposition of the local exponent.

Decomposition percent changes
-----------------------------
Each hour's row logs (base 10) the hourly *mean* range and *mean* standard
deviation, then reports

- hour-over-hour percent changes ``DR_n`` and ``Dsigma_n`` (blank at hour 0;
  there is no wraparound to hour 23),
- the cross-window changes ``DR_small-large`` and ``Dsigma_small-large`` of the
  logged values, and
- ``h_n = (log R - log sigma) / log n``.

In ``mode="paper"`` the hour-over-hour ``Dsigma`` of the smaller window is a
percent change of the raw standard deviation while the other three are
changes of the logs; this reproduces the published decomposition table
column by column.  ``mode="consistent"`` uses logs everywhere.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .rs import LocalHurstStream

HOURS = range(24)
FOOTER_DECIMALS = {"F-Statistic": 2, "p-value": 3}

CHANGE_SCALES = {
    "paper": {"dr_small": "log", "dsigma_small": "raw", "dr_large": "log", "dsigma_large": "log"},
    "consistent": {"dr_small": "log", "dsigma_small": "log", "dr_large": "log", "dsigma_large": "log"},
}


@dataclass(frozen=True)
class HourlyBundle:
    hour: int
    values: np.ndarray

    @property
    def count(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class AnovaResult:
    f_stat: float
    df_between: int
    df_within: int
    p_value: float
    group_means: tuple[float, ...]


@dataclass(frozen=True)
class KruskalWallisResult:
    h_stat: float
    df: int
    p_value: float
    tie_correction_applied: bool
    degenerate: bool = False


def bundle_by_hour(values, hours) -> list[HourlyBundle]:
    """Split ``values`` into 24 bundles by their hour tag (0..23)."""
    values = np.asarray(values, dtype=float)
    hours = np.asarray(hours)
    if values.shape != hours.shape:
        raise ValueError("values and hours differ in length")
    if hours.size and (hours.min() < 0 or hours.max() > 23):
        raise ValueError("hour tags must lie in 0..23")
    order = np.argsort(hours, kind="stable")
    edges = np.searchsorted(hours[order], np.arange(25))
    return [HourlyBundle(h, values[order[edges[h]:edges[h + 1]]]) for h in HOURS]


def _groups(bundles):
    out = []
    for b in bundles:
        v = b.values if isinstance(b, HourlyBundle) else np.asarray(b, dtype=float)
        if v.size:
            out.append(np.asarray(v, dtype=float))
    return out


def anova_oneway(bundles: Sequence) -> AnovaResult:
    """One-way ANOVA across the non-empty groups.

    Accepts :class:`HourlyBundle` objects or plain sequences.

    >>> anova_oneway([[1, 2], [3, 4]]).f_stat
    8.0
    """
    groups = _groups(bundles)
    k = len(groups)
    N = sum(g.size for g in groups)
    if k < 2:
        raise ValueError("ANOVA needs at least 2 non-empty groups")
    if N <= k:
        raise ValueError("ANOVA needs more observations than groups")
    grand = np.concatenate(groups).mean()
    means = [g.mean() for g in groups]
    ssb = sum(g.size * (m - grand) ** 2 for g, m in zip(groups, means))
    ssw = sum(((g - m) ** 2).sum() for g, m in zip(groups, means))
    df_b, df_w = k - 1, N - k
    if ssw == 0:
        if ssb == 0:
            raise ValueError("ANOVA undefined: every group is constant and equal")
        return AnovaResult(math.inf, df_b, df_w, 0.0, tuple(map(float, means)))
    f = (ssb / df_b) / (ssw / df_w)
    return AnovaResult(float(f), df_b, df_w, float(stats.f.sf(f, df_b, df_w)),
                       tuple(map(float, means)))


def kruskal_wallis(bundles: Sequence) -> KruskalWallisResult:
    """Kruskal-Wallis H across the non-empty groups, average ranks for ties.

    H is divided by the usual tie correction ``1 - sum(t^3 - t)/(N^3 - N)``
    and referred to chi-square with ``k - 1`` degrees of freedom.  If all
    values are identical H is reported as 0 with ``degenerate=True``.
    """
    groups = _groups(bundles)
    k = len(groups)
    if k < 2:
        raise ValueError("Kruskal-Wallis needs at least 2 non-empty groups")
    pooled = np.concatenate(groups)
    N = pooled.size
    ranks = stats.rankdata(pooled)
    _, tie_counts = np.unique(pooled, return_counts=True)
    ties = tie_counts[tie_counts > 1].astype(float)
    correction = 1.0 - ((ties ** 3 - ties).sum() / (N ** 3 - N) if N > 1 else 0.0)
    if correction <= 0:
        return KruskalWallisResult(0.0, k - 1, 1.0, True, degenerate=True)

    centre = (N + 1) / 2
    spread, start = 0.0, 0
    for g in groups:
        r = ranks[start:start + g.size]
        spread += g.size * (r.mean() - centre) ** 2
        start += g.size
    h = 12.0 * spread / (N * (N + 1))
    if ties.size:
        h /= correction
    return KruskalWallisResult(float(h), k - 1, float(stats.chi2.sf(h, k - 1)), bool(ties.size))


# --------------------------------------------------------------------------- #
# Range / standard deviation decomposition
# --------------------------------------------------------------------------- #
@dataclass(frozen=True)
class HourlyDecompositionRow:
    hour: int
    r_small: float
    log_r_small: float
    sigma_small: float
    log_sigma_small: float
    r_large: float
    log_r_large: float
    sigma_large: float
    log_sigma_large: float
    dr_small: float | None
    dsigma_small: float | None
    dr_large: float | None
    dsigma_large: float | None
    dr_cross: float
    dsigma_cross: float
    h_small: float
    h_large: float
    flagged: bool = False


@dataclass(frozen=True)
class DecompositionTable:
    n_small: int
    n_large: int
    mode: str
    rows: tuple[HourlyDecompositionRow, ...]
    anova: dict = field(default_factory=dict)

    def column(self, name) -> np.ndarray:
        return np.array([np.nan if getattr(r, name) is None else getattr(r, name)
                         for r in self.rows], dtype=float)


def percent_change(previous, current):
    """``(current - previous) / previous * 100``."""
    return (current - previous) / previous * 100.0


def _change(prev, cur, scale):
    if scale == "log":
        return percent_change(math.log10(prev), math.log10(cur))
    return percent_change(prev, cur)


def decomposition_from_means(r_small, sigma_small, r_large, sigma_large,
                             n_small: int = 10, n_large: int = 20,
                             mode: str = "paper") -> list[HourlyDecompositionRow]:
    """Build decomposition rows from 24 hourly mean ranges and standard deviations.

    NaN inputs mark empty hours; such rows are flagged and their changes (and
    the following hour's changes) are NaN.
    """
    if mode not in CHANGE_SCALES:
        raise ValueError(f"mode must be one of {sorted(CHANGE_SCALES)}")
    scales = CHANGE_SCALES[mode]
    cols = [np.asarray(c, dtype=float) for c in (r_small, sigma_small, r_large, sigma_large)]
    if any(c.shape != (24,) for c in cols):
        raise ValueError("expected 24 hourly values per column")
    rs, ss, rl, sl = cols
    ls_n, ll_n = math.log10(n_small), math.log10(n_large)
    rows = []
    for h in HOURS:
        vals = (rs[h], ss[h], rl[h], sl[h])
        flagged = not all(np.isfinite(v) and v > 0 for v in vals)
        if flagged:
            logs = (math.nan,) * 4
        else:
            logs = tuple(math.log10(v) for v in vals)
        changes = [None] * 4
        if h > 0:
            prev = (rs[h - 1], ss[h - 1], rl[h - 1], sl[h - 1])
            ok_prev = all(np.isfinite(v) and v > 0 for v in prev)
            keys = ("dr_small", "dsigma_small", "dr_large", "dsigma_large")
            for i, key in enumerate(keys):
                if flagged or not ok_prev:
                    changes[i] = math.nan
                else:
                    changes[i] = _change(prev[i], vals[i], scales[key])
        lr_s, lsig_s, lr_l, lsig_l = logs
        rows.append(HourlyDecompositionRow(
            hour=h,
            r_small=float(rs[h]), log_r_small=lr_s, sigma_small=float(ss[h]), log_sigma_small=lsig_s,
            r_large=float(rl[h]), log_r_large=lr_l, sigma_large=float(sl[h]), log_sigma_large=lsig_l,
            dr_small=changes[0], dsigma_small=changes[1],
            dr_large=changes[2], dsigma_large=changes[3],
            dr_cross=percent_change(lr_s, lr_l) if not flagged else math.nan,
            dsigma_cross=percent_change(lsig_s, lsig_l) if not flagged else math.nan,
            h_small=(lr_s - lsig_s) / ls_n,
            h_large=(lr_l - lsig_l) / ll_n,
            flagged=flagged,
        ))
    return rows


def hourly_means(values, hours) -> np.ndarray:
    """Mean of ``values`` per hour, NaN for empty hours."""
    hours = np.asarray(hours, dtype=np.int64)
    sums = np.bincount(hours, weights=np.asarray(values, dtype=float), minlength=24)
    counts = np.bincount(hours, minlength=24)
    out = np.full(24, np.nan)
    nz = counts > 0
    out[nz] = sums[nz] / counts[nz]
    return out


def decomposition_table(stream_small: LocalHurstStream, stream_large: LocalHurstStream,
                        mode: str = "paper") -> DecompositionTable:
    """Hourly decomposition of two local-Hurst streams from the same returns.

    The footer ANOVA tests the per-window R and sigma values of each stream
    for equality of hourly means.
    """
    for s in (stream_small, stream_large):
        if s.hour is None:
            raise ValueError("streams must carry hour tags")
    rows = decomposition_from_means(
        hourly_means(stream_small.range_r, stream_small.hour),
        hourly_means(stream_small.sigma, stream_small.hour),
        hourly_means(stream_large.range_r, stream_large.hour),
        hourly_means(stream_large.sigma, stream_large.hour),
        stream_small.n, stream_large.n, mode)
    anova = {
        "r_small": _safe_anova(stream_small.range_r, stream_small.hour),
        "sigma_small": _safe_anova(stream_small.sigma, stream_small.hour),
        "r_large": _safe_anova(stream_large.range_r, stream_large.hour),
        "sigma_large": _safe_anova(stream_large.sigma, stream_large.hour),
    }
    return DecompositionTable(stream_small.n, stream_large.n, mode, tuple(rows), anova)


def _safe_anova(values, hours):
    try:
        return anova_oneway(bundle_by_hour(values, hours))
    except ValueError:
        return None


# --------------------------------------------------------------------------- #
# Report tables
# --------------------------------------------------------------------------- #
@dataclass
class ReportTable:
    """Column-named table with an optional footer, writable as CSV or JSON.

    ``decimals`` maps column names to the number of decimals used in CSV
    output; JSON keeps full precision.
    """

    name: str
    columns: list[str]
    rows: list[list]
    footer: list[list] = field(default_factory=list)
    decimals: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)
    footer_decimals: dict = field(default_factory=lambda: dict(FOOTER_DECIMALS))

    def _cell(self, v, places):
        if v is None or (isinstance(v, float) and math.isnan(v)):
            return ""
        if isinstance(v, (float, np.floating)):
            return f"{v:.{places}f}"
        return str(v)

    def formatted_rows(self):
        out = [[self._cell(v, self.decimals.get(c, 4)) for c, v in zip(self.columns, row)]
               for row in self.rows]
        for row in self.footer:
            label = row[0]
            out.append([self._cell(v, self.footer_decimals.get(label, self.decimals.get(c, 4)))
                        for c, v in zip(self.columns, row)])
        return out

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            w.writerows(self.formatted_rows())

    def to_dict(self):
        def clean(v):
            if isinstance(v, (float, np.floating)):
                return None if math.isnan(v) else float(v)
            if isinstance(v, np.integer):
                return int(v)
            return v
        return {
            "name": self.name, "columns": self.columns,
            "rows": [dict(zip(self.columns, map(clean, r))) for r in self.rows],
            "footer": [dict(zip(self.columns, map(clean, r))) for r in self.footer],
            "notes": self.notes,
        }

    def write_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    def render(self) -> str:
        cells = [self.columns] + self.formatted_rows()
        widths = [max(len(r[i]) for r in cells) for i in range(len(self.columns))]
        return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells)


def _stat_row(label, values_by_col, columns):
    return [values_by_col.get(c, label if c == columns[0] else None) for c in columns]


def table1(crosstab, gaps) -> ReportTable:
    """Quotes by hour and weekday with mean arrival time (minutes) and its CV.

    The footer carries column totals and an ANOVA of gap lengths across hours.
    """
    from .quotes import WEEKDAY_NAMES

    columns = ["GMT", *WEEKDAY_NAMES, "total", "mean_arrival_min", "cv_arrival"]
    rows = []
    for h in HOURS:
        a = crosstab.arrival[h]
        rows.append([h, *map(int, crosstab.counts[h]), int(crosstab.counts[h].sum()),
                     a.mean_gap, a.cv_gap])
    footer = [["Total", *map(int, crosstab.weekday_totals), crosstab.total, None, None]]
    gap_secs = np.array([g.seconds for g in gaps], dtype=float)
    gap_hours = np.array([g.hour for g in gaps])
    res = _safe_anova(gap_secs, gap_hours)
    if res is not None:
        footer.append(_stat_row("F-Statistic", {"mean_arrival_min": res.f_stat}, columns))
        footer.append(_stat_row("p-value", {"mean_arrival_min": res.p_value}, columns))
    decimals = {"mean_arrival_min": 2, "cv_arrival": 2}
    return ReportTable("table1", columns, rows, footer, decimals,
                       notes={"arrival_units": "minutes"})


def table2(returns, stream_small, stream_large, boot_small=None, boot_large=None) -> ReportTable:
    """Hourly returns, local exponents and bootstrap expectations with ANOVA footer."""
    ns, nl = stream_small.n, stream_large.n
    columns = ["GMT", "mu_R", "sigma_R", f"h{ns}", f"sd_h{ns}", f"h{nl}", f"sd_h{nl}",
               f"boot_h{ns}", f"boot_sd_h{ns}", f"boot_h{nl}", f"boot_sd_h{nl}"]
    r_b = bundle_by_hour(returns.ar, returns.hour)
    s_b = bundle_by_hour(stream_small.h, stream_small.hour)
    l_b = bundle_by_hour(stream_large.h, stream_large.hour)

    def m(b):
        return float(b.values.mean()) if b.count else math.nan

    def sd(b):
        return float(b.values.std(ddof=1)) if b.count >= 2 else math.nan

    def boot(summary, attr, h):
        return math.nan if summary is None else float(getattr(summary, attr)[h])

    rows = []
    for h in HOURS:
        rows.append([h, m(r_b[h]), sd(r_b[h]), m(s_b[h]), sd(s_b[h]), m(l_b[h]), sd(l_b[h]),
                     boot(boot_small, "per_hour_mean", h), boot(boot_small, "per_hour_std", h),
                     boot(boot_large, "per_hour_mean", h), boot(boot_large, "per_hour_std", h)])
    f_r = _safe_anova(returns.ar, returns.hour)
    f_s = _safe_anova(stream_small.h, stream_small.hour)
    f_l = _safe_anova(stream_large.h, stream_large.hour)

    def fv(res, attr):
        return None if res is None else getattr(res, attr)

    footer = [
        _stat_row("F-Statistic", {"mu_R": fv(f_r, "f_stat"), f"h{ns}": fv(f_s, "f_stat"),
                                  f"h{nl}": fv(f_l, "f_stat")}, columns),
        _stat_row("p-value", {"mu_R": fv(f_r, "p_value"), f"h{ns}": fv(f_s, "p_value"),
                              f"h{nl}": fv(f_l, "p_value")}, columns),
    ]
    if boot_small is not None or boot_large is not None:
        footer.append(_stat_row("E(h)", {f"boot_h{ns}": fv(boot_small, "mean_h"),
                                         f"boot_h{nl}": fv(boot_large, "mean_h")}, columns))
        footer.append(_stat_row("sd(h)", {f"boot_sd_h{ns}": fv(boot_small, "std_h"),
                                          f"boot_sd_h{nl}": fv(boot_large, "std_h")}, columns))
    decimals = {c: 4 for c in columns}
    decimals.update({"mu_R": 3, "sigma_R": 3})
    kw = None
    try:
        kw = kruskal_wallis(r_b)
    except ValueError:
        pass
    notes = {}
    if kw is not None:
        notes["kruskal_wallis_returns"] = {"h_stat": kw.h_stat, "df": kw.df, "p_value": kw.p_value}
    return ReportTable("table2", columns, rows, footer, decimals, notes)


def table3(decomp: DecompositionTable) -> ReportTable:
    """Range / standard-deviation decomposition rows with ANOVA footer."""
    ns, nl = decomp.n_small, decomp.n_large
    columns = ["GMT", f"R{ns}", f"logR{ns}", f"sigma{ns}", f"logsigma{ns}",
               f"R{nl}", f"logR{nl}", f"sigma{nl}", f"logsigma{nl}",
               f"DR{ns}", f"Dsigma{ns}", f"DR{nl}", f"Dsigma{nl}",
               f"DR{ns}-{nl}", f"Dsigma{ns}-{nl}", f"h{ns}", f"h{nl}"]
    fields = ["hour", "r_small", "log_r_small", "sigma_small", "log_sigma_small",
              "r_large", "log_r_large", "sigma_large", "log_sigma_large",
              "dr_small", "dsigma_small", "dr_large", "dsigma_large",
              "dr_cross", "dsigma_cross", "h_small", "h_large"]
    rows = [[getattr(r, f) for f in fields] for r in decomp.rows]
    by_col = {f"R{ns}": "r_small", f"sigma{ns}": "sigma_small",
              f"R{nl}": "r_large", f"sigma{nl}": "sigma_large"}
    footer = []
    for label, attr in (("F-Statistic", "f_stat"), ("p-value", "p_value")):
        vals = {c: getattr(decomp.anova[k], attr) for c, k in by_col.items()
                if decomp.anova.get(k) is not None}
        footer.append(_stat_row(label, vals, columns))
    decimals = dict.fromkeys(columns, 2)
    decimals.update({f"R{ns}": 1, f"R{nl}": 1, f"h{ns}": 4, f"h{nl}": 4})
    decimals.update({c: 3 for c in columns if c.startswith("log")})
    return ReportTable("table3", columns, rows, footer, decimals, notes={"mode": decomp.mode})
