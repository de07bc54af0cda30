"""
End-to-end analysis: returns -> local/global Hurst -> bootstrap -> hourly tables,
plus writers for the report tables, figure data and an output manifest.
"""
from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import quotes as q
from . import resample, rs, session
from .returns import ReturnSeries, hourly_return_summary


class StageError(RuntimeError):
    """Wraps a failure with the name of the module it came from."""

    def __init__(self, module, original):
        super().__init__(f"[{module}] {original}")
        self.module = module
        self.original = original


class stage:
    """Context manager that tags exceptions with the pipeline stage."""

    def __init__(self, module):
        self.module = module

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError) and isinstance(exc, Exception):
            raise StageError(self.module, exc) from exc
        return False


@dataclass
class Analysis:
    returns: ReturnSeries
    streams: dict
    global_fit: rs.GlobalHurstFit | None
    bootstrap: dict
    ztests: dict
    decomposition: session.DecompositionTable | None
    tables: dict = field(default_factory=dict)
    quotes: q.QuoteSeries | None = None
    crosstab: q.Crosstab | None = None


def analyze(returns: ReturnSeries, *, window_sizes=(10, 20), iterations=1000, master_seed=0,
            workers=1, mode="paper", confidence=0.95, global_lengths=None,
            quotes: q.QuoteSeries | None = None) -> Analysis:
    """Run every analysis stage on ``returns``.

    With exactly two window sizes the hourly decomposition table is built
    from the smaller and larger one.
    """
    sizes = tuple(sorted(set(int(n) for n in window_sizes)))
    with stage("rs_hurst"):
        streams = {n: rs.local_hurst_stream(returns, n) for n in sizes}
        try:
            global_fit = rs.global_hurst(returns, global_lengths)
        except ValueError:
            if global_lengths is not None:
                raise
            global_fit = None
    with stage("resample"):
        cfg = resample.BootstrapConfig(iterations=iterations, window_sizes=sizes,
                                       master_seed=master_seed, confidence=confidence,
                                       workers=workers)
        boot = resample.bootstrap_local_hurst(returns, cfg)
        ztests = {}
        for n in sizes:
            if boot[n].std_defined and boot[n].std_h > 0 and len(streams[n]):
                ztests[n] = resample.z_test(streams[n], boot[n], level=1 - confidence)

    decomposition = None
    tables = {}
    with stage("session_stats"):
        if len(sizes) == 2:
            small, large = sizes
            decomposition = session.decomposition_table(streams[small], streams[large], mode)
            tables["table2"] = session.table2(returns, streams[small], streams[large],
                                              boot[small], boot[large])
            tables["table3"] = session.table3(decomposition)
        crosstab = None
        if quotes is not None:
            crosstab = q.crosstab_by_hour_weekday(quotes)
            tables["table1"] = session.table1(crosstab, q.inter_quote_gaps(quotes))
    return Analysis(returns, streams, global_fit, boot, ztests, decomposition, tables,
                    quotes, crosstab)


# --------------------------------------------------------------------------- #
# Figure data
# --------------------------------------------------------------------------- #
def fig1_rows(crosstab: q.Crosstab):
    return [["hour", "quote_count"]] + [[h, int(c)] for h, c in enumerate(crosstab.hour_totals)]


def fig2_rows(returns: ReturnSeries):
    rows = [["hour", "mean_return", "variance"]]
    for r in hourly_return_summary(returns):
        rows.append([r.hour, r.mean, r.std ** 2])
    return rows


def fig3_rows(streams: dict, boot: dict, confidence=0.95):
    """Hourly mean local exponents next to bootstrap means and per-hour bands."""
    sizes = sorted(streams)
    header = ["hour"] + [f"mean_h{n}" for n in sizes] + [f"boot_h{n}" for n in sizes]
    for n in sizes:
        header += [f"boot_lo_h{n}", f"boot_hi_h{n}"]
    zq = stats.norm.ppf(0.5 + confidence / 2)
    means = {n: session.hourly_means(streams[n].h, streams[n].hour) for n in sizes}
    rows = [header]
    for h in range(24):
        row = [h] + [means[n][h] for n in sizes] + [boot[n].per_hour_mean[h] for n in sizes]
        for n in sizes:
            m, s = boot[n].per_hour_mean[h], boot[n].per_hour_std[h]
            row += [m - zq * s, m + zq * s]
        rows.append(row)
    return rows


def _write_rows(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in rows:
            w.writerow(["" if isinstance(v, float) and np.isnan(v) else
                        (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for v in row])


def write_stream_csv(stream: rs.LocalHurstStream, path):
    from .returns import _iso

    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["start_index", "end_timestamp", "n", "R", "sigma", "rs", "h", "hour"])
        ts = stream.end_timestamp
        hr = stream.hour
        for i in range(len(stream)):
            w.writerow([int(stream.start_index[i]), "" if ts is None else _iso(ts[i]), stream.n,
                        repr(float(stream.range_r[i])), repr(float(stream.sigma[i])),
                        repr(float(stream.rs[i])), repr(float(stream.h[i])),
                        "" if hr is None else int(hr[i])])


def write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_table(table: session.ReportTable, outdir: Path, fmt: str):
    written = []
    if fmt in ("csv", "both"):
        table.write_csv(outdir / f"{table.name}.csv")
        written.append(f"{table.name}.csv")
    if fmt in ("json", "both"):
        table.write_json(outdir / f"{table.name}.json")
        written.append(f"{table.name}.json")
    return written


def write_analysis(result: Analysis, outdir, fmt="csv", dump_iterations=False) -> list[str]:
    """Write every artifact of ``result`` into ``outdir``; returns the file names."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = []
    for n, stream in result.streams.items():
        write_stream_csv(stream, outdir / f"local_h{n}.csv")
        files.append(f"local_h{n}.csv")
    if result.global_fit is not None:
        write_json(result.global_fit.to_dict(), outdir / "global_hurst.json")
        files.append("global_hurst.json")
    resample.write_summaries_json(result.bootstrap, outdir / "bootstrap.json")
    files.append("bootstrap.json")
    if dump_iterations:
        resample.write_iteration_means(result.bootstrap, outdir / "bootstrap_iterations.csv")
        files.append("bootstrap_iterations.csv")
    write_json({str(n): z.to_dict() for n, z in result.ztests.items()}, outdir / "ztest.json")
    files.append("ztest.json")
    for table in result.tables.values():
        files += write_table(table, outdir, fmt)
    if result.crosstab is not None:
        _write_rows(fig1_rows(result.crosstab), outdir / "fig1.csv")
        files.append("fig1.csv")
    _write_rows(fig2_rows(result.returns), outdir / "fig2.csv")
    files.append("fig2.csv")
    if result.bootstrap:
        _write_rows(fig3_rows(result.streams, result.bootstrap), outdir / "fig3.csv")
        files.append("fig3.csv")
    return files


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(outdir, files, extra=None) -> Path:
    """List ``files`` (relative to ``outdir``) with size and SHA-256 in manifest.json."""
    outdir = Path(outdir)
    entries = [{"file": f, "bytes": os.path.getsize(outdir / f), "sha256": sha256(outdir / f)}
               for f in sorted(set(files))]
    payload = {"files": entries}
    if extra:
        payload.update(extra)
    path = outdir / "manifest.json"
    write_json(payload, path)
    return path
