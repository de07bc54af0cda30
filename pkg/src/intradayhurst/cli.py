"""
Command-line interface.

    intradayhurst ingest    --input quotes.csv --output-dir out/
    intradayhurst returns   --input quotes.csv --output-dir out/
    intradayhurst analyze   --input quotes.csv --output-dir out/ [--paper-mode]
    intradayhurst bootstrap --input returns.csv --output-dir out/
    intradayhurst simulate  --kind fgn --hurst 0.7 --length 16384 --output fgn.csv
    intradayhurst report    --input-dir out/

Settings resolve as command-line flags > ``--config`` JSON file > defaults;
the defaults are the published settings (windows of 10 and 20 observations,
1000 scrambles, paper sign and scale for returns).

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.  On
failure a JSON error report is written to stderr.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import date, datetime, timezone
from pathlib import Path

from . import pipeline, quotes as q, resample, returns as rt, session, synthetic

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

DEFAULTS = {
    "timestamp_column": "timestamp",
    "timestamp_layout": "iso",
    "base_date": "2000-01-01",
    "price_column": None,
    "bid_column": "bid",
    "ask_column": "ask",
    "delimiter": ",",
    "ask_bid_tolerance": 0.0,
    "tie_policy": "keep-order",
    "exclude_weekdays": [],
    "strict": False,
    "sign": "paper",
    "scale_seconds": 360.0,
    "log_base": "e",
    "max_gap_seconds": None,
    "window_sizes": [10, 20],
    "iterations": 1000,
    "master_seed": 0,
    "workers": 1,
    "confidence": 0.95,
    "mode": "paper",
    "global_lengths": None,
    "format": "csv",
    "input_kind": "auto",
    "dump_iterations": False,
}


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _add_format_flags(p):
    g = p.add_argument_group("quote file format")
    g.add_argument("--timestamp-column")
    g.add_argument("--timestamp-layout", choices=["iso", "day-offset"])
    g.add_argument("--base-date", help="day 0 for the D:HH:MM:SS layout (YYYY-MM-DD)")
    g.add_argument("--price-column", help="single-price column (otherwise bid/ask)")
    g.add_argument("--bid-column")
    g.add_argument("--ask-column")
    g.add_argument("--delimiter")
    g.add_argument("--ask-bid-tolerance", type=float)
    g.add_argument("--tie-policy", choices=list(q.TIE_POLICIES))
    g.add_argument("--exclude-weekdays", type=_int_list, help="e.g. 6,7")
    g.add_argument("--strict", action="store_const", const=True,
                   help="fail on the first invalid row instead of rejecting it")


def _add_return_flags(p):
    g = p.add_argument_group("adjusted returns")
    g.add_argument("--sign", choices=["paper", "forward"])
    g.add_argument("--scale-seconds", type=float)
    g.add_argument("--log-base", help="'e' or a positive number")
    g.add_argument("--max-gap-seconds", type=float)


def _add_analysis_flags(p):
    g = p.add_argument_group("analysis")
    g.add_argument("--input-kind", choices=["auto", "quotes", "returns"])
    g.add_argument("--window-sizes", type=_int_list, help="comma-separated, default 10,20")
    g.add_argument("--iterations", type=int, help="bootstrap scrambles (default 1000)")
    g.add_argument("--master-seed", type=int)
    g.add_argument("--workers", type=int)
    g.add_argument("--confidence", type=float)
    g.add_argument("--global-lengths", type=_int_list)
    g.add_argument("--dump-iterations", action="store_const", const=True)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="intradayhurst", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(p, needs_input=True):
        p.add_argument("--config", help="JSON file of settings")
        if needs_input:
            p.add_argument("--input", required=True)
        p.add_argument("--output-dir", default=".")
        p.add_argument("--format", choices=["csv", "json", "both"])

    p = sub.add_parser("ingest", help="validate quotes, write the cross-tab and table1")
    common(p)
    _add_format_flags(p)

    p = sub.add_parser("returns", help="write gap-adjusted returns")
    common(p)
    _add_format_flags(p)
    _add_return_flags(p)

    p = sub.add_parser("analyze", help="full pipeline with tables, figure data and manifest")
    common(p)
    _add_format_flags(p)
    _add_return_flags(p)
    _add_analysis_flags(p)
    p.add_argument("--mode", choices=["paper", "consistent"])
    p.add_argument("--paper-mode", dest="mode", action="store_const", const="paper")

    p = sub.add_parser("bootstrap", help="scramble bootstrap of local exponents only")
    common(p)
    _add_format_flags(p)
    _add_return_flags(p)
    _add_analysis_flags(p)

    p = sub.add_parser("simulate", help="write a synthetic series in the returns schema")
    p.add_argument("--kind", choices=["fgn", "iid"], default="fgn")
    p.add_argument("--hurst", type=float, default=0.5)
    p.add_argument("--length", type=int, default=2 ** 14)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variance", type=float, default=1.0)
    p.add_argument("--spacing-seconds", type=float, default=1.0)
    p.add_argument("--start", default=synthetic.DEFAULT_START.strftime("%Y-%m-%dT%H:%M:%SZ"))
    p.add_argument("--method", choices=["circulant", "hosking"], default="circulant")
    p.add_argument("--output", required=True, help="CSV path; a .json sidecar is written next to it")

    p = sub.add_parser("report", help="print the tables found in an output directory")
    p.add_argument("--input-dir", required=True)
    p.add_argument("--table", choices=["table1", "table2", "table3"])
    return parser


def resolve_settings(args) -> dict:
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                from_file = json.load(fh)
        except OSError as exc:
            raise DataError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from exc
        unknown = set(from_file) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        settings.update(from_file)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def format_config(s) -> q.FormatConfig:
    return q.FormatConfig(
        timestamp_column=s["timestamp_column"], timestamp_layout=s["timestamp_layout"],
        base_date=date.fromisoformat(s["base_date"]), price_column=s["price_column"],
        bid_column=s["bid_column"], ask_column=s["ask_column"], delimiter=s["delimiter"],
        ask_bid_tolerance=float(s["ask_bid_tolerance"]), tie_policy=s["tie_policy"],
        exclude_weekdays=tuple(s["exclude_weekdays"]), strict=bool(s["strict"]))


def returns_config(s) -> rt.ReturnsConfig:
    base = s["log_base"]
    base = math.e if base in ("e", None) else float(base)
    return rt.ReturnsConfig(sign=s["sign"], scale_seconds=float(s["scale_seconds"]),
                            log_base=base, max_gap_seconds=s["max_gap_seconds"])


def _is_returns_file(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    return "ar" in header and "tau_seconds" in header


def load_input(path, s):
    """Quotes and returns for ``path``; quotes is None for a returns-schema file."""
    kind = s["input_kind"]
    if not Path(path).exists():
        raise DataError(f"input file not found: {path}")
    if kind == "returns" or (kind == "auto" and _is_returns_file(path)):
        with pipeline.stage("returns_engine"):
            return None, rt.read_returns_csv(path)
    with pipeline.stage("quote_ingest"):
        series = q.parse_quote_file(path, format_config(s))
    with pipeline.stage("returns_engine"):
        return series, rt.adjusted_returns(series, returns_config(s))


def _settings_echo(s):
    # worker count cannot change results, so it stays out of the manifest
    return {k: s[k] for k in sorted(s) if k != "workers"}


def cmd_ingest(args, s):
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not Path(args.input).exists():
        raise DataError(f"input file not found: {args.input}")
    with pipeline.stage("quote_ingest"):
        series = q.parse_quote_file(args.input, format_config(s))
        tab = q.crosstab_by_hour_weekday(series)
        gaps = q.inter_quote_gaps(series)
    files = ["crosstab.csv", "crosstab.json", "rejects.csv", "quotes_summary.json", "fig1.csv"]
    q.write_crosstab_csv(tab, out / "crosstab.csv")
    q.write_crosstab_json(tab, out / "crosstab.json")
    q.write_rejects(series, out / "rejects.csv")
    first, last = series.span
    pipeline.write_json({
        "source": series.source_label, "quotes": len(series), "rejected": len(series.rejects),
        "ties": len(series.ties), "first": first.isoformat(), "last": last.isoformat(),
        "span_days": (last.date() - first.date()).days + 1,
    }, out / "quotes_summary.json")
    pipeline._write_rows(pipeline.fig1_rows(tab), out / "fig1.csv")
    files += pipeline.write_table(session.table1(tab, gaps), out, s["format"])
    pipeline.write_manifest(out, files, {"command": "ingest", "settings": _settings_echo(s)})
    return EXIT_OK


def cmd_returns(args, s):
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _, ret = load_input(args.input, s)
    files = ["returns_diagnostics.json"]
    if s["format"] in ("csv", "both"):
        rt.write_returns_csv(ret, out / "returns.csv")
        files.append("returns.csv")
    if s["format"] in ("json", "both"):
        rt.write_returns_json(ret, out / "returns.json")
        files.append("returns.json")
    rt.write_diagnostics(ret, out / "returns_diagnostics.json")
    pipeline.write_manifest(out, files, {"command": "returns", "settings": _settings_echo(s)})
    return EXIT_OK


def cmd_analyze(args, s):
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    quotes, ret = load_input(args.input, s)
    result = pipeline.analyze(
        ret, window_sizes=s["window_sizes"], iterations=s["iterations"],
        master_seed=s["master_seed"], workers=s["workers"], mode=s["mode"],
        confidence=s["confidence"], global_lengths=s["global_lengths"], quotes=quotes)
    files = pipeline.write_analysis(result, out, s["format"], s["dump_iterations"])
    pipeline.write_manifest(out, files, {"command": "analyze", "settings": _settings_echo(s)})
    return EXIT_OK


def cmd_bootstrap(args, s):
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _, ret = load_input(args.input, s)
    with pipeline.stage("resample"):
        cfg = resample.BootstrapConfig(iterations=s["iterations"],
                                       window_sizes=tuple(s["window_sizes"]),
                                       master_seed=s["master_seed"],
                                       confidence=s["confidence"], workers=s["workers"])
        summaries = resample.bootstrap_local_hurst(ret, cfg)
    files = ["bootstrap.json"]
    resample.write_summaries_json(summaries, out / "bootstrap.json")
    if s["dump_iterations"]:
        resample.write_iteration_means(summaries, out / "bootstrap_iterations.csv")
        files.append("bootstrap_iterations.csv")
    pipeline.write_manifest(out, files, {"command": "bootstrap", "settings": _settings_echo(s)})
    return EXIT_OK


def cmd_simulate(args):
    start = datetime.fromisoformat(args.start.replace("Z", "+00:00"))
    if start.tzinfo is None:
        start = start.replace(tzinfo=timezone.utc)
    try:
        if args.kind == "fgn":
            series = synthetic.gen_fgn(
                synthetic.FgnSpec(args.hurst, args.length, args.seed, args.variance),
                method=args.method, spacing_seconds=args.spacing_seconds, start=start)
        else:
            series = synthetic.gen_gaussian_iid(args.length, args.seed, args.variance,
                                                spacing_seconds=args.spacing_seconds, start=start)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    series.write(out, out.with_suffix(".json"))
    return EXIT_OK


def cmd_report(args):
    indir = Path(args.input_dir)
    names = [args.table] if args.table else ["table1", "table2", "table3"]
    shown = 0
    for name in names:
        path = indir / f"{name}.json"
        csv_path = indir / f"{name}.csv"
        if path.exists():
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
            table = session.ReportTable(name, data["columns"],
                                        [[r[c] for c in data["columns"]] for r in data["rows"]],
                                        [[r[c] for c in data["columns"]] for r in data["footer"]])
            text = table.render()
        elif csv_path.exists():
            text = csv_path.read_text(encoding="utf-8").replace(",", "\t")
        else:
            continue
        print(f"== {name} ==")
        print(text)
        shown += 1
    if not shown:
        raise DataError(f"no tables found in {indir}")
    return EXIT_OK


def _report_error(kind, message, **extra):
    payload = {"error": kind, "message": message, **extra}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "report":
            return cmd_report(args)
        s = resolve_settings(args)
        handler = {"ingest": cmd_ingest, "returns": cmd_returns, "analyze": cmd_analyze,
                   "bootstrap": cmd_bootstrap}[args.command]
        return handler(args, s)
    except UsageError as exc:
        _report_error("usage", str(exc))
        return EXIT_USAGE
    except DataError as exc:
        _report_error("data", str(exc), path=getattr(args, "input", None))
        return EXIT_DATA
    except pipeline.StageError as exc:
        kind = "data" if isinstance(exc.original, (ValueError, OSError,
                                                   resample.DegenerateWindowError)) else "internal"
        _report_error(kind, str(exc.original), module=exc.module,
                      path=getattr(args, "input", None))
        return EXIT_DATA if kind == "data" else EXIT_INTERNAL
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001
        _report_error("internal", f"{type(exc).__name__}: {exc}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
