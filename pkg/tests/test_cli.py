import csv
import json

import pytest

from intradayhurst.cli import main


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def fgn_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("sim") / "fgn.csv"
    assert run("simulate", "--hurst", 0.7, "--length", 4000, "--seed", 3,
               "--spacing-seconds", 30, "--output", path) == 0
    return path


def analyze(src, out, *extra):
    return run("analyze", "--input", src, "--output-dir", out, "--iterations", 20,
               "--master-seed", 11, *extra)


def test_ingest_writes_crosstab_and_table1(tmp_path, reference_quote_file):
    assert run("ingest", "--input", reference_quote_file, "--output-dir", tmp_path) == 0
    rows = list(csv.reader((tmp_path / "crosstab.csv").open()))
    assert len(rows) == 1 + 24 + 1 and rows[-1][0] == "total"
    assert rows[-1][rows[0].index("total")] == "29576"
    t1 = list(csv.DictReader((tmp_path / "table1.csv").open()))
    assert t1[24]["GMT"] == "Total" and t1[24]["total"] == "29576"
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    listed = {e["file"] for e in manifest["files"]}
    written = {p.name for p in tmp_path.iterdir()} - {"manifest.json"}
    assert listed == written


def test_missing_input_reports_the_path(tmp_path, capsys):
    missing = tmp_path / "absent.csv"
    assert run("ingest", "--input", missing, "--output-dir", tmp_path) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "data" and err["path"] == str(missing)


def test_bad_rows_only_is_a_data_error(tmp_path, capsys):
    src = tmp_path / "q.csv"
    src.write_text("timestamp,bid,ask\nnope,1,2\n")
    assert run("analyze", "--input", src, "--output-dir", tmp_path / "o") == 2
    err = json.loads(capsys.readouterr().err)
    assert err["module"] == "quote_ingest" and "fewer than 2" in err["message"]


def test_usage_errors(tmp_path, capsys):
    assert run("analyze") == 1
    assert run("frobnicate") == 1
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"no_such_setting": 1}))
    assert run("returns", "--input", "x.csv", "--config", cfg) == 1
    capsys.readouterr()


def test_simulate_open_interval(tmp_path):
    assert run("simulate", "--hurst", 0.9999, "--length", 256, "--output", tmp_path / "a.csv") == 0
    assert run("simulate", "--hurst", 1.0, "--length", 256, "--output", tmp_path / "b.csv") == 1
    assert not (tmp_path / "b.csv").exists()


def test_simulate_sidecar_echoes_the_seed(tmp_path):
    assert run("simulate", "--hurst", 0.6, "--length", 128, "--seed", 424242,
               "--output", tmp_path / "s.csv") == 0
    meta = json.loads((tmp_path / "s.json").read_text())
    assert meta["seed"] == 424242 and meta["hurst_h"] == 0.6
    assert (tmp_path / "s.csv").read_text().startswith("timestamp,tau_seconds,ar,hour,weekday\n")


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scale_seconds": 720.0, "sign": "forward"}))
    src = tmp_path / "q.csv"
    src.write_text("timestamp,price\n2000-05-08T03:00:00Z,1.0\n2000-05-08T03:06:00Z,2.0\n")
    assert run("returns", "--input", src, "--output-dir", tmp_path / "a", "--config", cfg,
               "--price-column", "price", "--scale-seconds", 360) == 0
    rows = list(csv.DictReader((tmp_path / "a" / "returns.csv").open()))
    # flag beats file for scale, file beats default for sign
    assert float(rows[0]["ar"]) == pytest.approx(0.6931471805599453)


def test_analyze_is_byte_deterministic_across_runs_and_workers(tmp_path, fgn_file):
    assert analyze(fgn_file, tmp_path / "a") == 0
    assert analyze(fgn_file, tmp_path / "b") == 0
    assert analyze(fgn_file, tmp_path / "c", "--workers", 3) == 0
    a, b, c = ((tmp_path / d / "manifest.json").read_bytes() for d in "abc")
    assert a == b == c
    manifest = json.loads(a)
    names = {e["file"] for e in manifest["files"]}
    assert {"local_h10.csv", "local_h20.csv", "global_hurst.json", "bootstrap.json",
            "ztest.json", "table2.csv", "table3.csv", "fig2.csv", "fig3.csv"} <= names
    assert names == {p.name for p in (tmp_path / "a").iterdir()} - {"manifest.json"}


def test_modes_differ_only_in_percent_change_columns(tmp_path, fgn_file):
    assert analyze(fgn_file, tmp_path / "p", "--paper-mode") == 0
    assert analyze(fgn_file, tmp_path / "k", "--mode", "consistent") == 0
    for f in (tmp_path / "p").iterdir():
        if f.name in ("manifest.json", "table3.csv"):
            continue
        assert f.read_bytes() == (tmp_path / "k" / f.name).read_bytes(), f.name
    p = list(csv.reader((tmp_path / "p" / "table3.csv").open()))
    k = list(csv.reader((tmp_path / "k" / "table3.csv").open()))
    header = p[0]
    changed = {header[j] for i in range(len(p)) for j in range(len(header)) if p[i][j] != k[i][j]}
    assert changed and changed <= {"DR10", "Dsigma10", "DR20", "Dsigma20", "DR10-20", "Dsigma10-20"}


def test_fgn_round_trip_through_analyze(tmp_path, fgn_file):
    assert analyze(fgn_file, tmp_path / "o", "--format", "both") == 0
    fit = json.loads((tmp_path / "o" / "global_hurst.json").read_text())
    assert 0.5 < fit["exponent_h"] < 0.9
    fig3 = list(csv.DictReader((tmp_path / "o" / "fig3.csv").open()))
    assert len(fig3) == 24 and {"mean_h20", "boot_h20", "boot_lo_h20", "boot_hi_h20"} <= set(fig3[0])
    ztest = json.loads((tmp_path / "o" / "ztest.json").read_text())
    assert ztest["20"]["z"] > 0


def test_bootstrap_and_report_commands(tmp_path, fgn_file, capsys):
    assert run("bootstrap", "--input", fgn_file, "--output-dir", tmp_path, "--iterations", 5,
               "--window-sizes", "10", "--dump-iterations") == 0
    rows = list(csv.reader((tmp_path / "bootstrap_iterations.csv").open()))
    assert len(rows) == 1 + 5
    assert analyze(fgn_file, tmp_path / "o", "--format", "json") == 0
    capsys.readouterr()
    assert run("report", "--input-dir", tmp_path / "o", "--table", "table3") == 0
    out = capsys.readouterr().out
    assert out.startswith("== table3 ==") and "F-Statistic" in out
    assert run("report", "--input-dir", tmp_path / "empty") == 2
