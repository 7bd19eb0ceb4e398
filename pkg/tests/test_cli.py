import subprocess
import sys

import pytest

import lakecover.bench as bench
from lakecover.cli import main
from lakecover.engine import ExecMode

SMALL = ["--records", "400", "--files", "20", "--queries", "6", "--domain", "1000", "--entries-per-file", "40"]


def test_gen_index_run(tmp_path, capsys):
    store, out = str(tmp_path / "s"), tmp_path / "out"
    assert main(["--store", store, "gen", *SMALL]) == 0
    assert main(["--store", store, "index", "--indexed-columns", "c0,c1"]) == 0
    assert "indexed c0, c1" in capsys.readouterr().out
    assert main(["--store", store, "run", "--mode", "indexed", "--out", str(out), "--plot"]) == 0
    text = capsys.readouterr().out
    assert "read_reduction_pct" in text
    assert (out / "report.tsv").exists() and (out / "report.png").stat().st_size > 0
    assert len((out / "report.tsv").read_text().splitlines()) == 7


def test_run_auto_prepares_and_reads_config(tmp_path, capsys):
    cfg = tmp_path / "bench.cfg"
    cfg.write_text("records = 300\nfiles = 10\nqueries = 4\nmode = cached\n")
    out = tmp_path / "out"
    args = ["--store", str(tmp_path / "s"), "run", "--config", str(cfg), "--set", "queries=5", "--out", str(out)]
    assert main(args) == 0
    assert len((out / "report.tsv").read_text().splitlines()) == 6


def test_run_regenerates_workload_when_settings_change(tmp_path):
    store = str(tmp_path / "s")
    assert main(["--store", store, "gen", *SMALL]) == 0
    out = tmp_path / "out"
    assert main(["--store", store, "run", "--mode", "cached", "--set", "queries=3", "--out", str(out)]) == 0
    assert len((out / "report.tsv").read_text().splitlines()) == 4
    assert main(["--store", store, "run", "--mode", "cached", "--out", str(out)]) == 0
    assert len((out / "report.tsv").read_text().splitlines()) == 7


def test_workload_file(tmp_path):
    store = str(tmp_path / "s")
    assert main(["--store", store, "gen", *SMALL]) == 0
    wl = tmp_path / "w.txt"
    wl.write_text("c0 >= 0 AND c0 < 500\nc1 >= 100 AND c1 < 120 AND c2 >= 0\n")
    out = tmp_path / "out"
    assert main(["--store", store, "run", "--mode", "cached", "--workload", str(wl), "--out", str(out)]) == 0
    assert len((out / "report.tsv").read_text().splitlines()) == 3


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["gen", "--files", "0"],
    ["gen", "--mode", "warp"],
    ["gen", "--set", "files"],
    ["gen", "--set", "nonsense=1"],
])
def test_usage_errors_exit_1(argv, tmp_path):
    assert main(["--store", str(tmp_path / "s"), *argv]) == 1


def test_correctness_failure_exits_2(tmp_path, monkeypatch):
    real = bench.execute_query

    def lossy(q, mode, ctx):
        rep = real(q, mode, ctx)
        if mode is not ExecMode.BASELINE and rep.rows:
            rep.rows = rep.rows[:-1]
        return rep

    monkeypatch.setattr(bench, "execute_query", lossy)
    argv = ["--store", str(tmp_path / "s"), "run", *SMALL, "--mode", "cached", "--widths", "0.5",
            "--out", str(tmp_path / "o")]
    assert main(argv) == 2


def test_genomic_cli(tmp_path, capsys):
    raw = tmp_path / "raw.tsv"
    raw.write_text("chrom\tpos\tref\talt\tsample_id\n"
                   "1\t150\tA\tG\ts1\n1\t150\tA\tG\ts2\n1\t250\tC\tT\ts1\n2\t10\tG\tA\ts3\n")
    store = str(tmp_path / "s")
    assert main(["--store", store, "genomic-etl", str(raw), "-p", "100"]) == 0
    assert "3 bucket files from 4 calls" in capsys.readouterr().out
    assert main(["--store", store, "genomic-query", "1", "100", "200"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines == ["chrom\tpos\tref\talt\tids", "1\t150\tA\tG\ts1,s2"]
    bad = tmp_path / "bad.tsv"
    bad.write_text("1\t5\tA\tN\ts1\n")
    assert main(["--store", store, "genomic-etl", str(bad)]) == 1
    assert main(["--store", store, "genomic-query", "1", "9", "3"]) == 1


def test_console_module_entry(tmp_path):
    r = subprocess.run([sys.executable, "-m", "lakecover.cli", "--store", str(tmp_path), "genomic-query", "1", "1", "2"],
                       capture_output=True, text=True)
    assert r.returncode == 1 and "error" in r.stderr
