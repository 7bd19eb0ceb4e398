import pytest

from lakecover.bench import (BenchConfig, format_workload, generate_lake, generate_workload, parse_config_text,
                             parse_workload, prepare, run_scenario)
from lakecover.coverage import coverage_degree
from lakecover.errors import CorrectnessError
from lakecover.lake import StoredTable
from lakecover.store import ObjectStore

SMALL = BenchConfig(records=600, files=30, domain=1000, queries=12, entries_per_file=50)


def test_lake_is_deterministic_and_conserves_rows():
    a, b = ObjectStore(), ObjectStore()
    la, lb = generate_lake(SMALL, a), generate_lake(SMALL, b)
    assert all(a.get(k) == b.get(k) for k in a.list("data/"))
    assert len(la.files) == 30 and la.row_count == 600
    other = generate_lake(BenchConfig.from_mapping({"seed": "1"}, SMALL))
    assert [f.rows for f in other.files] != [f.rows for f in la.files]


def test_file_count_by_construction():
    lake = generate_lake(BenchConfig(columns=2, records=20_000, files=10_000, queries=1, query_columns=1))
    assert len(lake.files) == 10_000


def test_workload_shape_and_determinism():
    cfg = BenchConfig.from_mapping({"query_columns": "2", "queries": "50"}, SMALL)
    w = generate_workload(cfg)
    assert format_workload(w) == format_workload(generate_workload(cfg))
    assert all(len({t.lhs for t in q.where.terms}) <= 2 for q in w)
    assert parse_workload(format_workload(w), cfg.schema) == w
    cnf = generate_workload(BenchConfig.from_mapping({"style": "cnf", "clauses": "3"}, SMALL))
    assert all(len(q.where.clauses) == 3 for q in cnf)


def test_widest_setting_covers_everything():
    cfg = BenchConfig.from_mapping({"widths": "1.0", "query_columns": "1", "queries": "5"}, SMALL)
    store = ObjectStore()
    generate_lake(cfg, store)
    table = StoredTable.open(store, cfg.table)
    assert all(coverage_degree(q, table) == pytest.approx(1.0) for q in generate_workload(cfg))


def test_config_parsing_and_validation():
    assert parse_config_text("# c\nfiles = 5  # five\n\nseed=3\n") == {"files": "5", "seed": "3"}
    cfg = BenchConfig.from_mapping({"files": "5", "k-multiplier": "0.85"})
    assert cfg.files == 5 and cfg.k_multiplier == 0.85
    for bad in ({"files": "0"}, {"nope": "1"}, {"mode": "fast"}, {"widths": "2"}, {"query_columns": "9"}):
        with pytest.raises(ValueError):
            BenchConfig.from_mapping(bad)
    with pytest.raises(ValueError):
        parse_config_text("files 5")


@pytest.mark.parametrize("mode", ["baseline", "indexed", "cached", "cached-spatial", "indexed-cached"])
def test_run_scenario_modes(mode, tmp_path):
    cfg = BenchConfig.from_mapping({"mode": mode, "anchors": "4", "widths": "0.2,0.4"}, SMALL)
    store = ObjectStore()
    prepare(cfg, store)
    res = run_scenario(cfg, store, out_dir=tmp_path)
    assert res.baseline_gets == cfg.queries * cfg.files
    lines = (tmp_path / "report.tsv").read_text().splitlines()
    assert lines[0].startswith("query\tmode\tgets") and len(lines) == cfg.queries + 1
    assert "read_reduction_pct" in (tmp_path / "summary.txt").read_text()
    if mode == "baseline":
        assert res.total_gets == res.baseline_gets
    if "cached" in mode:
        assert res.hit_rate > 0


def test_report_deterministic_without_elapsed():
    cfg = BenchConfig.from_mapping({"mode": "cached", "anchors": "3"}, SMALL)
    views = []
    for _ in range(2):
        store = ObjectStore()
        prepare(cfg, store, index=False)
        res = run_scenario(cfg, store)
        views.append([(r.gets, r.baseline_gets, r.coverage_size, r.hit, r.rows) for r in res.records])
    assert views[0] == views[1]


def test_baseline_gets_ignore_mode_knobs():
    totals = set()
    for extra in ({"k_multiplier": "0.1"}, {"cache_capacity": "2", "policy": "volume"}, {}):
        cfg = BenchConfig.from_mapping({"mode": "indexed-cached", **extra}, SMALL)
        store = ObjectStore()
        prepare(cfg, store)
        totals.add(run_scenario(cfg, store).baseline_gets)
    assert totals == {SMALL.queries * SMALL.files}


def test_row_mismatch_is_hard_failure(monkeypatch):
    import lakecover.bench as bench
    from lakecover.engine import ExecMode
    cfg = BenchConfig.from_mapping({"mode": "cached", "widths": "0.5"}, SMALL)
    store = ObjectStore()
    prepare(cfg, store, index=False)
    real = bench.execute_query

    def lossy(q, mode, ctx):
        rep = real(q, mode, ctx)
        if mode is not ExecMode.BASELINE and rep.rows:
            rep.rows = rep.rows[1:]
        return rep

    monkeypatch.setattr(bench, "execute_query", lossy)
    with pytest.raises(CorrectnessError):
        run_scenario(cfg, store)
