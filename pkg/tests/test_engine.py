import datetime as dt

import pytest
from hypothesis import given, settings, strategies as st

from conftest import METRICS_SCHEMA, rec
from lakecover.cache import PredicateCache
from lakecover.coverage import is_coverage, naive_tight_coverage
from lakecover.engine import ExecContext, ExecMode, execute_query, sorted_rows
from lakecover.index import build_index
from lakecover.lake import Lake, LakeFile, StoredTable
from lakecover.model import CnfPredicate, Kind, Op, Query, TableSchema, Term, parse_predicate
from lakecover.store import CountingStore, ObjectStore

Q6 = Query(parse_predicate("(date = 2020-02-20 OR date = 2020-03-13) AND val > 80", METRICS_SCHEMA))


def ctx_for(metrics, **kw):
    store, table, root = metrics
    return ExecContext(table, root, PredicateCache(store, table.prefix), **kw)


def test_baseline_reads_every_file(metrics):
    rep = execute_query(Q6, ExecMode.BASELINE, ctx_for(metrics))
    assert rep.gets == 3 and rep.coverage_size == 3 and not rep.fallback_taken


def test_indexed_full_query_trace(metrics):
    rep = execute_query(Q6, ExecMode.INDEXED, ctx_for(metrics, strategy="all"))
    # three pruned index files plus the single covering data file
    assert rep.gets == 3 + 1 and rep.coverage_size == 1
    assert rep.rows == [(dt.date(2020, 2, 20), "cpu", 88)]


def test_indexed_greedy_plan(metrics):
    rep = execute_query(Q6, ExecMode.INDEXED, ctx_for(metrics))
    assert rep.plan.clause_indexes == [1] and not rep.fallback_taken
    assert rep.rows == [(dt.date(2020, 2, 20), "cpu", 88)]
    assert rep.gets == 1 + 2


def test_fallback_when_threshold_too_low(metrics):
    rep = execute_query(Q6, ExecMode.INDEXED, ctx_for(metrics, k=1))
    assert rep.fallback_taken and rep.gets == 3


def test_cached_second_run_hits(metrics):
    ctx = ctx_for(metrics)
    q = Query(parse_predicate("val > 80 AND date >= 2020-02-01", METRICS_SCHEMA))
    first = execute_query(q, ExecMode.CACHED, ctx)
    second = execute_query(q, ExecMode.CACHED, ctx)
    assert not first.cache_hit and first.gets == 3
    assert second.cache_hit and second.gets == 2 == second.coverage_size
    assert sorted_rows(first.rows) == sorted_rows(second.rows)
    contained = Query(parse_predicate("val > 90 AND date >= 2020-03-01", METRICS_SCHEMA))
    third = execute_query(contained, ExecMode.CACHED, ctx)
    assert third.cache_hit and third.rows == [(dt.date(2020, 3, 22), "cpu", 92)]


def test_cache_sees_appended_files(metrics):
    store, table, root = metrics
    ctx = ctx_for(metrics)
    q = Query(parse_predicate("val > 80", METRICS_SCHEMA))
    execute_query(q, ExecMode.CACHED, ctx)
    new = table.append_file([(dt.date(2020, 4, 1), "cpu", 99)])
    rep = execute_query(q, ExecMode.CACHED, ctx)
    assert rep.cache_hit and (dt.date(2020, 4, 1), "cpu", 99) in rep.rows
    table.delete_file(new.key)
    ctx.cache.on_delete(new.key)
    rep = execute_query(q, ExecMode.CACHED, ctx)
    assert rep.cache_hit and len(rep.rows) == 2


def test_unsatisfiable_interval_reads_nothing(metrics):
    q = Query(parse_predicate("val > 50 AND val < 10", METRICS_SCHEMA))
    rep = execute_query(q, ExecMode.CACHED, ctx_for(metrics))
    assert rep.rows == [] and rep.gets == 0


def test_disjunctive_query_skips_cache(metrics):
    ctx = ctx_for(metrics)
    for _ in range(2):
        rep = execute_query(Q6, ExecMode.CACHED, ctx)
        assert not rep.cache_hit and rep.gets == 3
    assert len(ctx.cache) == 0
    rep = execute_query(Q6, ExecMode.INDEXED_CACHED, ctx)
    assert rep.gets < 3 + 1 and len(rep.rows) == 1


def test_indexed_cached_composes(metrics):
    ctx = ctx_for(metrics)
    q = Query(parse_predicate("val > 85", METRICS_SCHEMA))
    first = execute_query(q, ExecMode.INDEXED_CACHED, ctx)
    assert not first.cache_hit and first.plan is not None
    second = execute_query(q, ExecMode.INDEXED_CACHED, ctx)
    assert second.cache_hit and second.gets == 2


def test_mode_requirements(metrics):
    store, table, root = metrics
    with pytest.raises(ValueError):
        execute_query(Q6, ExecMode.CACHED, ExecContext(table))
    with pytest.raises(ValueError):
        execute_query(Q6, ExecMode.CACHED_SPATIAL, ctx_for(metrics))
    with pytest.raises(ValueError):
        execute_query(Q6, ExecMode.INDEXED, ExecContext(table))


def test_gets_match_instrumented_wrapper(metrics):
    store, _, root = metrics
    wrapped = CountingStore(store)
    table = StoredTable.open(wrapped, "metrics")
    ctx = ExecContext(table, root, PredicateCache(wrapped, table.prefix))
    total = 0
    for mode in (ExecMode.BASELINE, ExecMode.INDEXED, ExecMode.CACHED, ExecMode.CACHED):
        total += execute_query(Q6, mode, ctx).gets
    assert total == wrapped.get_calls - 2  # schema and stats reads when opening


SCHEMA = TableSchema.of(("a", Kind.INT), ("b", Kind.INT))
val = st.one_of(st.none(), st.integers(0, 9))
term = st.builds(Term, st.sampled_from("ab"), st.sampled_from(list(Op)), st.integers(0, 9))


@settings(max_examples=80, deadline=None)
@given(st.lists(st.lists(st.tuples(val, val), max_size=5), min_size=1, max_size=6),
       st.lists(st.lists(term, min_size=1, max_size=2).map(tuple), max_size=3),
       st.sampled_from([None, 0.5, 1000.0]))
def test_all_modes_return_baseline_rows(files, clauses, k):
    store = ObjectStore()
    lake = Lake("r", SCHEMA, [LakeFile(f"f{i}", tuple(r)) for i, r in enumerate(files)])
    table = StoredTable.publish(lake, store)
    root = build_index(lake, ["a", "b"], store, entries_per_file=3)
    q = Query(CnfPredicate(tuple(clauses)))
    base = execute_query(q, ExecMode.BASELINE, ExecContext(table))
    for mode in ExecMode:
        backend = "spatial" if mode is ExecMode.CACHED_SPATIAL else "list"
        cache = PredicateCache(store, table.prefix, backend)
        ctx = ExecContext(table, root, cache, k=k)
        for _ in range(2):  # second pass exercises cache hits
            rep = execute_query(q, mode, ctx)
            assert sorted_rows(rep.rows) == sorted_rows(base.rows)
            if rep.fallback_taken:
                assert rep.gets == base.gets
        for e in cache.entries.values():
            assert is_coverage(e.coverage, q, table)
            assert e.coverage == naive_tight_coverage(q, table)
