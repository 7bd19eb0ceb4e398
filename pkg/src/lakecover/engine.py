"""End-to-end query execution: plan, threshold check, coverage, scan."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Iterable

from .cache import PredicateCache, to_interval
from .errors import NotCacheableError
from .estimator import build_bqcpp_input
from .index import RootIndex, coverage_by_index
from .lake import StoredTable
from .model import Query, compile_predicate
from .planner import CoveragePlan, Decision, NumericSemigroup, decide, solve_greedy, solve_optimistic


class ExecMode(enum.Enum):
    BASELINE = "baseline"
    INDEXED = "indexed"
    CACHED = "cached"
    CACHED_SPATIAL = "cached-spatial"
    INDEXED_CACHED = "indexed-cached"


@dataclass
class ExecContext:
    table: StoredTable
    root: RootIndex | None = None
    cache: PredicateCache | None = None
    k: float | None = None  # plan-cost threshold; None means the file count
    k_multiplier: float = 1.0
    ranges: dict | None = None  # column domain bounds for interval predicates
    strategy: str = "greedy"  # greedy | optimistic | all (every clause, no threshold)

    @property
    def store(self):
        return self.table.store

    def threshold(self, file_count: int) -> float:
        base = file_count if self.k is None else self.k
        return max(base * self.k_multiplier, 1e-9)


@dataclass
class ExecReport:
    rows: list
    gets: int
    coverage_size: int
    fallback_taken: bool = False
    cache_hit: bool = False
    elapsed: float = 0.0
    plan: CoveragePlan | None = field(default=None, repr=False)


def _scan(table: StoredTable, keys: Iterable[str], q: Query) -> tuple[list, set]:
    match = compile_predicate(q.where, table.schema)
    rows, hit_files = [], set()
    for key in sorted(keys):
        found = [r for r in table.read(key) if match(r)]
        if found:
            rows.extend(found)
            hit_files.add(key)
    return q.project(rows, table.schema), hit_files


def _baseline(q: Query, ctx: ExecContext):
    keys = ctx.table.file_keys()
    rows, hits = _scan(ctx.table, keys, q)
    return rows, hits, len(keys)


def _indexed(q: Query, ctx: ExecContext):
    """Returns rows, files that matched, coverage size, fallback flag, plan."""
    if ctx.root is None:
        raise ValueError("indexed execution needs a root index")
    keys = ctx.table.file_keys()
    n_files = len(keys)
    n_rows = ctx.table.row_count or 0
    plan = None
    if ctx.strategy == "all":
        plan = CoveragePlan(tuple((i, 0) for i in range(len(q.where.clauses))), 0.0)
    elif n_files and n_rows and q.where.clauses:
        inp = build_bqcpp_input(q, ctx.root, n_rows, n_files)
        sg = NumericSemigroup(n_rows, n_files)
        plan = solve_optimistic(inp, sg) if ctx.strategy == "optimistic" else solve_greedy(inp, sg)
    if (plan is None or not plan.chosen
            or (ctx.strategy != "all" and decide(plan, ctx.threshold(n_files)) is Decision.FALLBACK)):
        rows, hits = _scan(ctx.table, keys, q)
        return rows, hits, n_files, True, plan
    chosen = [q.where.clauses[i] for i in plan.clause_indexes]
    cov = coverage_by_index(chosen, ctx.root, ctx.store)
    rows, hits = _scan(ctx.table, cov, q)
    return rows, hits, len(cov), False, plan


def _cache_interval(q: Query, ctx: ExecContext):
    try:
        return to_interval(q.where, ctx.table.schema, ctx.ranges)
    except NotCacheableError:
        return None


def execute_query(q: Query, mode: ExecMode, ctx: ExecContext) -> ExecReport:
    q.validate(ctx.table.schema)
    store = ctx.store
    before = store.reads
    t0 = time.perf_counter()
    fallback = hit = False
    plan = None

    if mode in (ExecMode.CACHED, ExecMode.CACHED_SPATIAL, ExecMode.INDEXED_CACHED):
        if ctx.cache is None:
            raise ValueError(f"{mode.value} execution needs a cache")
        if mode is ExecMode.CACHED_SPATIAL and ctx.cache.backend != "spatial":
            raise ValueError("cached-spatial execution needs a cache with the spatial backend")
    if mode is ExecMode.BASELINE:
        rows, _, cov = _baseline(q, ctx)
    elif mode is ExecMode.INDEXED:
        rows, _, cov, fallback, plan = _indexed(q, ctx)
    else:
        iv = _cache_interval(q, ctx)
        indexed = mode is ExecMode.INDEXED_CACHED
        if iv is not None and iv.is_false:
            rows, cov = [], 0
        elif iv is None:
            if indexed:
                rows, _, cov, fallback, plan = _indexed(q, ctx)
            else:
                rows, _, cov = _baseline(q, ctx)
        else:
            ts = store.tick
            found = ctx.cache.get_min_coverage(iv)
            if found is not None:
                hit = True
                rows, _ = _scan(ctx.table, found, q)
                cov = len(found)
            else:
                if indexed:
                    rows, tight, cov, fallback, plan = _indexed(q, ctx)
                else:
                    rows, tight, cov = _baseline(q, ctx)
                ctx.cache.put(iv, tight, ts)

    return ExecReport(rows, store.reads - before, cov, fallback, hit, time.perf_counter() - t0, plan)


def sorted_rows(rows: Iterable[tuple]) -> list:
    """Canonical multiset form for cross-mode comparison."""
    return sorted(rows, key=lambda r: tuple((v is None, str(type(v)), v if v is not None else 0) for v in r))
