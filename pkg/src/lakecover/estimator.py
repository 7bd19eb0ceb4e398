"""Per-clause cost and result estimates computed from the root index alone."""

from __future__ import annotations

import datetime as _dt
import math
import statistics
from typing import Sequence

from .index import RootIndex, RootIndexEntry, prune_index_files
from .model import Clause, Op, Query, Term
from .planner import BqcppInput, PlanEstimate, intersect_records, records_to_files  # noqa: F401

UNUSABLE = PlanEstimate(math.inf, None)


def _numeric(v):
    if isinstance(v, _dt.date):
        return v.toordinal()
    if isinstance(v, (int, float)):
        return v
    return None


def overlap_fraction(op: Op, v, e: RootIndexEntry) -> float:
    """Fraction of ``e``'s entries assumed to satisfy ``value op v``.

    Values are taken as uniform over [min, max].  Text ranges have no
    arithmetic, so a partial overlap counts as one half.
    """
    fn = op.fn
    lo_ok, hi_ok = fn(e.min, v), fn(e.max, v)
    if lo_ok and hi_ok:
        return 1.0
    if e.min == e.max:
        return 0.0
    a, b, x = _numeric(e.min), _numeric(e.max), _numeric(v)
    if a is None or x is None:
        return 0.5 if (lo_ok or hi_ok) else 0.0
    if op in (Op.LT, Op.LE):
        frac = (x - a) / (b - a)
    elif op in (Op.GT, Op.GE):
        frac = (b - x) / (b - a)
    else:
        return 0.0
    return min(1.0, max(0.0, frac))


def _term_cost(t: Term, root: RootIndex) -> int:
    return len(prune_index_files(t, root))


def _term_records(t: Term, root: RootIndex) -> float:
    if t.is_column_term:
        return min(root.total_count(c) for c in t.columns)
    if t.op is Op.NE:
        return root.total_count(t.lhs)
    entries = root.for_column(t.lhs)
    v = t.rhs
    if t.op is Op.EQ:
        return sum(e.cnt / e.cntd for e in entries if e.min <= v <= e.max)
    return sum(e.cnt * overlap_fraction(t.op, v, e) for e in entries)


def estimate_clause(clause: Clause, root: RootIndex, table_rows: int) -> PlanEstimate:
    if any(not root.is_indexed(c) for t in clause for c in t.columns):
        return UNUSABLE
    cost = sum(_term_cost(t, root) for t in clause)
    records = sum(_term_records(t, root) for t in clause)
    return PlanEstimate(cost, min(float(records), float(table_rows)))


def build_bqcpp_input(q: Query, root: RootIndex, table_rows: int, file_count: int) -> BqcppInput:
    clauses = [[estimate_clause(c, root, table_rows)] for c in q.where.clauses]
    return BqcppInput(clauses, table_rows, file_count)


def regression_adjust(pairs: Sequence[tuple[float, float]], x: float) -> float:
    """Least-squares line through (estimated, actual) pairs, evaluated at ``x``."""
    if len(pairs) < 2:
        raise ValueError("regression needs at least two pairs")
    xs, ys = zip(*pairs)
    try:
        slope, intercept = statistics.linear_regression(xs, ys)
    except statistics.StatisticsError as exc:
        raise ValueError(f"degenerate regression: {exc}") from None
    return slope * x + intercept
