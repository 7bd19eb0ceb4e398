"""Coverage-set semantics over a stored table.

A set of files *covers* a query when no file outside it holds a matching
tuple; it is *tight* when every member holds at least one.
"""

from __future__ import annotations

from typing import Iterable

from .errors import CoverageContractError
from .lake import StoredTable
from .model import Query, compile_predicate


def naive_tight_coverage(q: Query, table: StoredTable) -> frozenset[str]:
    """Read every file once, stopping inside a file at its first match."""
    match = compile_predicate(q.where, table.schema)
    result = set()
    for key in table.file_keys():
        for row in table.read(key):
            if match(row):
                result.add(key)
                break
    return frozenset(result)


def is_coverage(x: Iterable[str], q: Query, table: StoredTable) -> bool:
    """Oracle check: reads every file outside ``x``."""
    x = set(x)
    match = compile_predicate(q.where, table.schema)
    for key in table.file_keys():
        if key in x:
            continue
        if any(match(row) for row in table.read(key)):
            return False
    return True


def tightness_degree(x: Iterable[str], q: Query, table: StoredTable) -> float:
    x = frozenset(x)
    if not is_coverage(x, q, table):
        raise CoverageContractError("tightness degree is only defined for coverage sets")
    tc = naive_tight_coverage(q, table)
    n_files = table.file_count
    if len(tc) >= n_files:
        return 0.0
    return 1.0 - (len(x) - len(tc)) / (n_files - len(tc))


def coverage_degree(q: Query, table: StoredTable) -> float:
    return len(naive_tight_coverage(q, table)) / table.file_count
