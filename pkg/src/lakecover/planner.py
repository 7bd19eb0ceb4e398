"""Balanced coverage-plan selection.

Given per-clause coverage plans with an estimated cost and an estimated
result, choose at most one plan per clause so that the summed plan costs
plus the size of the intersected results is minimal.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

from .errors import CombinationLimitError

DEFAULT_COMBINATION_LIMIT = 1 << 20


@dataclass(frozen=True)
class PlanEstimate:
    """One way to compute a clause's coverage: its cost and estimated result.

    A ``result`` of ``None`` stands for "everything" (the semigroup identity).
    """

    cost: float
    result: object = None

    @property
    def usable(self) -> bool:
        return not math.isinf(self.cost)


@dataclass
class BqcppInput:
    clauses: list[list[PlanEstimate]]
    table_rows: int = 0
    file_count: int = 0

    def plan(self, i: int, j: int) -> PlanEstimate:
        return self.clauses[i][j]

    def options(self):
        for i, plans in enumerate(self.clauses):
            for j in range(len(plans)):
                yield i, j


class ResultSemigroup(Protocol):
    def combine(self, a, b): ...

    def size(self, r) -> float: ...

    identity: object


class SetSemigroup:
    """Results are sets of files; intersection and cardinality."""

    def __init__(self, universe):
        self.universe = frozenset(universe)
        self.identity = None

    def combine(self, a, b):
        if a is None:
            return b
        if b is None:
            return a
        return a & b

    def size(self, r) -> float:
        return len(self.universe if r is None else r)


class NumericSemigroup:
    """Results are record counts; independence-based intersection and
    balls-in-bins conversion of records to files."""

    def __init__(self, table_rows: int, file_count: int):
        self.table_rows = table_rows
        self.file_count = file_count
        self.identity = None

    def combine(self, a, b):
        if a is None:
            return b
        if b is None:
            return a
        return intersect_records(a, b, self.table_rows)

    def size(self, r) -> float:
        if r is None:
            return float(self.file_count)
        return records_to_files(r, self.file_count)


def records_to_files(r: float, file_count: int) -> float:
    """Expected non-empty files after spreading ``r`` records over ``file_count`` files."""
    if r <= 0:
        return 0.0
    return file_count * (1.0 - ((file_count - 1) / file_count) ** r)


def intersect_records(r1: float, r2: float, table_rows: int) -> int:
    return math.floor(r1 * r2 / table_rows)


@dataclass(frozen=True)
class CoveragePlan:
    chosen: tuple[tuple[int, int], ...]
    total_cost: float
    steps: tuple = field(default=(), compare=False)

    @property
    def clause_indexes(self) -> list[int]:
        return [i for i, _ in self.chosen]


def plan_cost(chosen: Sequence[tuple[int, int]], inp: BqcppInput, sg) -> float:
    total = 0.0
    result = sg.identity
    for i, j in chosen:
        p = inp.plan(i, j)
        total += p.cost
        result = sg.combine(result, p.result)
    return total + sg.size(result)


def _check_one_per_clause(chosen):
    clauses = [i for i, _ in chosen]
    if len(set(clauses)) != len(clauses):
        raise ValueError("at most one plan per clause may be chosen")


def solve_optimistic(inp: BqcppInput, sg, limit: int = DEFAULT_COMBINATION_LIMIT) -> CoveragePlan:
    """Exhaustive search; minimum cost, then fewest plans, then lexicographic order."""
    combos = math.prod(len(plans) + 1 for plans in inp.clauses)
    if combos > limit:
        raise CombinationLimitError(f"{combos} plan combinations exceed {limit}; use solve_greedy")
    per_clause = [[None] + list(range(len(plans))) for plans in inp.clauses]
    best_key, best = None, ()
    for pick in itertools.product(*per_clause):
        chosen = tuple((i, j) for i, j in enumerate(pick) if j is not None)
        key = (plan_cost(chosen, inp, sg), len(chosen), chosen)
        if best_key is None or key < best_key:
            best_key, best = key, chosen
    return CoveragePlan(best, best_key[0])


def solve_greedy(inp: BqcppInput, sg) -> CoveragePlan:
    """Add the single best plan while it lowers the cost; one plan per clause."""
    chosen: tuple = ()
    cost = plan_cost(chosen, inp, sg)
    steps = []
    while len(chosen) < len(inp.clauses):
        used = {i for i, _ in chosen}
        best_key = None
        for i, j in inp.options():
            if i in used:
                continue
            cand = tuple(sorted(chosen + ((i, j),)))
            key = (plan_cost(cand, inp, sg), (i, j))
            if best_key is None or key < best_key:
                best_key, best = key, cand
        if best_key is None or not best_key[0] < cost:
            break
        chosen, cost = best, best_key[0]
        steps.append((best_key[1], cost))
    return CoveragePlan(chosen, cost, tuple(steps))


class Decision(enum.Enum):
    EXECUTE = "execute"
    FALLBACK = "fallback"


def decide(plan: CoveragePlan | float, k: float, inclusive: bool = True) -> Decision:
    """Execute the plan iff its estimated cost is within the threshold ``k``."""
    if k <= 0:
        raise ValueError("threshold K must be positive")
    cost = plan.total_cost if isinstance(plan, CoveragePlan) else plan
    ok = cost <= k if inclusive else cost < k
    return Decision.EXECUTE if ok else Decision.FALLBACK


def reduce_scp_to_bqcpp(universe, subsets: Sequence) -> tuple[BqcppInput, SetSemigroup]:
    """Set cover instance -> plan-selection instance whose optimum is a minimum cover."""
    universe = frozenset(universe)
    subsets = [frozenset(s) for s in subsets]
    if frozenset().union(*subsets) != universe:
        raise ValueError("the subsets do not cover the universe")
    inp = BqcppInput([[PlanEstimate(0, universe - s)] for s in subsets], file_count=len(universe))
    return inp, SetSemigroup(universe)


def extract_scp_solution(plan: CoveragePlan, subsets: Sequence) -> list:
    return [subsets[i] for i in plan.clause_indexes]
