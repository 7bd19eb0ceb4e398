import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from lakecover.errors import CombinationLimitError
from lakecover.planner import (BqcppInput, CoveragePlan, Decision, NumericSemigroup, PlanEstimate, SetSemigroup,
                               decide, extract_scp_solution, plan_cost, reduce_scp_to_bqcpp, solve_greedy,
                               solve_optimistic)

FILES = {"file201", "file170", "file051", "file033", "file302", "file048", "file079", "file100"}
EXAMPLE = BqcppInput([
    [PlanEstimate(5, frozenset({"file170", "file051"}))],
    [PlanEstimate(1, frozenset({"file051", "file033", "file302", "file048"}))],
    [PlanEstimate(2, frozenset({"file201", "file170", "file051", "file079"}))],
], file_count=len(FILES))
SG = SetSemigroup(FILES)
SUBSET_COSTS = {(0,): 7, (1,): 5, (2,): 6, (0, 1): 7, (0, 2): 9, (1, 2): 4, (0, 1, 2): 9}


def test_subset_costs():
    for subset, cost in SUBSET_COSTS.items():
        assert plan_cost([(i, 0) for i in subset], EXAMPLE, SG) == cost
    assert plan_cost([], EXAMPLE, SG) == len(FILES)


def test_optimistic_on_example():
    plan = solve_optimistic(EXAMPLE, SG)
    assert plan.clause_indexes == [1, 2] and plan.total_cost == 4


def test_greedy_trace_on_example():
    plan = solve_greedy(EXAMPLE, SG)
    assert [(step, cost) for step, cost in plan.steps] == [((1, 0), 5), ((2, 0), 4)]
    assert plan.total_cost == 4


def test_single_clause_zero_result():
    inp = BqcppInput([[PlanEstimate(0, 0)]], table_rows=100, file_count=10)
    assert solve_optimistic(inp, NumericSemigroup(100, 10)).chosen == ((0, 0),)
    assert solve_optimistic(inp, NumericSemigroup(100, 10)).total_cost == 0


def test_zero_clauses():
    inp = BqcppInput([], table_rows=10, file_count=10000)
    for solve in (solve_greedy, solve_optimistic):
        plan = solve(inp, NumericSemigroup(10, 10000))
        assert plan.chosen == () and plan.total_cost == 10000


def test_combination_limit():
    inp = BqcppInput([[PlanEstimate(1, 1)] * 3 for _ in range(11)], 10, 10)
    with pytest.raises(CombinationLimitError):
        solve_optimistic(inp, NumericSemigroup(10, 10))


def test_decide():
    assert decide(1714, 10000) is Decision.EXECUTE
    assert decide(10000, 10000) is Decision.EXECUTE
    assert decide(10000, 10000, inclusive=False) is Decision.FALLBACK
    assert decide(math.inf, 10000) is Decision.FALLBACK
    assert decide(CoveragePlan((), 5.0), 4) is Decision.FALLBACK
    with pytest.raises(ValueError):
        decide(1, 0)


def test_reduction_worked_example():
    universe = {1, 2, 3, 4, 5}
    subsets = [{1, 2}, {1, 3, 4}, {2, 4, 5}, {5}]
    inp, sg = reduce_scp_to_bqcpp(universe, subsets)
    assert [c[0].result for c in inp.clauses] == [{3, 4, 5}, {2, 5}, {1, 3}, {1, 2, 3, 4}]
    plan = solve_optimistic(inp, sg)
    assert [inp.plan(i, j).result for i, j in plan.chosen] == [{2, 5}, {1, 3}]
    assert extract_scp_solution(plan, subsets) == [{1, 3, 4}, {2, 4, 5}]
    assert extract_scp_solution(solve_optimistic(*reduce_scp_to_bqcpp(universe, [universe])), [universe]) == [universe]
    with pytest.raises(ValueError):
        reduce_scp_to_bqcpp(universe, [{1}])


def test_semigroup_identity_size():
    assert SG.size(SG.identity) == len(FILES)
    assert NumericSemigroup(100, 7).size(None) == 7


plan_est = st.builds(PlanEstimate, st.integers(0, 50), st.integers(0, 1000))
numeric_inputs = st.lists(st.lists(plan_est, min_size=1, max_size=2), max_size=5)


@settings(max_examples=200, deadline=None)
@given(numeric_inputs, st.sampled_from([10, 100, 1000]))
def test_optimistic_dominates_greedy(clauses, files):
    inp = BqcppInput(clauses, 1000, files)
    sg = NumericSemigroup(1000, files)
    o, g = solve_optimistic(inp, sg), solve_greedy(inp, sg)
    assert o.total_cost <= g.total_cost + 1e-9
    for plan in (o, g):
        ids = plan.clause_indexes
        assert len(ids) == len(set(ids))
        assert plan.total_cost == pytest.approx(plan_cost(plan.chosen, inp, sg))


@given(st.lists(st.frozensets(st.integers(0, 5)), max_size=3), st.frozensets(st.integers(0, 5)))
def test_set_semigroup_associative_commutative(sets, x):
    sg = SetSemigroup(range(6))
    vals = [None] + sets + [x]
    for a, b, c in itertools.product(vals[:4], repeat=3):
        assert sg.combine(a, b) == sg.combine(b, a)
        assert sg.combine(sg.combine(a, b), c) == sg.combine(a, sg.combine(b, c))
