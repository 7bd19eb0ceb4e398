"""Coverage-set planning, predicate-containment caching and bucketed layouts
for query pruning over a simulated object-store data lake."""

from .cache import EvictionPolicy, IntervalPredicate, PredicateCache, contains_interval, policy_score, to_interval
from .coverage import coverage_degree, is_coverage, naive_tight_coverage, tightness_degree
from .engine import ExecContext, ExecMode, ExecReport, execute_query
from .errors import (
    CombinationLimitError,
    CorrectnessError,
    CoverageContractError,
    LakeError,
    MalformedRecordError,
    NotCacheableError,
    NotFoundError,
    SchemaError,
    TypeMismatchError,
    UnindexedColumnError,
)
from .estimator import build_bqcpp_input, estimate_clause, regression_adjust
from .index import RootIndex, build_index, coverage_by_index
from .lake import Lake, LakeFile, StoredTable
from .model import Col, CnfPredicate, Kind, Op, Query, TableSchema, Term, parse_predicate
from .planner import BqcppInput, NumericSemigroup, PlanEstimate, SetSemigroup, decide, solve_greedy, solve_optimistic
from .store import ObjectStore

__version__ = "0.1.0"
