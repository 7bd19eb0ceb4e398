"""Deterministic lake and workload generation and scenario runs."""

from __future__ import annotations

import dataclasses
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .cache import EvictionPolicy, PredicateCache
from .engine import ExecContext, ExecMode, ExecReport, execute_query, sorted_rows
from .errors import CorrectnessError
from .index import RootIndex, build_index, root_key
from .lake import Lake, LakeFile, StoredTable, data_prefix, part_key
from .model import CnfPredicate, Kind, Op, Query, TableSchema, Term, parse_predicate
from .store import ObjectStore


@dataclass
class BenchConfig:
    table: str = "t"
    columns: int = 3
    records: int = 10_000
    files: int = 100
    seed: int = 0
    domain: int = 1_000_000  # values drawn from [0, domain)
    zipf: float = 0.0  # > 1 enables Zipf-skewed values
    indexed_columns: str = ""  # comma list; empty = all
    entries_per_file: int = 1000
    queries: int = 100
    style: str = "range"  # range | cnf
    query_columns: int = 3  # max columns per range predicate
    widths: str = "0.01,0.05,0.1"  # range widths as domain fractions
    anchors: int = 0  # > 0 snaps range starts to this many grid points
    clauses: int = 2  # cnf: clauses per query
    terms_per_clause: int = 2  # cnf: max terms per clause
    mode: str = "indexed"
    k: float = 0.0  # plan-cost threshold; 0 = file count
    k_multiplier: float = 1.0
    cache_capacity: int = 0  # 0 = unbounded
    policy: str = "unlimited"  # unlimited | coverage | volume | combined:W1,W2
    backend: str = "list"
    latency_us: float = 0.0

    def __post_init__(self):
        for name in ("columns", "records", "files", "queries", "query_columns",
                     "entries_per_file", "clauses", "terms_per_clause", "domain"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.query_columns > self.columns:
            raise ValueError("query_columns cannot exceed columns")
        if self.style not in ("range", "cnf"):
            raise ValueError(f"unknown workload style {self.style!r}")
        ExecMode(self.mode)
        self.width_list  # validates

    @property
    def width_list(self) -> list[float]:
        ws = [float(w) for w in self.widths.split(",") if w.strip()]
        if not ws or any(not 0 < w <= 1 for w in ws):
            raise ValueError(f"widths must be fractions in (0, 1]: {self.widths!r}")
        return ws

    @property
    def column_names(self) -> list[str]:
        return [f"c{i}" for i in range(self.columns)]

    @property
    def index_columns(self) -> list[str]:
        cols = [c.strip() for c in self.indexed_columns.split(",") if c.strip()]
        return cols or self.column_names

    @property
    def schema(self) -> TableSchema:
        return TableSchema.of(*[(c, Kind.INT) for c in self.column_names])

    @property
    def ranges(self) -> dict:
        return {c: (0, self.domain - 1) for c in self.column_names}

    def eviction_policy(self) -> EvictionPolicy:
        return EvictionPolicy.parse(self.policy, self.cache_capacity or None)

    @classmethod
    def from_mapping(cls, values: dict, base: "BenchConfig | None" = None) -> "BenchConfig":
        base = base or cls()
        types = {f.name: type(getattr(base, f.name)) for f in dataclasses.fields(cls)}
        updates = {}
        for key, raw in values.items():
            name = key.replace("-", "_")
            if name not in types:
                raise ValueError(f"unknown config key {key!r}")
            updates[name] = types[name](raw) if isinstance(raw, str) and types[name] is not str else raw
            if types[name] is int and isinstance(updates[name], float):
                updates[name] = int(updates[name])
        return dataclasses.replace(base, **updates)

    def to_text(self) -> str:
        return "".join(f"{f.name}={getattr(self, f.name)}\n" for f in dataclasses.fields(self))


def parse_config_text(text: str) -> dict:
    """``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {n}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def load_config(path: str | Path) -> dict:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def config_key(table: str) -> str:
    return f"meta/{table}/bench-config"


def workload_key(table: str) -> str:
    return f"meta/{table}/workload"


def _values(cfg: BenchConfig, rng: np.random.Generator) -> np.ndarray:
    shape = (cfg.records, cfg.columns)
    if cfg.zipf > 1:
        return (rng.zipf(cfg.zipf, size=shape) - 1) % cfg.domain
    return rng.integers(0, cfg.domain, size=shape)


def generate_lake(cfg: BenchConfig, store: ObjectStore | None = None) -> Lake:
    """Uniform integer table dealt round-robin over a random row order.

    With a store the lake is published and the config saved next to it.
    """
    rng = np.random.default_rng(cfg.seed)
    values = _values(cfg, rng)[rng.permutation(cfg.records)].tolist()
    files = [LakeFile(part_key(cfg.table, i), tuple(map(tuple, values[i::cfg.files])))
             for i in range(cfg.files)]
    lake = Lake(cfg.table, cfg.schema, files)
    if store is not None:
        StoredTable.publish(lake, store)
        store.put(config_key(cfg.table), cfg.to_text().encode("utf-8"))
    return lake


def _range_query(cfg: BenchConfig, rng: np.random.Generator) -> Query:
    widths = cfg.width_list
    n_cols = int(rng.integers(1, cfg.query_columns + 1))
    cols = sorted(rng.choice(cfg.columns, size=n_cols, replace=False).tolist())
    terms = []
    for c in cols:
        w = max(1, int(round(widths[int(rng.integers(len(widths)))] * cfg.domain)))
        span = max(1, cfg.domain - w + 1)
        if cfg.anchors:
            lo = int(rng.integers(cfg.anchors)) * span // cfg.anchors
        else:
            lo = int(rng.integers(span))
        name = f"c{c}"
        terms.append(Term(name, Op.GE, lo))
        terms.append(Term(name, Op.LT, lo + w))
    return Query(CnfPredicate.conjunction(terms))


_CNF_OPS = (Op.EQ, Op.LT, Op.LE, Op.GT, Op.GE, Op.NE)


def _cnf_query(cfg: BenchConfig, rng: np.random.Generator) -> Query:
    widths = cfg.width_list
    clauses = []
    for _ in range(cfg.clauses):
        terms = []
        for _ in range(int(rng.integers(1, cfg.terms_per_clause + 1))):
            col = f"c{int(rng.integers(cfg.columns))}"
            op = _CNF_OPS[int(rng.integers(len(_CNF_OPS) - 1))]  # no != in generated workloads
            w = widths[int(rng.integers(len(widths)))]
            if op in (Op.LT, Op.LE):
                v = int(w * cfg.domain)
            elif op in (Op.GT, Op.GE):
                v = int((1 - w) * cfg.domain)
            else:
                v = int(rng.integers(cfg.domain))
            terms.append(Term(col, op, v))
        clauses.append(tuple(terms))
    return Query(CnfPredicate(tuple(clauses)))


def generate_workload(cfg: BenchConfig) -> list[Query]:
    rng = np.random.default_rng([cfg.seed, 1])
    make = _range_query if cfg.style == "range" else _cnf_query
    return [make(cfg, rng) for _ in range(cfg.queries)]


def format_workload(queries: Sequence[Query]) -> str:
    return "".join(f"{q.where}\n" for q in queries)


def parse_workload(text: str, schema: TableSchema) -> list[Query]:
    return [Query(parse_predicate(line, schema)) for line in text.splitlines() if line.strip()]


def prepare(cfg: BenchConfig, store: ObjectStore, index: bool = True) -> Lake:
    """Generate the lake, the saved workload and optionally the index."""
    lake = generate_lake(cfg, store)
    store.put(workload_key(cfg.table), format_workload(generate_workload(cfg)).encode("utf-8"))
    if index:
        build_index(lake, cfg.index_columns, store, cfg.entries_per_file)
    return lake


REPORT_HEADER = ("query", "mode", "gets", "baseline_gets", "coverage_size", "hit", "fallback",
                 "rows", "elapsed_s", "baseline_elapsed_s")


@dataclass
class QueryRecord:
    query: int
    mode: str
    gets: int
    baseline_gets: int
    coverage_size: int
    hit: bool
    fallback: bool
    rows: int
    elapsed_s: float
    baseline_elapsed_s: float

    def to_tsv(self) -> str:
        vals = [self.query, self.mode, self.gets, self.baseline_gets, self.coverage_size,
                int(self.hit), int(self.fallback), self.rows,
                f"{self.elapsed_s:.6f}", f"{self.baseline_elapsed_s:.6f}"]
        return "\t".join(map(str, vals))


@dataclass
class ScenarioResult:
    mode: str
    records: list[QueryRecord] = field(default_factory=list)

    @property
    def total_gets(self) -> int:
        return sum(r.gets for r in self.records)

    @property
    def baseline_gets(self) -> int:
        return sum(r.baseline_gets for r in self.records)

    @property
    def read_reduction(self) -> float:
        return 100.0 * (1 - self.total_gets / self.baseline_gets) if self.baseline_gets else 0.0

    @property
    def hit_rate(self) -> float:
        return sum(r.hit for r in self.records) / len(self.records) if self.records else 0.0

    def cumulative_hit_rates(self, windows: int = 4) -> list[float]:
        n = len(self.records)
        out = []
        for w in range(1, windows + 1):
            upto = self.records[: n * w // windows]
            out.append(sum(r.hit for r in upto) / len(upto) if upto else 0.0)
        return out

    def summary(self) -> dict:
        elapsed = [r.elapsed_s for r in self.records]
        return {
            "mode": self.mode,
            "queries": len(self.records),
            "total_gets": self.total_gets,
            "baseline_gets": self.baseline_gets,
            "read_reduction_pct": round(self.read_reduction, 3),
            "hit_rate": round(self.hit_rate, 6),
            "fallbacks": sum(r.fallback for r in self.records),
            "mean_elapsed_s": round(statistics.fmean(elapsed), 6) if elapsed else 0.0,
            "mean_baseline_elapsed_s": round(statistics.fmean(r.baseline_elapsed_s for r in self.records), 6)
            if self.records else 0.0,
        }

    def to_tsv(self) -> str:
        return "\t".join(REPORT_HEADER) + "\n" + "".join(r.to_tsv() + "\n" for r in self.records)

    def summary_text(self) -> str:
        return "".join(f"{k}: {v}\n" for k, v in self.summary().items())

    def write(self, out_dir: str | Path) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / "report.tsv", out / "summary.txt"]
        paths[0].write_text(self.to_tsv(), encoding="utf-8")
        paths[1].write_text(self.summary_text(), encoding="utf-8")
        return paths


def make_context(cfg: BenchConfig, store: ObjectStore) -> ExecContext:
    table = StoredTable.open(store, cfg.table)
    mode = ExecMode(cfg.mode)
    root = None
    if mode in (ExecMode.INDEXED, ExecMode.INDEXED_CACHED):
        if not store.exists(root_key(cfg.table)):
            raise FileNotFoundError(f"table {cfg.table!r} has no index; run the index step first")
        root = RootIndex.load(store, cfg.table, table.schema)
    cache = None
    if mode in (ExecMode.CACHED, ExecMode.CACHED_SPATIAL, ExecMode.INDEXED_CACHED):
        backend = "spatial" if mode is ExecMode.CACHED_SPATIAL else cfg.backend
        cache = PredicateCache(store, data_prefix(cfg.table), backend, cfg.eviction_policy())
    return ExecContext(table, root, cache, cfg.k or None, cfg.k_multiplier, cfg.ranges)


def run_scenario(cfg: BenchConfig, store: ObjectStore, queries: Sequence[Query] | None = None,
                 verify: bool = True, out_dir: str | Path | None = None) -> ScenarioResult:
    """Run the workload under ``cfg.mode`` and under Baseline; rows must agree."""
    ctx = make_context(cfg, store)
    if queries is None:
        if store.exists(workload_key(cfg.table)):
            queries = parse_workload(store.get(workload_key(cfg.table)).decode("utf-8"), ctx.table.schema)
        else:
            queries = generate_workload(cfg)
    mode = ExecMode(cfg.mode)
    base_ctx = ExecContext(ctx.table)
    result = ScenarioResult(mode.value)
    for n, q in enumerate(queries):
        rep: ExecReport = execute_query(q, mode, ctx)
        if mode is ExecMode.BASELINE:
            base = rep
        elif verify:
            base = execute_query(q, ExecMode.BASELINE, base_ctx)
        else:
            base = None
        if base is not None and sorted_rows(rep.rows) != sorted_rows(base.rows):
            raise CorrectnessError(f"query {n} ({q.where}): {mode.value} rows differ from baseline")
        result.records.append(QueryRecord(
            n, mode.value, rep.gets, base.gets if base else ctx.table.file_count, rep.coverage_size,
            rep.cache_hit, rep.fallback_taken, len(rep.rows), rep.elapsed,
            base.elapsed if base else 0.0))
    if out_dir is not None:
        result.write(out_dir)
    return result
