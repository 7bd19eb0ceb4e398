"""Predicate-containment cache of tight coverage sets.

A conjunctive predicate is an axis-aligned box, one interval per column.
A cached (box, coverage, ts) entry answers any later query whose box lies
inside it: the cached coverage plus every file created after ``ts`` is a
coverage set for the new query.
"""

from __future__ import annotations

import datetime as _dt
import functools
import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import NotCacheableError
from .model import CnfPredicate, Kind, Op, TableSchema
from .rangesearch import KDTree, LinearScan, Point2m, UpperBoundRange, negate


@functools.total_ordering
class _Extreme:
    __slots__ = ("sign",)

    def __init__(self, sign):
        self.sign = sign

    def __eq__(self, other):
        return isinstance(other, _Extreme) and other.sign == self.sign

    def __lt__(self, other):
        if isinstance(other, _Extreme):
            return self.sign < other.sign
        return self.sign < 0

    def __gt__(self, other):
        if isinstance(other, _Extreme):
            return self.sign > other.sign
        return self.sign > 0

    def __hash__(self):
        return hash(self.sign)

    def __repr__(self):
        return "-inf" if self.sign < 0 else "+inf"


LOWEST, HIGHEST = _Extreme(-1), _Extreme(1)


@dataclass(frozen=True)
class Dim:
    """One column's range; ``None`` bounds are unbounded."""

    lo: object = None
    hi: object = None
    lo_open: bool = False
    hi_open: bool = False

    def lower_key(self):
        # larger key = tighter lower bound
        return (LOWEST, 0) if self.lo is None else (self.lo, 1 if self.lo_open else 0)

    def upper_key(self):
        # larger key = looser upper bound
        return (HIGHEST, 1) if self.hi is None else (self.hi, 0 if self.hi_open else 1)

    def is_empty(self) -> bool:
        if self.lo is None or self.hi is None:
            return False
        return self.hi < self.lo or (self.lo == self.hi and (self.lo_open or self.hi_open))

    def width(self, kind: Kind) -> float:
        if self.lo is None or self.hi is None:
            return math.inf
        if kind is Kind.DATE:
            return float(self.hi.toordinal() - self.lo.toordinal())
        if kind is Kind.TEXT:
            return 0.0 if self.lo == self.hi else 1.0
        return float(self.hi - self.lo)

    def __str__(self):
        lo = "-inf" if self.lo is None else _fmt(self.lo)
        hi = "+inf" if self.hi is None else _fmt(self.hi)
        return f"{'(' if self.lo_open or self.lo is None else '['}{lo},{hi}{')' if self.hi_open or self.hi is None else ']'}"


def _fmt(v):
    return v.isoformat() if isinstance(v, _dt.date) else str(v)


@dataclass(frozen=True)
class IntervalPredicate:
    schema: TableSchema
    dims: tuple[Dim, ...]
    is_false: bool = False

    @classmethod
    def false(cls, schema: TableSchema) -> "IntervalPredicate":
        return cls(schema, tuple(Dim() for _ in schema.columns), True)

    @classmethod
    def full(cls, schema: TableSchema, ranges: dict | None = None) -> "IntervalPredicate":
        return cls(schema, tuple(_full_dim(c.name, ranges) for c in schema.columns))

    def volume(self) -> float:
        if self.is_false:
            return 0.0
        return math.prod(d.width(c.kind) for d, c in zip(self.dims, self.schema.columns))

    def spatial_keys(self) -> list[tuple]:
        """Per-dimension (lower, upper) keys whose order encodes containment."""
        out = []
        for d, c in zip(self.dims, self.schema.columns):
            if c.kind is Kind.INT:
                out.append((-math.inf if d.lo is None else d.lo, math.inf if d.hi is None else d.hi))
            elif c.kind is Kind.DATE:
                out.append((-math.inf if d.lo is None else d.lo.toordinal(),
                            math.inf if d.hi is None else d.hi.toordinal()))
            else:
                out.append((d.lower_key(), d.upper_key()))
        return out

    def __str__(self):
        if self.is_false:
            return "FALSE"
        return ";".join(f"{c.name}:{d}" for c, d in zip(self.schema.columns, self.dims))


def _full_dim(name: str, ranges: dict | None) -> Dim:
    if ranges and name in ranges:
        lo, hi = ranges[name]
        return Dim(lo, hi)
    return Dim()


def _step(kind: Kind, v, direction: int):
    if kind is Kind.INT:
        return v + direction
    return v + _dt.timedelta(days=direction)


def to_interval(pred: CnfPredicate, schema: TableSchema, ranges: dict | None = None) -> IntervalPredicate:
    """Box of a pure conjunction of ``column op value`` terms.

    Strict bounds on INT and DATE columns are closed by one unit step; on
    FLOAT and TEXT they stay open.  ``ranges`` gives per-column domain
    bounds used for unconstrained dimensions.
    """
    if not pred.is_conjunctive:
        raise NotCacheableError("predicate contains a disjunction")
    pred.validate(schema)
    dims = {c.name: _full_dim(c.name, ranges) for c in schema.columns}
    for t in pred.terms:
        if t.is_column_term:
            raise NotCacheableError(f"column comparison {t} has no interval form")
        if t.op is Op.NE:
            raise NotCacheableError(f"{t} has no interval form")
        kind = schema.kind(t.lhs)
        d, v = dims[t.lhs], t.rhs
        discrete = kind in (Kind.INT, Kind.DATE)
        lowers, uppers = [], []
        if t.op in (Op.EQ, Op.GE):
            lowers.append((v, False))
        if t.op in (Op.EQ, Op.LE):
            uppers.append((v, False))
        if t.op is Op.GT:
            lowers.append((_step(kind, v, 1), False) if discrete else (v, True))
        if t.op is Op.LT:
            uppers.append((_step(kind, v, -1), False) if discrete else (v, True))
        for lo, lo_open in lowers:
            if Dim(lo, None, lo_open).lower_key() > d.lower_key():
                d = Dim(lo, d.hi, lo_open, d.hi_open)
        for hi, hi_open in uppers:
            if Dim(None, hi, False, hi_open).upper_key() < d.upper_key():
                d = Dim(d.lo, hi, d.lo_open, hi_open)
        dims[t.lhs] = d
    iv = IntervalPredicate(schema, tuple(dims[c.name] for c in schema.columns))
    if any(d.is_empty() for d in iv.dims):
        return IntervalPredicate.false(schema)
    return iv


def contains_interval(a: IntervalPredicate, b: IntervalPredicate) -> bool:
    """True iff box ``a`` lies inside box ``b``."""
    if a.is_false:
        return True
    if b.is_false:
        return False
    return all(
        da.lower_key() >= db.lower_key() and da.upper_key() <= db.upper_key()
        for da, db in zip(a.dims, b.dims)
    )


@dataclass(frozen=True)
class EvictionPolicy:
    kind: str = "unlimited"  # unlimited | coverage | volume | combined
    capacity: int | None = None
    w1: float = 0.0
    w2: float = 0.0
    literal: bool = False

    def __post_init__(self):
        if self.kind not in ("unlimited", "coverage", "volume", "combined"):
            raise ValueError(f"unknown eviction policy {self.kind!r}")
        if self.kind != "unlimited" and (self.capacity is None or self.capacity < 1):
            raise ValueError("bounded policies need a capacity >= 1")
        if self.kind == "combined":
            if self.w1 < 0 or self.w2 < 0 or not math.isclose(self.w1 + self.w2, 1.0):
                raise ValueError("combined policy weights must be non-negative and sum to 1")

    @classmethod
    def unlimited(cls):
        return cls()

    @classmethod
    def coverage_optimized(cls, capacity: int):
        return cls("coverage", capacity)

    @classmethod
    def volume_optimized(cls, capacity: int):
        return cls("volume", capacity)

    @classmethod
    def combined(cls, capacity: int, w1: float, w2: float, literal: bool = False):
        return cls("combined", capacity, w1, w2, literal)

    @classmethod
    def parse(cls, text: str, capacity: int | None):
        """``unlimited``, ``coverage``, ``volume`` or ``combined:W1,W2``."""
        name, _, args = text.partition(":")
        if name == "combined":
            w1, w2 = (float(x) for x in args.split(","))
            return cls.combined(capacity, w1, w2)
        if name == "unlimited":
            return cls.unlimited()
        return cls(name, capacity)


@dataclass(frozen=True)
class CacheEntry:
    interval: IntervalPredicate
    coverage: frozenset
    ts: int
    handle: int

    @property
    def volume(self) -> float:
        return self.interval.volume()


def policy_score(volume: float, coverage_size: int, stats: tuple, w1: float, w2: float,
                 literal: bool = False) -> float:
    """Keep-score of an entry; the lowest-scoring entry is evicted first.

    ``stats`` is (Vmin, Vmax, Covmin, Covmax) over live entries.  Larger
    volume and smaller coverage score higher.  ``literal=True`` rewards
    larger coverage instead.
    """
    vmin, vmax, cmin, cmax = stats
    if math.isinf(vmax):
        v_term = 1.0 if math.isinf(volume) else 0.0
    else:
        v_term = (volume - vmin) / (vmax - vmin) if vmax > vmin else 0.0
    if cmax > cmin:
        c_term = (coverage_size - cmin) if literal else (cmax - coverage_size)
        c_term /= (cmax - cmin)
    else:
        c_term = 0.0
    return w1 * v_term + w2 * c_term


class PredicateCache:
    """Interval -> tight coverage cache with list or KD-tree lookup."""

    def __init__(self, store=None, data_prefix: str = "", backend: str = "list",
                 policy: EvictionPolicy | None = None):
        if backend not in ("list", "spatial"):
            raise ValueError(f"unknown backend {backend!r}")
        self.store = store
        self.data_prefix = data_prefix
        self.backend = backend
        self.policy = policy or EvictionPolicy()
        self.entries: dict[int, CacheEntry] = {}
        self._by_file: dict[str, set[int]] = {}
        self._index = None
        self._heap: list = []
        self._handles = itertools.count()
        self.lookups = 0
        self.hits = 0
        self.evictions = 0

    def __len__(self):
        return len(self.entries)

    @property
    def last_visited(self) -> int:
        return self._index.last_visited if self._index is not None else 0

    def _ensure_index(self, iv: IntervalPredicate):
        if self._index is None:
            k = 2 * len(iv.dims)
            self._index = KDTree(k) if self.backend == "spatial" else LinearScan(k)

    @staticmethod
    def _point(iv: IntervalPredicate) -> tuple:
        keys = iv.spatial_keys()
        return tuple(lo for lo, _ in keys) + tuple(negate(hi) for _, hi in keys)

    def put(self, interval: IntervalPredicate, coverage: Iterable[str], ts: int) -> int | None:
        """Store an entry; returns its handle, or None if it was evicted at once."""
        if interval.is_false:
            raise ValueError("cannot cache an unsatisfiable predicate")
        self._ensure_index(interval)
        handle = next(self._handles)
        entry = CacheEntry(interval, frozenset(coverage), ts, handle)
        self.entries[handle] = entry
        for f in entry.coverage:
            self._by_file.setdefault(f, set()).add(handle)
        self._index.insert(Point2m(self._point(interval), handle))
        self._push(entry)
        while self.policy.capacity is not None and len(self.entries) > self.policy.capacity:
            self._evict()
        return handle if handle in self.entries else None

    def _heap_key(self, entry: CacheEntry):
        if self.policy.kind == "coverage":
            return -len(entry.coverage)
        if self.policy.kind == "volume":
            return entry.volume
        return None

    def _push(self, entry: CacheEntry):
        key = self._heap_key(entry)
        if key is not None:
            heapq.heappush(self._heap, (key, entry.handle))

    def stats(self) -> tuple:
        vols = [e.volume for e in self.entries.values()]
        covs = [len(e.coverage) for e in self.entries.values()]
        return min(vols), max(vols), min(covs), max(covs)

    def _victim(self) -> int:
        if self.policy.kind == "combined":
            stats = self.stats()
            p = self.policy
            return min(self.entries.values(),
                       key=lambda e: (policy_score(e.volume, len(e.coverage), stats, p.w1, p.w2, p.literal),
                                      e.handle)).handle
        while True:
            key, handle = heapq.heappop(self._heap)
            entry = self.entries.get(handle)
            if entry is not None and self._heap_key(entry) == key:
                return handle

    def _evict(self):
        self._remove(self._victim())
        self.evictions += 1

    def _remove(self, handle: int):
        entry = self.entries.pop(handle)
        for f in entry.coverage:
            bucket = self._by_file.get(f)
            if bucket is not None:
                bucket.discard(handle)
                if not bucket:
                    del self._by_file[f]
        self._index.remove(handle)

    def containing(self, interval: IntervalPredicate) -> list[int]:
        """Handles of entries whose box contains ``interval``."""
        if self._index is None:
            return []
        if interval.is_false:
            return sorted(self.entries)
        keys = interval.spatial_keys()
        bounds = tuple(lo for lo, _ in keys) + tuple(negate(hi) for _, hi in keys)
        return sorted(self._index.range_search(UpperBoundRange(bounds)))

    def get_min_coverage(self, interval: IntervalPredicate) -> frozenset | None:
        self.lookups += 1
        best = None
        appended: dict[int, set] = {}
        for handle in self.containing(interval):
            entry = self.entries[handle]
            current = entry.coverage
            if self.store is not None:
                if entry.ts not in appended:
                    appended[entry.ts] = self.store.files_created_after(self.data_prefix, entry.ts)
                if appended[entry.ts]:
                    current = current | appended[entry.ts]
            if best is None or len(current) < len(best):
                best = current
        if best is not None:
            self.hits += 1
        return best

    def on_delete(self, file_key: str, accelerated: bool = True):
        if accelerated:
            handles = self._by_file.pop(file_key, set())
        else:
            handles = [h for h, e in self.entries.items() if file_key in e.coverage]
            self._by_file.pop(file_key, None)
        for h in sorted(handles):
            old = self.entries[h]
            entry = CacheEntry(old.interval, old.coverage - {file_key}, old.ts, h)
            self.entries[h] = entry
            self._push(entry)

    @property
    def hit_rate(self) -> float:
        return self.hits / self.lookups if self.lookups else 0.0

    def dump_tsv(self) -> str:
        lines = ["interval\tcoverage\tts"]
        for h in sorted(self.entries):
            e = self.entries[h]
            lines.append(f"{e.interval}\t{','.join(sorted(e.coverage))}\t{e.ts}")
        return "\n".join(lines) + "\n"
