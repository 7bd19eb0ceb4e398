"""Value -> (file, record) indexes stored inside the lake, plus the root index.

Each indexed column is a globally sorted run of entries chunked into index
files.  The root index keeps (min, max, cnt, cntd) per index file, is held
in memory, and is what pruning and estimation consult.
"""

from __future__ import annotations

import bisect
import functools
import heapq
from collections import namedtuple
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import SchemaError, UnindexedColumnError
from .lake import Lake, LakeFile, data_prefix
from .model import Clause, Kind, Op, TableSchema, Term
from .store import ObjectStore

IndexEntry = namedtuple("IndexEntry", "value file record")

INDEX_HEADER = "value\tfile\trecord"
ROOT_HEADER = "col\tfile\tmin\tmax\tcnt\tcntd"


def index_file_key(table: str, column: str, n: int) -> str:
    return f"index/{table}/{column}/part-{n:06d}"


def root_key(table: str) -> str:
    return f"index/{table}/_root"


@dataclass(frozen=True)
class RootIndexEntry:
    col: str
    file: str
    min: object
    max: object
    cnt: int
    cntd: int


class RootIndex:
    """Per-index-file summaries for one table; always fully in memory."""

    def __init__(self, table: str, schema: TableSchema, entries: Iterable[RootIndexEntry] = ()):
        self.table = table
        self.schema = schema
        self.entries: list[RootIndexEntry] = []
        self._by_col: dict[str, list[RootIndexEntry]] = {}
        for e in entries:
            self.add(e)

    def declare(self, column: str):
        """Mark ``column`` indexed even if it has no index files (all values empty)."""
        self._by_col.setdefault(column, [])

    def add(self, entry: RootIndexEntry):
        self.entries.append(entry)
        self._by_col.setdefault(entry.col, []).append(entry)

    @property
    def columns(self) -> list[str]:
        return list(self._by_col)

    def is_indexed(self, column: str) -> bool:
        return column in self._by_col

    def for_column(self, column: str) -> list[RootIndexEntry]:
        try:
            return self._by_col[column]
        except KeyError:
            raise UnindexedColumnError(f"column {column!r} is not indexed") from None

    def total_count(self, column: str) -> int:
        return sum(e.cnt for e in self.for_column(column))

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return isinstance(other, RootIndex) and (self.table, self.schema, self.entries, sorted(self.columns)) == (
            other.table, other.schema, other.entries, sorted(other.columns))

    def to_tsv(self) -> bytes:
        lines = [ROOT_HEADER]
        for e in self.entries:
            kind = self.schema.kind(e.col)
            lines.append(f"{e.col}\t{e.file}\t{kind.format(e.min)}\t{kind.format(e.max)}\t{e.cnt}\t{e.cntd}")
        # indexed columns without any index file keep a placeholder row
        lines.extend(f"{c}\t\t\t\t0\t0" for c, rows in self._by_col.items() if not rows)
        return ("\n".join(lines) + "\n").encode("utf-8")

    @classmethod
    def from_tsv(cls, table: str, schema: TableSchema, blob: bytes) -> "RootIndex":
        lines = blob.decode("utf-8").splitlines()
        if not lines or lines[0] != ROOT_HEADER:
            raise SchemaError("root index file has an unexpected header")
        root = cls(table, schema)
        for line in lines[1:]:
            col, file, lo, hi, cnt, cntd = line.split("\t")
            if not file:
                root.declare(col)
                continue
            kind = schema.kind(col)
            root.add(RootIndexEntry(col, file, kind.parse(lo), kind.parse(hi), int(cnt), int(cntd)))
        return root

    def save(self, store: ObjectStore) -> int:
        return store.put(root_key(self.table), self.to_tsv())

    @classmethod
    def load(cls, store: ObjectStore, table: str, schema: TableSchema) -> "RootIndex":
        return cls.from_tsv(table, schema, store.get(root_key(table)))


def encode_index_file(kind: Kind, entries: Sequence[IndexEntry]) -> bytes:
    lines = [INDEX_HEADER]
    lines.extend(f"{kind.format(e.value)}\t{e.file}\t{e.record}" for e in entries)
    return ("\n".join(lines) + "\n").encode("utf-8")


@functools.lru_cache(maxsize=1 << 14)
def decode_index_file(kind: Kind, blob: bytes) -> tuple[list, list, list]:
    """Return parallel (values, files, records) lists, sorted by value."""
    lines = blob.decode("utf-8").split("\n")
    if lines[0] != INDEX_HEADER:
        raise SchemaError("index file has an unexpected header")
    values, files, records = [], [], []
    parse = kind.parse
    for line in lines[1:]:
        if not line:
            continue
        v, f, r = line.split("\t")
        values.append(parse(v))
        files.append(f)
        records.append(int(r))
    return values, files, records


def _column_entries(files: Iterable[LakeFile], pos: int):
    runs = []
    for f in files:
        run = [IndexEntry(row[pos], f.key, i) for i, row in enumerate(f.rows) if row[pos] is not None]
        run.sort()
        runs.append(run)
    return heapq.merge(*runs)


def _chunks(entries: list, entries_per_file: int, sizes: Sequence[int] | None):
    if sizes is None:
        return [entries[i:i + entries_per_file] for i in range(0, len(entries), entries_per_file)]
    if sum(sizes) != len(entries) or any(s < 1 for s in sizes):
        raise ValueError(f"chunk sizes {list(sizes)} do not partition {len(entries)} entries")
    out, start = [], 0
    for s in sizes:
        out.append(entries[start:start + s])
        start += s
    return out


def _write_index_files(root: RootIndex, column: str, entries: list, store: ObjectStore,
                       entries_per_file: int, sizes=None, first_part: int = 0):
    kind = root.schema.kind(column)
    root.declare(column)
    for n, chunk in enumerate(_chunks(entries, entries_per_file, sizes), start=first_part):
        key = index_file_key(root.table, column, n)
        store.put(key, encode_index_file(kind, chunk))
        root.add(RootIndexEntry(column, key, chunk[0].value, chunk[-1].value,
                                len(chunk), len({e.value for e in chunk})))


def build_index(lake: Lake, columns: Sequence[str], store: ObjectStore, entries_per_file: int = 1000,
                chunk_sizes: dict[str, Sequence[int]] | None = None) -> RootIndex:
    """Index ``columns`` of ``lake`` and persist index files and the root index.

    ``chunk_sizes`` optionally fixes the entry count of each index file per
    column instead of uniform ``entries_per_file`` chunks.
    """
    if entries_per_file < 1:
        raise ValueError("entries_per_file must be >= 1")
    root = RootIndex(lake.name, lake.schema)
    for column in columns:
        pos = lake.schema.position(column)
        entries = list(_column_entries(lake.files, pos))
        sizes = (chunk_sizes or {}).get(column)
        _write_index_files(root, column, entries, store, entries_per_file, sizes)
    root.save(store)
    return root


def append_to_index(root: RootIndex, new_files: Sequence[LakeFile], store: ObjectStore,
                    entries_per_file: int = 1000, schema: TableSchema | None = None) -> RootIndex:
    """Index newly published files into fresh index files; old ones are untouched."""
    if schema is not None and schema != root.schema:
        raise SchemaError("new files do not share the indexed table's schema")
    for f in new_files:
        for row in f.rows:
            root.schema.validate_row(row)
    for column in root.columns:
        pos = root.schema.position(column)
        entries = list(_column_entries(new_files, pos))
        if not entries:
            continue
        first = 1 + max((int(e.file.rsplit("-", 1)[1]) for e in root.for_column(column)), default=-1)
        _write_index_files(root, column, entries, store, entries_per_file, first_part=first)
    root.save(store)
    return root


def _may_contain(e: RootIndexEntry, op: Op, v) -> bool:
    if op is Op.EQ:
        return e.min <= v <= e.max
    if op is Op.LT:
        return e.min < v
    if op is Op.LE:
        return e.min <= v
    if op is Op.GT:
        return e.max > v
    if op is Op.GE:
        return e.max >= v
    return True  # != cannot be pruned by min/max


def prune_index_files(term: Term, root: RootIndex) -> list[str]:
    """Index files that may hold entries satisfying ``term``."""
    if term.is_column_term:
        return [e.file for c in term.columns for e in root.for_column(c)]
    return [e.file for e in root.for_column(term.lhs) if _may_contain(e, term.op, term.rhs)]


def _slice_for(values: list, op: Op, v) -> Iterable[int]:
    n = len(values)
    if op is Op.NE:
        lo, hi = bisect.bisect_left(values, v), bisect.bisect_right(values, v)
        return list(range(0, lo)) + list(range(hi, n))
    if op is Op.EQ:
        return range(bisect.bisect_left(values, v), bisect.bisect_right(values, v))
    if op is Op.LT:
        return range(0, bisect.bisect_left(values, v))
    if op is Op.LE:
        return range(0, bisect.bisect_right(values, v))
    if op is Op.GT:
        return range(bisect.bisect_right(values, v), n)
    return range(bisect.bisect_left(values, v), n)


def _read_column(column: str, keys: Iterable[str], root: RootIndex, store: ObjectStore) -> dict:
    kind = root.schema.kind(column)
    out = {}
    for key in keys:
        values, files, records = decode_index_file(kind, store.get(key))
        out.update(zip(zip(files, records), values))
    return out


def term_matches(term: Term, root: RootIndex, store: ObjectStore) -> set[tuple[str, int]]:
    """(file, record) pairs satisfying ``term``; reads each pruned index file once."""
    term.validate(root.schema)
    if term.is_column_term:
        left_col, right_col = term.columns
        left_keys = [e.file for e in root.for_column(left_col)]
        right_keys = [e.file for e in root.for_column(right_col)]
        left = _read_column(left_col, left_keys, root, store)
        right = _read_column(right_col, right_keys, root, store)
        fn = term.op.fn
        return {rid for rid, lv in left.items() if rid in right and fn(lv, right[rid])}
    kind = root.schema.kind(term.lhs)
    out = set()
    for key in prune_index_files(term, root):
        values, files, records = decode_index_file(kind, store.get(key))
        out.update((files[i], records[i]) for i in _slice_for(values, term.op, term.rhs))
    return out


def coverage_by_index(clauses: Sequence[Clause], root: RootIndex, store: ObjectStore,
                      trace: list | None = None) -> frozenset[str]:
    """Tight coverage of the conjunction of ``clauses`` computed from indexes only.

    Terms are unioned within a clause and clauses intersected, starting from
    the universe of all lake files.  ``trace`` receives each term's record set.
    """
    for clause in clauses:
        for t in clause:
            for c in t.columns:
                if not root.is_indexed(c):
                    raise UnindexedColumnError(f"term {t} uses unindexed column {c!r}")
    result = None
    for clause in clauses:
        temp = set()
        for t in clause:
            matched = term_matches(t, root, store)
            if trace is not None:
                trace.append((t, matched))
            temp |= matched
        result = temp if result is None else result & temp
    if result is None:
        return frozenset(store.list(data_prefix(root.table)))
    return frozenset(f for f, _ in result)
