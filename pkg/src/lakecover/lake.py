"""Lake files, their TSV encoding, and a store-backed table handle."""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import SchemaError
from .model import Kind, TableSchema
from .store import ObjectStore


def data_prefix(table: str) -> str:
    return f"data/{table}/"


def part_key(table: str, n: int) -> str:
    return f"data/{table}/part-{n:06d}"


def schema_key(table: str) -> str:
    return f"meta/{table}/schema"


def stats_key(table: str) -> str:
    return f"meta/{table}/stats"


def encode_rows(schema: TableSchema, rows: Iterable[Sequence]) -> bytes:
    fmts = [c.kind.format for c in schema.columns]
    lines = ["\t".join(schema.names)]
    for row in rows:
        lines.append("\t".join(f(v) for f, v in zip(fmts, row)))
    return ("\n".join(lines) + "\n").encode("utf-8")


def decode_rows(schema: TableSchema, blob: bytes) -> tuple[tuple, ...]:
    lines = blob.decode("utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise SchemaError("data file has no header line")
    header = lines[0].split("\t")
    if header != schema.names:
        raise SchemaError(f"data file header {header} does not match schema {schema.names}")
    parsers = [c.kind.parse for c in schema.columns]
    if all(c.kind is Kind.INT for c in schema.columns):
        # hot path for generated integer lakes
        return tuple(tuple(int(x) if x else None for x in line.split("\t")) for line in lines[1:])
    return tuple(tuple(p(x) for p, x in zip(parsers, line.split("\t"))) for line in lines[1:])


@dataclass(frozen=True)
class LakeFile:
    key: str
    rows: tuple[tuple, ...]
    created_at: int = 0

    def __len__(self):
        return len(self.rows)


@dataclass
class Lake:
    """A table partitioned into files, held in memory."""

    name: str
    schema: TableSchema
    files: list[LakeFile] = field(default_factory=list)

    def __post_init__(self):
        keys = [f.key for f in self.files]
        if len(set(keys)) != len(keys):
            raise SchemaError("lake file keys must be unique")
        for f in self.files:
            for row in f.rows:
                self.schema.validate_row(row)

    @property
    def row_count(self) -> int:
        return sum(len(f.rows) for f in self.files)

    @property
    def keys(self) -> list[str]:
        return [f.key for f in self.files]

    def file(self, key: str) -> LakeFile:
        for f in self.files:
            if f.key == key:
                return f
        raise KeyError(key)


def _encode_schema(schema: TableSchema) -> bytes:
    return "".join(f"{c.name}\t{c.kind.value}\n" for c in schema.columns).encode("utf-8")


def _decode_schema(blob: bytes) -> TableSchema:
    pairs = [line.split("\t") for line in blob.decode("utf-8").splitlines() if line]
    return TableSchema.of(*[(n, Kind(k)) for n, k in pairs])


class StoredTable:
    """A lake table as it lives in the object store.

    ``file_keys`` is a listing (free); ``read`` is one counted ``get``.
    """

    def __init__(self, store: ObjectStore, name: str, schema: TableSchema, row_count: int | None = None):
        self.store = store
        self.name = name
        self.schema = schema
        self.row_count = row_count
        self.prefix = data_prefix(name)
        self._decode = functools.lru_cache(maxsize=1 << 18)(functools.partial(decode_rows, schema))

    @classmethod
    def open(cls, store: ObjectStore, name: str) -> "StoredTable":
        schema = _decode_schema(store.get(schema_key(name)))
        rows = None
        if store.exists(stats_key(name)):
            for line in store.get(stats_key(name)).decode("utf-8").splitlines():
                k, v = line.split("\t")
                if k == "rows":
                    rows = int(v)
        return cls(store, name, schema, rows)

    @classmethod
    def publish(cls, lake: Lake, store: ObjectStore) -> "StoredTable":
        """Write every file of ``lake`` plus schema/stats metadata."""
        table = cls(store, lake.name, lake.schema, 0)
        store.put(schema_key(lake.name), _encode_schema(lake.schema))
        stamped = []
        for f in lake.files:
            stamped.append(table._put_file(f.key, f.rows))
        lake.files[:] = stamped
        table._write_stats()
        return table

    def _put_file(self, key: str, rows) -> LakeFile:
        if not key.startswith(self.prefix):
            key = self.prefix + key
        rows = tuple(self.schema.validate_row(r) for r in rows)
        tick = self.store.put(key, encode_rows(self.schema, rows))
        self.row_count = (self.row_count or 0) + len(rows)
        return LakeFile(key, rows, tick)

    def _write_stats(self):
        self.store.put(stats_key(self.name), f"rows\t{self.row_count or 0}\n".encode("utf-8"))

    def append_file(self, rows: Iterable[Sequence], key: str | None = None) -> LakeFile:
        if key is None:
            existing = self.file_keys()
            n = 1 + max((int(k.rsplit("-", 1)[1]) for k in existing if k.rsplit("/", 1)[1].startswith("part-")), default=-1)
            key = part_key(self.name, n)
        f = self._put_file(key, list(rows))
        self._write_stats()
        return f

    def delete_file(self, key: str) -> bool:
        if not self.store.exists(key):
            return False
        n = len(self._decode(self.store.get(key)))
        self.store.delete(key)
        self.row_count = (self.row_count or 0) - n
        self._write_stats()
        return True

    def file_keys(self) -> list[str]:
        return self.store.list(self.prefix)

    @property
    def file_count(self) -> int:
        return len(self.file_keys())

    def read(self, key: str) -> tuple[tuple, ...]:
        return self._decode(self.store.get(key))

    def to_lake(self) -> Lake:
        """Read every file (counted) into an in-memory Lake."""
        files = [LakeFile(k, self.read(k), self.store.created_at(k)) for k in self.file_keys()]
        return Lake(self.name, self.schema, files)
