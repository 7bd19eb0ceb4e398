"""Relational model of a lake table: value kinds, schemas and CNF predicates."""

from __future__ import annotations

import datetime as _dt
import enum
import math
import operator
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import SchemaError, TypeMismatchError


class Kind(enum.Enum):
    INT = "int"
    FLOAT = "float"
    TEXT = "text"
    DATE = "date"

    def parse(self, text: str):
        if text == "":
            return None
        if self is Kind.INT:
            return int(text)
        if self is Kind.FLOAT:
            value = float(text)
            if math.isnan(value):
                raise TypeMismatchError("NaN is not a valid float value")
            return value
        if self is Kind.DATE:
            return _dt.date.fromisoformat(text)
        return text

    def format(self, value) -> str:
        if value is None:
            return ""
        if self is Kind.FLOAT:
            return repr(float(value))
        if self is Kind.DATE:
            return value.isoformat()
        return str(value)

    def check(self, value):
        """Raise TypeMismatchError unless ``value`` is a valid value of this kind."""
        if value is None:
            return
        actual = kind_of(value)
        if actual is not self:
            raise TypeMismatchError(f"expected {self.value} value, got {actual.value} {value!r}")


def kind_of(value) -> Kind:
    if isinstance(value, bool):
        raise TypeMismatchError(f"booleans are not lake values: {value!r}")
    if isinstance(value, int):
        return Kind.INT
    if isinstance(value, float):
        if math.isnan(value):
            raise TypeMismatchError("NaN is not a valid float value")
        return Kind.FLOAT
    if isinstance(value, str):
        if value == "" or "\t" in value or "\n" in value or "\r" in value:
            raise TypeMismatchError(f"text values must be non-empty and free of tabs/newlines: {value!r}")
        return Kind.TEXT
    if isinstance(value, _dt.date) and not isinstance(value, _dt.datetime):
        return Kind.DATE
    raise TypeMismatchError(f"unsupported value type {type(value).__name__}")


@dataclass(frozen=True)
class Column:
    name: str
    kind: Kind


@dataclass(frozen=True)
class TableSchema:
    columns: tuple[Column, ...]
    _positions: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if any(not n or "\t" in n or "\n" in n for n in names):
            raise SchemaError("column names must be non-empty and tab/newline free")
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate column names in {names}")
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "_positions", {n: i for i, n in enumerate(names)})

    @classmethod
    def of(cls, *pairs: tuple[str, Kind | str]) -> "TableSchema":
        return cls(tuple(Column(n, k if isinstance(k, Kind) else Kind(k)) for n, k in pairs))

    @property
    def m(self) -> int:
        return len(self.columns)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def __contains__(self, name) -> bool:
        return name in self._positions

    def position(self, name: str) -> int:
        try:
            return self._positions[name]
        except KeyError:
            raise SchemaError(f"unknown column {name!r}") from None

    def kind(self, name: str) -> Kind:
        return self.columns[self.position(name)].kind

    def validate_row(self, row: Sequence) -> tuple:
        if len(row) != self.m:
            raise SchemaError(f"row has {len(row)} values, schema has {self.m} columns")
        for col, value in zip(self.columns, row):
            col.kind.check(value)
        return tuple(row)


class Op(enum.Enum):
    EQ = "="
    NE = "!="
    GE = ">="
    LE = "<="
    GT = ">"
    LT = "<"

    @classmethod
    def parse(cls, symbol: str) -> "Op":
        return cls(_OP_ALIASES.get(symbol, symbol))

    @property
    def fn(self) -> Callable:
        return _OP_FUNCS[self]

    def flipped(self) -> "Op":
        """Operator with swapped operands (``a < b`` is ``b > a``)."""
        return _OP_FLIP[self]


_OP_ALIASES = {"≠": "!=", "<>": "!=", "==": "=", "≥": ">=", "≤": "<="}
_OP_FUNCS = {
    Op.EQ: operator.eq, Op.NE: operator.ne, Op.GE: operator.ge,
    Op.LE: operator.le, Op.GT: operator.gt, Op.LT: operator.lt,
}
_OP_FLIP = {Op.EQ: Op.EQ, Op.NE: Op.NE, Op.GE: Op.LE, Op.LE: Op.GE, Op.GT: Op.LT, Op.LT: Op.GT}


@dataclass(frozen=True)
class Col:
    """Column reference on the right-hand side of a term."""

    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Term:
    lhs: str
    op: Op
    rhs: object

    @property
    def is_column_term(self) -> bool:
        return isinstance(self.rhs, Col)

    @property
    def columns(self) -> tuple[str, ...]:
        return (self.lhs, self.rhs.name) if self.is_column_term else (self.lhs,)

    def validate(self, schema: TableSchema):
        kind = schema.kind(self.lhs)
        if self.is_column_term:
            other = schema.kind(self.rhs.name)
            if other is not kind:
                raise TypeMismatchError(f"{self}: comparing {kind.value} with {other.value}")
        else:
            if self.rhs is None:
                raise TypeMismatchError(f"{self.lhs} {self.op.value} <empty> is not supported")
            kind.check(self.rhs)

    def evaluate(self, row: Sequence, schema: TableSchema) -> bool:
        left = row[schema.position(self.lhs)]
        if self.is_column_term:
            right = row[schema.position(self.rhs.name)]
        else:
            right = self.rhs
        if left is None or right is None:
            return False
        if kind_of(left) is not kind_of(right):
            raise TypeMismatchError(f"{self}: cannot compare {left!r} with {right!r}")
        return self.op.fn(left, right)

    def __str__(self):
        if self.is_column_term:
            rhs = self.rhs.name
        elif isinstance(self.rhs, str):
            rhs = "'" + self.rhs + "'"
        elif isinstance(self.rhs, _dt.date):
            rhs = self.rhs.isoformat()
        else:
            rhs = repr(self.rhs)
        return f"{self.lhs} {self.op.value} {rhs}"


Clause = tuple  # non-empty tuple of Terms, read as a disjunction


@dataclass(frozen=True)
class CnfPredicate:
    """Conjunction of clauses; the empty conjunction is always true."""

    clauses: tuple[Clause, ...] = ()

    def __post_init__(self):
        clauses = tuple(tuple(c) for c in self.clauses)
        for c in clauses:
            if not c:
                raise SchemaError("a clause must contain at least one term")
        object.__setattr__(self, "clauses", clauses)

    @classmethod
    def conjunction(cls, terms: Iterable[Term]) -> "CnfPredicate":
        return cls(tuple((t,) for t in terms))

    def __and__(self, other: "CnfPredicate") -> "CnfPredicate":
        return CnfPredicate(self.clauses + other.clauses)

    @property
    def terms(self) -> list[Term]:
        return [t for c in self.clauses for t in c]

    @property
    def is_conjunctive(self) -> bool:
        return all(len(c) == 1 for c in self.clauses)

    def validate(self, schema: TableSchema):
        for t in self.terms:
            t.validate(schema)

    def __str__(self):
        if not self.clauses:
            return "TRUE"
        parts = []
        for c in self.clauses:
            body = " OR ".join(str(t) for t in c)
            parts.append(f"({body})" if len(c) > 1 else body)
        return " AND ".join(parts)


@dataclass(frozen=True)
class Query:
    where: CnfPredicate = CnfPredicate()
    columns: tuple[str, ...] | None = None

    def validate(self, schema: TableSchema):
        self.where.validate(schema)
        for c in self.columns or ():
            schema.position(c)

    def project(self, rows: Iterable[tuple], schema: TableSchema) -> list[tuple]:
        if self.columns is None:
            return list(rows)
        idx = [schema.position(c) for c in self.columns]
        return [tuple(r[i] for i in idx) for r in rows]

    def __str__(self):
        return str(self.where)


def satisfies(pred: CnfPredicate, row: Sequence, schema: TableSchema) -> bool:
    """True iff every clause of ``pred`` has at least one term satisfied by ``row``."""
    return all(any(t.evaluate(row, schema) for t in clause) for clause in pred.clauses)


def compile_predicate(pred: CnfPredicate, schema: TableSchema) -> Callable[[tuple], bool]:
    """Build a fast row filter; rows are assumed validated against ``schema``."""
    pred.validate(schema)

    def term_fn(t: Term):
        i = schema.position(t.lhs)
        fn = t.op.fn
        if t.is_column_term:
            j = schema.position(t.rhs.name)

            def f(r):
                a, b = r[i], r[j]
                return a is not None and b is not None and fn(a, b)
        else:
            v = t.rhs

            def f(r):
                a = r[i]
                return a is not None and fn(a, v)
        return f

    clause_fns = []
    for clause in pred.clauses:
        fns = [term_fn(t) for t in clause]
        if len(fns) == 1:
            clause_fns.append(fns[0])
        else:
            clause_fns.append(lambda r, fns=fns: any(f(r) for f in fns))
    if not clause_fns:
        return lambda r: True
    if len(clause_fns) == 1:
        return clause_fns[0]
    return lambda r: all(f(r) for f in clause_fns)


_TERM_RE = re.compile(r"^\s*([A-Za-z_][\w.-]*)\s*(>=|<=|!=|<>|≠|≥|≤|==|=|>|<)\s*(.+?)\s*$")


def _split_top(text: str, sep: str) -> list[str]:
    """Split on ``sep`` (case-insensitive) outside quotes and parentheses."""
    parts, depth, quote, start, i = [], 0, False, 0, 0
    upper = text.upper()
    while i < len(text):
        ch = text[i]
        if ch == "'":
            quote = not quote
        elif not quote and ch == "(":
            depth += 1
        elif not quote and ch == ")":
            depth -= 1
        elif not quote and depth == 0 and upper.startswith(sep, i):
            parts.append(text[start:i])
            i += len(sep)
            start = i
            continue
        i += 1
    parts.append(text[start:])
    return parts


def parse_term(text: str, schema: TableSchema) -> Term:
    m = _TERM_RE.match(text)
    if not m:
        raise SchemaError(f"cannot parse term {text!r}")
    lhs, op, raw = m.group(1), Op.parse(m.group(2)), m.group(3)
    kind = schema.kind(lhs)
    if len(raw) >= 2 and raw[0] == raw[-1] == "'":
        rhs = kind.parse(raw[1:-1])
    elif raw in schema:
        rhs = Col(raw)
    else:
        rhs = kind.parse(raw)
    term = Term(lhs, op, rhs)
    term.validate(schema)
    return term


def parse_predicate(text: str, schema: TableSchema) -> CnfPredicate:
    """Parse ``a = 1 AND (b < 2 OR c >= 'x')`` style CNF text.

    ``TRUE`` or an empty string yields the empty conjunction.
    """
    text = text.strip()
    if not text or text.upper() == "TRUE":
        return CnfPredicate()
    clauses = []
    for part in _split_top(text, " AND "):
        part = part.strip()
        if part.startswith("(") and part.endswith(")"):
            part = part[1:-1]
        clauses.append(tuple(parse_term(t, schema) for t in _split_top(part, " OR ")))
    return CnfPredicate(tuple(clauses))
