"""Relations, signatures, and schemas.

A relation header is an ordered sequence of columns, each carrying a
column name and an attribute.  Column names must be pairwise distinct in
every header; attributes must additionally be distinct in user-declared
signatures (evaluation may produce intermediate headers with repeated
attributes, e.g. inside update desugaring).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import SchemaError
from .values import Value


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    attribute: str


@dataclass(frozen=True)
class RelationSignature:
    """A named relation type: ordered columns plus key and NOT NULL sets."""

    name: str
    columns: tuple[ColumnSpec, ...]
    not_null: frozenset[int] = frozenset()
    primary_key: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.columns) < 1:
            raise SchemaError(f"relation {self.name!r} must have arity >= 1")
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate column names in {self.name!r}: {names}")
        attrs = [c.attribute for c in self.columns]
        if len(set(attrs)) != len(attrs):
            raise SchemaError(f"duplicate attributes in {self.name!r}: {attrs}")
        for i in list(self.not_null) + list(self.primary_key):
            if not 0 <= i < len(self.columns):
                raise SchemaError(f"column index {i} out of range for {self.name!r}")
        if len(set(self.primary_key)) != len(self.primary_key):
            raise SchemaError(f"repeated primary key column in {self.name!r}")

    @property
    def arity(self) -> int:
        return len(self.columns)

    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def attributes(self) -> tuple[str, ...]:
        return tuple(c.attribute for c in self.columns)


def signature(name: str, cols: Iterable[tuple[str, str] | str], *,
              not_null: Iterable[int] = (), primary_key: Iterable[int] = ()) -> RelationSignature:
    """Shorthand builder: a bare string names a column whose attribute is itself."""
    specs = tuple(ColumnSpec(c, c) if isinstance(c, str) else ColumnSpec(*c) for c in cols)
    return RelationSignature(name, specs, frozenset(not_null), tuple(primary_key))


@dataclass(frozen=True)
class Schema:
    """A named database: the name doubles as the vector-relation name."""

    name: str
    relations: tuple[RelationSignature, ...]

    def __post_init__(self):
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate relation names in database {self.name!r}")
        if self.name in names:
            raise SchemaError(f"database name {self.name!r} collides with a relation name")

    def get(self, name: str) -> RelationSignature:
        for sig in self.relations:
            if sig.name == name:
                return sig
        raise SchemaError(f"no relation {name!r} in database {self.name!r}")

    def has(self, name: str) -> bool:
        return any(sig.name == name for sig in self.relations)


@dataclass(frozen=True)
class Relation:
    """A set-semantics table: an ordered header and a set of rows."""

    header: tuple[ColumnSpec, ...]
    rows: frozenset[tuple[Value, ...]] = field(default_factory=frozenset)

    def __post_init__(self):
        names = [c.name for c in self.header]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate column names in header: {names}")
        if not isinstance(self.rows, frozenset):
            object.__setattr__(self, "rows", frozenset(self.rows))
        arity = len(self.header)
        for row in self.rows:
            if len(row) != arity:
                raise SchemaError(f"row arity {len(row)} does not match header arity {arity}")

    @property
    def arity(self) -> int:
        return len(self.header)

    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.header)

    def attributes(self) -> tuple[str, ...]:
        return tuple(c.attribute for c in self.header)

    def column_index(self, name: str) -> int:
        for i, c in enumerate(self.header):
            if c.name == name:
                return i
        raise KeyError(name)

    def sorted_rows(self) -> list[tuple[Value, ...]]:
        return sorted(self.rows, key=lambda r: tuple(v.sort_key() for v in r))

    def pretty(self) -> str:
        """Fixed-width text rendering, rows in deterministic order."""
        def cell(v: Value) -> str:
            return "" if v.is_null else v.render()

        head = [c.name for c in self.header]
        body = [[cell(v) for v in row] for row in self.sorted_rows()]
        if not head:
            return "<>" if self.rows else "(empty)"
        widths = [len(h) for h in head]
        for row in body:
            for i, s in enumerate(row):
                widths[i] = max(widths[i], len(s))
        lines = [" | ".join(h.ljust(widths[i]) for i, h in enumerate(head))]
        lines.append("-+-".join("-" * w for w in widths))
        for row in body:
            lines.append(" | ".join(s.ljust(widths[i]) for i, s in enumerate(row)))
        return "\n".join(lines)


# The zero-arity relation holding the single empty tuple: the truth constant
# of the algebra, also the result of a union of incompatible operands.
EMPTY_TUPLE_RELATION = Relation((), frozenset({()}))

Instance = Mapping[str, Relation]


def relation(cols: Iterable[tuple[str, str] | str], rows: Iterable[Iterable[Value]]) -> Relation:
    header = tuple(ColumnSpec(c, c) if isinstance(c, str) else ColumnSpec(*c) for c in cols)
    return Relation(header, frozenset(tuple(r) for r in rows))


def instance_for(sig: RelationSignature, rows: Iterable[Iterable[Value]]) -> Relation:
    return Relation(sig.columns, frozenset(tuple(r) for r in rows))
