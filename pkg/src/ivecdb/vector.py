"""The vector store: tuple hashing, shredding, and reconstruction.

A whole database lives in one four-column relation of quadruples
(r-name, t-index, a-name, value).  Shredding a source tuple emits one
quadruple per non-NULL cell, all sharing the tuple index obtained by
hashing the full tuple (NULL markers included, so tuples differing only
in NULL placement get distinct indexes even though NULL cells are never
stored).  Reconstruction fills absent cells with NULL: a cell value comes
from the store exactly when present, never both.

All-NULL tuples are unrepresentable in the store and rejected at
ingestion, which is what makes shred-then-reconstruct the identity.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import HashCollisionError, SchemaError, VectorError
from .relations import ColumnSpec, Instance, Relation, RelationSignature, Schema
from .values import NULL_VALUE, Value

logger = logging.getLogger(__name__)

R_NAME, T_INDEX, A_NAME, VALUE = "r-name", "t-index", "a-name", "value"
VECTOR_HEADER = tuple(ColumnSpec(n, n) for n in (R_NAME, T_INDEX, A_NAME, VALUE))

_NULL_TOKEN = b"\x00NULL\x00"
_SEPARATOR = b"\x1f"


def hash_tuple(values: Sequence[Value]) -> str:
    """SHA-256 digest (lowercase hex) of the canonical tuple serialization."""
    if not values:
        raise VectorError("cannot hash an empty tuple")
    parts = [_NULL_TOKEN if v.is_null else v.render().encode("utf-8") for v in values]
    return hashlib.sha256(_SEPARATOR.join(parts)).hexdigest()


@dataclass(frozen=True)
class VectorTuple:
    r_name: str
    t_index: str
    a_name: str
    value: Value

    def __post_init__(self):
        if self.value.is_null:
            raise VectorError("vector tuples never carry NULL values")

    def as_row(self) -> tuple[Value, Value, Value, Value]:
        return (Value.text(self.r_name), Value.text(self.t_index),
                Value.text(self.a_name), self.value)


def _check_primary_key(tuples: Iterable[VectorTuple]) -> None:
    seen: dict[tuple[str, str, str], Value] = {}
    for t in tuples:
        key = (t.r_name, t.t_index, t.a_name)
        if key in seen and seen[key] != t.value:
            raise VectorError(f"primary key violation in vector relation: {key}")
        seen[key] = t.value


@dataclass(frozen=True)
class VectorRelation:
    """An immutable snapshot of one database's vector store."""

    db_name: str
    tuples: frozenset[VectorTuple] = frozenset()

    def __post_init__(self):
        if not isinstance(self.tuples, frozenset):
            object.__setattr__(self, "tuples", frozenset(self.tuples))
        _check_primary_key(self.tuples)

    def __len__(self) -> int:
        return len(self.tuples)

    def as_relation(self) -> Relation:
        """The store as a plain four-column relation."""
        return Relation(VECTOR_HEADER, frozenset(t.as_row() for t in self.tuples))

    def cells(self, r_name: str) -> dict[str, dict[str, Value]]:
        """t-index -> {a-name -> value} for one relation name."""
        out: dict[str, dict[str, Value]] = {}
        for t in self.tuples:
            if t.r_name == r_name:
                out.setdefault(t.t_index, {})[t.a_name] = t.value
        return out


def parse_tuple(sig: RelationSignature, d: Sequence[Value]) -> frozenset[VectorTuple]:
    """Shred one tuple: a quadruple per non-NULL cell, all-NULL gives none."""
    if len(d) != sig.arity:
        raise VectorError(
            f"tuple arity {len(d)} does not match relation {sig.name!r} arity {sig.arity}")
    index = hash_tuple(d)
    return frozenset(
        VectorTuple(sig.name, index, sig.columns[i].name, v)
        for i, v in enumerate(d) if not v.is_null)


def parse_instance(schema: Schema, instance: Instance) -> VectorRelation:
    """Shred a whole instance; rejects index collisions between distinct tuples."""
    tuples: set[VectorTuple] = set()
    for sig in schema.relations:
        rel = instance.get(sig.name)
        if rel is None:
            continue
        seen: dict[str, tuple[Value, ...]] = {}
        for row in rel.rows:
            index = hash_tuple(row)
            if index in seen and seen[index] != row:
                raise HashCollisionError(
                    f"relation {sig.name!r}: tuples {seen[index]} and {row} "
                    f"share the index {index}")
            seen[index] = row
            tuples |= parse_tuple(sig, row)
    return VectorRelation(schema.name, frozenset(tuples))


def _as_rows(store: VectorRelation | Relation) -> frozenset[tuple[Value, ...]]:
    if isinstance(store, VectorRelation):
        return store.as_relation().rows
    if store.arity != 4:
        raise VectorError(f"expected a four-column vector relation, got arity {store.arity}")
    return store.rows


def _index_cells(rows: Iterable[tuple[Value, ...]],
                 relation_names: set[str]) -> tuple[dict[tuple[str, str, str], set[Value]], dict[str, set[str]]]:
    """Cell lookup and t-index occurrence sets, restricted to some relations.

    A proper store holds one value per (r-name, t-index, a-name), but a
    general four-column relation may hold several; reconstruction then
    emits every combination, so each key maps to a value set here.
    """
    cells: dict[tuple[str, str, str], set[Value]] = {}
    ids: dict[str, set[str]] = {r: set() for r in relation_names}
    for row in rows:
        r, t, a, v = row
        if r.is_null or t.is_null or a.is_null:
            raise VectorError(f"NULL in a key field of a vector row: {row}")
        rn, tn, an = r.payload, t.payload, a.payload
        if rn in relation_names:
            cells.setdefault((rn, tn, an), set()).add(v)
            ids[rn].add(tn)
    return cells, ids


def _cell_rows(keys: list[tuple[str, str, str]],
               cells: dict[tuple[str, str, str], set[Value]]) -> set[tuple[Value, ...]]:
    """All tuples choosing one stored value per key, NULL where absent."""
    from itertools import product
    options = [sorted(cells.get(k, {NULL_VALUE}), key=Value.sort_key) for k in keys]
    return set(product(*options))


def matter(sig: RelationSignature, store: VectorRelation | Relation) -> Relation:
    """Reconstruct one relation: a row per t-index seen under its name,
    absent cells filled with NULL."""
    cells, ids = _index_cells(_as_rows(store), {sig.name})
    known = set(sig.column_names())
    unknown = {a for (r, t, a) in cells if a not in known}
    if unknown:
        logger.warning("ignoring unknown column name(s) %s under relation %r",
                       sorted(unknown), sig.name)
    rows = set()
    for t_index in ids[sig.name]:
        keys = [(sig.name, t_index, c.name) for c in sig.columns]
        rows |= _cell_rows(keys, cells)
    return Relation(sig.columns, frozenset(rows))


ViewType = tuple[tuple[str, str], ...]


def view(view_type: ViewType, store: VectorRelation | Relation,
         schema: Schema | None = None) -> Relation:
    """Reconstruct a typed view: one row per t-index occurring under any
    relation the type mentions, each cell looked up by its (relation,
    column name) pair, NULL when absent.

    Reconstructing all columns of one relation is exactly `matter`.
    """
    if not view_type:
        raise VectorError("view type must be nonempty")
    rel_names = {r for r, _ in view_type}
    cells, ids = _index_cells(_as_rows(store), rel_names)

    header = []
    taken: set[str] = set()
    for r, name in view_type:
        attr = name
        if schema is not None:
            sig = schema.get(r)
            matching = [c for c in sig.columns if c.name == name]
            if not matching:
                raise SchemaError(f"no column {name!r} in relation {r!r}")
            attr = matching[0].attribute
        out = name
        k = 1
        while out in taken:
            out = f"{name}({k})"
            k += 1
        taken.add(out)
        header.append(ColumnSpec(out, attr))

    all_ids = sorted(set().union(*ids.values())) if ids else []
    rows = set()
    for t_index in all_ids:
        keys = [(r, t_index, name) for r, name in view_type]
        rows |= _cell_rows(keys, cells)
    return Relation(tuple(header), frozenset(rows))


def full_view_type(sig: RelationSignature) -> ViewType:
    return tuple((sig.name, c.name) for c in sig.columns)


def check_canonical(schema: Schema, store: VectorRelation, instance: Instance) -> bool:
    """Canonical-model check: the instance reconstructs from the store and
    the store is exactly the shredding of the instance."""
    try:
        parsed = parse_instance(schema, instance)
    except HashCollisionError:
        return False
    if parsed.tuples != store.tuples:
        return False
    for sig in schema.relations:
        given = instance.get(sig.name)
        rebuilt = matter(sig, store)
        if given is None:
            if rebuilt.rows:
                return False
            continue
        if given.rows != rebuilt.rows or len(given.header) != len(rebuilt.header):
            return False
    return True


# ---------------------------------------------------------------------------
# DML against the store
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InsertTuple:
    relation: str
    values: tuple[Value, ...]


@dataclass(frozen=True)
class DeleteTuple:
    relation: str
    values: tuple[Value, ...]


@dataclass(frozen=True)
class DropColumn:
    relation: str
    column: str


@dataclass(frozen=True)
class AddColumn:
    relation: str
    column: ColumnSpec


VectorDml = InsertTuple | DeleteTuple | DropColumn | AddColumn


def vector_dml(store: VectorRelation, op: VectorDml, schema: Schema) -> VectorRelation:
    """Apply one DML operation, returning a new snapshot.

    Adding a column never touches the store (use `evolve_schema` for the
    catalog side); dropping one removes every quadruple of that column.
    """
    sig = schema.get(op.relation)

    if isinstance(op, InsertTuple):
        new = parse_tuple(sig, op.values)
        index = hash_tuple(op.values)
        existing = {t for t in store.tuples
                    if t.r_name == sig.name and t.t_index == index}
        if existing and existing != set(new):
            raise HashCollisionError(
                f"insert into {sig.name!r} collides with a stored tuple on index {index}")
        return VectorRelation(store.db_name, store.tuples | new)

    if isinstance(op, DeleteTuple):
        if len(op.values) != sig.arity:
            raise VectorError(
                f"tuple arity {len(op.values)} does not match {sig.name!r} arity {sig.arity}")
        index = hash_tuple(op.values)
        keep = frozenset(t for t in store.tuples
                         if not (t.r_name == sig.name and t.t_index == index))
        return VectorRelation(store.db_name, keep)

    if isinstance(op, DropColumn):
        if op.column not in sig.column_names():
            raise SchemaError(f"no column {op.column!r} in relation {sig.name!r}")
        keep = frozenset(t for t in store.tuples
                         if not (t.r_name == sig.name and t.a_name == op.column))
        return VectorRelation(store.db_name, keep)

    if isinstance(op, AddColumn):
        return store

    raise VectorError(f"unknown DML operation: {op!r}")


def evolve_schema(schema: Schema, op: VectorDml) -> Schema:
    """The catalog side of DML: only column changes alter the schema."""
    sig = schema.get(op.relation)
    if isinstance(op, AddColumn):
        new_sig = RelationSignature(sig.name, sig.columns + (op.column,),
                                    sig.not_null, sig.primary_key)
    elif isinstance(op, DropColumn):
        idx = sig.column_names().index(op.column)
        remaining = tuple(c for c in sig.columns if c.name != op.column)
        if not remaining:
            raise SchemaError(f"cannot drop the last column of {sig.name!r}")
        not_null = frozenset(i if i < idx else i - 1 for i in sig.not_null if i != idx)
        pk = tuple(i if i < idx else i - 1 for i in sig.primary_key if i != idx)
        new_sig = RelationSignature(sig.name, remaining, not_null, pk)
    else:
        return schema
    return Schema(schema.name, tuple(new_sig if s.name == sig.name else s
                                     for s in schema.relations))
