"""Federated metadata querying over a set of vector databases.

Every member database is one vector store; stacking the stores with their
database name prefixed gives the five-column catalog relation call_4,
whose deduplicating projections yield call_3 (attributes), call_2
(relations), and call_1 (databases).  The four meta operators are plain
algebra over these:

* delta()  lists the databases: call_1;
* rho(S)   lists the relations of the databases in S: a semijoin of call_2;
* alpha(S) lists the attributes of the relation pairs in S: same on call_3;
* gamma(pattern, S) matches a sequence of (attribute, value) patterns
  against the cells of single tuples: a k-fold product of call_4 glued on
  (db-name, r-name, t-index), one pattern condition per copy, projected
  onto the (a-name, value) pairs and semijoined with S.

`gamma_oracle` is an independent brute-force evaluation of the pattern
semantics used as ground truth for the algebraic construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iter_product
from typing import Iterable, Literal, NamedTuple

from . import algebra as ra
from . import conditions as cond
from .conditions import Col, Const
from .errors import FederationError
from .relations import ColumnSpec, Relation, Schema
from .values import Value
from .vector import A_NAME, R_NAME, T_INDEX, VALUE, VECTOR_HEADER, VectorRelation, matter

DB_NAME = "db-name"
CALL4_HEADER = (ColumnSpec(DB_NAME, DB_NAME),) + VECTOR_HEADER

Source = Literal["data", "catalog"]


@dataclass(frozen=True)
class Member:
    schema: Schema
    store: VectorRelation

    def __post_init__(self):
        if self.schema.name != self.store.db_name:
            raise FederationError(
                f"store {self.store.db_name!r} does not belong to database {self.schema.name!r}")

    @property
    def name(self) -> str:
        return self.schema.name


class SortRelations(NamedTuple):
    rel: Relation
    tid: Relation
    attr: Relation
    val: Relation


@dataclass(frozen=True)
class PatternItem:
    """One pattern position: an optional attribute and an optional value."""
    attr: str | None = None
    value: Value | None = None

    def __post_init__(self):
        if self.value is not None and self.value.is_null:
            raise FederationError("pattern value components cannot be NULL")


@dataclass(frozen=True)
class Pattern:
    items: tuple[PatternItem, ...] = ()

    def __len__(self) -> int:
        return len(self.items)


def parse_pattern(text: str) -> Pattern:
    """Parse the textual pattern form, e.g. ``_->Secretary,_->_``.

    Item sides are separated by ``->``; ``_`` (or nothing) leaves a side
    blank.  Value components in canonical decimal form become numbers,
    quoted values are always text.
    """
    text = text.strip()
    if not text:
        return Pattern(())
    items = []
    for raw in text.split(","):
        if "->" not in raw:
            raise FederationError(f"bad pattern item {raw.strip()!r}: expected attr->value")
        attr_part, value_part = raw.split("->", 1)
        attr_part, value_part = attr_part.strip(), value_part.strip()
        attr = None if attr_part in ("", "_") else attr_part
        if value_part in ("", "_"):
            value = None
        elif len(value_part) >= 2 and value_part[0] == value_part[-1] == "'":
            value = Value.text(value_part[1:-1])
        else:
            from .values import infer_value
            value = infer_value(value_part)
        items.append(PatternItem(attr, value))
    return Pattern(tuple(items))


class Federation:
    """An immutable set of member databases with cached catalog relations."""

    def __init__(self, members: Iterable[Member]):
        self.members = tuple(members)
        names = [m.name for m in self.members]
        if len(set(names)) != len(names):
            raise FederationError(f"duplicate member database names: {names}")
        if DB_NAME in {c.name for c in VECTOR_HEADER}:
            raise FederationError(f"member stores already use the reserved {DB_NAME!r} attribute")
        self._cache: dict = {}

    def member(self, name: str) -> Member:
        for m in self.members:
            if m.name == name:
                return m
        raise FederationError(f"no member database {name!r} in the federation")

    def instance(self) -> dict[str, Relation]:
        """Evaluation instance binding each member name to its store."""
        if "instance" not in self._cache:
            self._cache["instance"] = {m.name: m.store.as_relation() for m in self.members}
        return self._cache["instance"]

    def call4_term(self) -> ra.AlgebraTerm:
        """The algebra term stacking all member stores under their names."""
        if not self.members:
            raise FederationError("call_4 term of an empty federation")
        parts = []
        for m in self.members:
            extended = ra.Extend(ra.Base(m.name), DB_NAME, DB_NAME,
                                 Const(Value.text(m.name)))
            parts.append(ra.Project(extended, tuple(c.name for c in CALL4_HEADER)))
        term = parts[0]
        for p in parts[1:]:
            term = ra.Union(term, p)
        return term

    def call4(self) -> Relation:
        if "call4" not in self._cache:
            if not self.members:
                self._cache["call4"] = Relation(CALL4_HEADER, frozenset())
            else:
                self._cache["call4"] = ra.eval_term(self.call4_term(), self.instance())
        return self._cache["call4"]

    def call_level(self, level: int, source: Source = "data") -> Relation:
        """call_1 / call_2 / call_3: the deduplicating projections of call_4,
        or the same relations read from the member catalogs."""
        if level not in (1, 2, 3):
            raise FederationError(f"call level must be 1, 2, or 3, not {level}")
        key = ("call", level, source)
        if key in self._cache:
            return self._cache[key]
        # call_3 keeps (db-name, r-name, a-name): positions 0, 1, 3 of call_4
        idx = {1: [0], 2: [0, 1], 3: [0, 1, 3]}[level]
        header = tuple(CALL4_HEADER[i] for i in idx)
        if source == "data":
            base = self.call4()
            rows = frozenset(tuple(row[i] for i in idx) for row in base.rows)
        elif source == "catalog":
            rows = set()
            for m in self.members:
                if level == 1:
                    rows.add((Value.text(m.name),))
                    continue
                for sig in m.schema.relations:
                    if level == 2:
                        rows.add((Value.text(m.name), Value.text(sig.name)))
                    else:
                        for c in sig.columns:
                            rows.add((Value.text(m.name), Value.text(sig.name),
                                      Value.text(c.name)))
            rows = frozenset(rows)
        else:
            raise FederationError(f"unknown call source {source!r}")
        rel = Relation(header, rows)
        self._cache[key] = rel
        return rel

    def sorts(self) -> SortRelations:
        """The four derived sort relations: single-column projections of call_4."""
        base = self.call4()
        def proj(i: int, name: str) -> Relation:
            return Relation((CALL4_HEADER[i],),
                            frozenset((row[i],) for row in base.rows))
        return SortRelations(rel=proj(1, R_NAME), tid=proj(2, T_INDEX),
                             attr=proj(3, A_NAME), val=proj(4, VALUE))


# ---------------------------------------------------------------------------
# ERA operators
# ---------------------------------------------------------------------------

def era_delta(fed: Federation, source: Source = "data") -> Relation:
    """List the federation's databases (call_1)."""
    return fed.call_level(1, source)


def era_rho(fed: Federation, s: Relation, source: Source = "data") -> Relation:
    """Relations of the databases in S: call_2 semijoined on db-name."""
    if s.arity != 1:
        raise FederationError(f"rho takes a unary relation, got arity {s.arity}")
    call2 = fed.call_level(2, source)
    return Relation(call2.header,
                    frozenset(r for r in call2.rows if (r[0],) in s.rows))


def era_alpha(fed: Federation, s: Relation, source: Source = "data") -> Relation:
    """Attributes of the (db, relation) pairs in S: semijoin of call_3."""
    if s.arity != 2:
        raise FederationError(f"alpha takes a binary relation, got arity {s.arity}")
    call3 = fed.call_level(3, source)
    return Relation(call3.header,
                    frozenset(r for r in call3.rows if (r[0], r[1]) in s.rows))


def _item_condition(item: PatternItem, attr_col: str, value_col: str) -> cond.Condition:
    parts = []
    if item.attr is not None:
        parts.append(cond.Compare(Col(attr_col), "=", Const(Value.text(item.attr))))
    if item.value is not None:
        parts.append(cond.Compare(Col(value_col), "=", Const(item.value)))
    return cond.conjoin(parts)


def _product_names(k: int) -> list[str]:
    header = CALL4_HEADER
    for _ in range(k - 1):
        header = ra.product_header(header, CALL4_HEADER)
    return [c.name for c in header]


def gamma_projection_positions(k: int) -> list[int]:
    """1-based projected positions: db, rel, then each copy's (a-name, value)."""
    return [1, 2] + [p for m in range(1, k + 1) for p in (5 * m - 1, 5 * m)]


def gamma_term(fed: Federation, pattern: Pattern, s: Relation) -> ra.AlgebraTerm:
    """The standard-algebra term equivalent to gamma over this federation."""
    k = len(pattern)
    if k == 0:
        base = ra.Project(fed.call4_term(), (DB_NAME, R_NAME))
        return ra.Select(base, cond.InRelation((DB_NAME, R_NAME), s))
    if k == 1:
        filtered = ra.Select(fed.call4_term(),
                             _item_condition(pattern.items[0], A_NAME, VALUE))
        projected = ra.Project(filtered, (DB_NAME, R_NAME, A_NAME, VALUE))
        return ra.Select(projected, cond.InRelation((DB_NAME, R_NAME), s))

    prod = fed.call4_term()
    for _ in range(k - 1):
        prod = ra.Times(prod, fed.call4_term())
    names = _product_names(k)

    def at(pos: int) -> str:
        return names[pos - 1]

    glue = []
    for col in (1, 2, 3):  # db-name, r-name, t-index equal across copies
        for m in range(2, k + 1):
            glue.append(cond.Compare(Col(at(col)), "=", Col(at(col + 5 * (m - 1)))))
    per_item = [_item_condition(item, at(5 * m - 1), at(5 * m))
                for m, item in enumerate(pattern.items, start=1)]
    selected = ra.Select(prod, cond.conjoin(glue + per_item))
    projected = ra.Project(selected, tuple(at(p) for p in gamma_projection_positions(k)))
    return ra.Select(projected, cond.InRelation((DB_NAME, R_NAME), s))


def era_gamma(fed: Federation, pattern: Pattern, s: Relation) -> Relation:
    """Evaluate the gamma pattern operator via its standard-algebra term."""
    if s.arity != 2:
        raise FederationError(f"gamma takes a binary relation, got arity {s.arity}")
    if not fed.members:
        return Relation(gamma_header(len(pattern)), frozenset())
    return ra.eval_term(gamma_term(fed, pattern, s), fed.instance())


def gamma_header(k: int) -> tuple[ColumnSpec, ...]:
    if k == 0:
        return CALL4_HEADER[:2]
    header = CALL4_HEADER
    for _ in range(k - 1):
        header = ra.product_header(header, CALL4_HEADER)
    return tuple(header[p - 1] for p in gamma_projection_positions(k))


def gamma_oracle(fed: Federation, pattern: Pattern, s: Relation) -> Relation:
    """Brute-force gamma: enumerate tuples and cell sequences directly.

    For every (db, rel) of S present in the federation and every stored
    tuple of that relation, emits one output row per way of choosing a
    cell for each pattern position such that the position's attribute and
    value components (when given) match the chosen cell.
    """
    if s.arity != 2:
        raise FederationError(f"gamma takes a binary relation, got arity {s.arity}")
    k = len(pattern)
    rows = set()
    by_name = {m.name: m for m in fed.members}
    for srow in s.rows:
        d, r = srow
        if d.kind != "text" or r.kind != "text":
            continue
        member = by_name.get(d.payload)
        if member is None:
            continue
        tuples = member.store.cells(r.payload)
        for _tid, cells in tuples.items():
            if k == 0:
                rows.add((d, r))
                continue
            options = []
            for item in pattern.items:
                matches = [(a, v) for a, v in cells.items()
                           if (item.attr is None or a == item.attr)
                           and (item.value is None or v == item.value)]
                options.append(matches)
            if all(options):
                for combo in iter_product(*options):
                    flat = tuple(x for a, v in combo for x in (Value.text(a), v))
                    rows.add((d, r) + flat)
    return Relation(gamma_header(k), frozenset(rows))


# ---------------------------------------------------------------------------
# Meta queries over the federation
# ---------------------------------------------------------------------------

def find_token(fed: Federation, v: Value) -> Relation:
    """All (db, relation) pairs whose stored cells contain the value."""
    if v.is_null:
        raise FederationError("cannot search for NULL")
    if not fed.members:
        return Relation(CALL4_HEADER[:2], frozenset())
    term = ra.Project(ra.Select(fed.call4_term(),
                                cond.Compare(Col(VALUE), "=", Const(v))),
                      (DB_NAME, R_NAME))
    return ra.eval_term(term, fed.instance())


def natural_join_unknown(fed: Federation, db: str, r: str, s: str) -> Relation:
    """Natural join of two relations whose schemas are discovered on the fly.

    Shared attribute names come from the catalog side of call_3; both
    relations are materialized from the store and joined on all of them
    (a product when they share none).
    """
    member = fed.member(db)
    for name in (r, s):
        if not member.schema.has(name):
            raise FederationError(f"no relation {name!r} in database {db!r}")
    sig_r, sig_s = member.schema.get(r), member.schema.get(s)
    shared = [c.name for c in sig_r.columns if c.name in set(sig_s.column_names())]
    pairs = tuple((a, a) for a in shared)
    left = matter(sig_r, member.store)
    right = matter(sig_s, member.store)
    if r == s:
        return ra.eval_term(ra.NaturalJoin(ra.Base(r), ra.Base(r), pairs), {r: left})
    return ra.eval_term(ra.NaturalJoin(ra.Base(r), ra.Base(s), pairs),
                        {r: left, s: right})
