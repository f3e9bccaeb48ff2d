"""The relational algebra term language and its set-semantics evaluator.

Operators follow the keyword forms RENAME / TIMES / projection / WHERE /
UNION / MINUS / EXTEND plus the nullary truth constant and a natural-join
shorthand.  The quirks are deliberate and load-bearing:

* a projection naming an absent column returns its input unchanged;
* UNION and MINUS of non-union-compatible operands evaluate to the
  zero-arity single-empty-tuple relation (never an error);
* TIMES renames clashing right-operand column names with numeric
  suffixes "(1)", "(2)", ... before forming the product;
* natural join is product, equality selection over the pair set, then a
  projection dropping the right-hand join columns (an empty pair set
  degenerates to the plain product).

Update statements (DELETE / INSERT / UPDATE) are not operators of their
own: `desugar_update` lowers them to terms of the algebra.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import conditions as cond
from .conditions import Col, Condition, Const, Name, Operand
from .errors import ColumnError, EvaluationError, UnboundRelationError, UpdateError
from .relations import (EMPTY_TUPLE_RELATION, ColumnSpec, Instance, Relation,
                        RelationSignature, Schema)
from .values import Value


# ---------------------------------------------------------------------------
# Term AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Base:
    name: str


@dataclass(frozen=True)
class EmptyTuple:
    """The nullary constant: arity 0, rows {<>}."""


@dataclass(frozen=True)
class Rename:
    child: "AlgebraTerm"
    old: str
    new: str


@dataclass(frozen=True)
class Times:
    left: "AlgebraTerm"
    right: "AlgebraTerm"


@dataclass(frozen=True)
class Project:
    child: "AlgebraTerm"
    names: tuple[str, ...]


@dataclass(frozen=True)
class Select:
    child: "AlgebraTerm"
    condition: Condition


@dataclass(frozen=True)
class Union:
    left: "AlgebraTerm"
    right: "AlgebraTerm"


@dataclass(frozen=True)
class Minus:
    left: "AlgebraTerm"
    right: "AlgebraTerm"


@dataclass(frozen=True)
class NaturalJoin:
    left: "AlgebraTerm"
    right: "AlgebraTerm"
    pairs: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class Extend:
    child: "AlgebraTerm"
    attribute: str
    name: str
    expr: Operand


@dataclass(frozen=True)
class SingleTuple:
    """A one-tuple relation, the EXTEND chain over the truth constant."""
    specs: tuple[ColumnSpec, ...]
    values: tuple[Value, ...]


AlgebraTerm = (Base | EmptyTuple | Rename | Times | Project | Select
               | Union | Minus | NaturalJoin | Extend | SingleTuple)


# ---------------------------------------------------------------------------
# Header helpers
# ---------------------------------------------------------------------------

def suffixed(name: str, k: int) -> str:
    return f"{name}({k})"


def normalize_right_header(left: tuple[ColumnSpec, ...],
                           right: tuple[ColumnSpec, ...]) -> tuple[tuple[ColumnSpec, ...], dict[str, str]]:
    """Rename-normalize the right header against the left for a product.

    Returns the adjusted right header and the mapping from original right
    column names to their names in the product.
    """
    taken = {c.name for c in left}
    out: list[ColumnSpec] = []
    mapping: dict[str, str] = {}
    for c in right:
        name = c.name
        if name in taken:
            k = 1
            while suffixed(name, k) in taken:
                k += 1
            name = suffixed(name, k)
        taken.add(name)
        out.append(ColumnSpec(name, c.attribute))
        mapping[c.name] = name
    return tuple(out), mapping


def product_header(left: tuple[ColumnSpec, ...],
                   right: tuple[ColumnSpec, ...]) -> tuple[ColumnSpec, ...]:
    adjusted, _ = normalize_right_header(left, right)
    return left + adjusted


def union_compatible(r1: Relation, r2: Relation) -> bool:
    """True iff the attribute sets of the two headers are equal as sets."""
    return set(r1.attributes()) == set(r2.attributes())


def _alignment(left: tuple[ColumnSpec, ...], right: tuple[ColumnSpec, ...]) -> list[int] | None:
    """Column positions of `right` in `left` attribute order, if well defined.

    Identical attribute sequences align positionally (this covers headers
    with repeated attributes); otherwise both sides need distinct
    attributes with equal sets, aligning by the attribute bijection.
    """
    la, ra = [c.attribute for c in left], [c.attribute for c in right]
    if la == ra:
        return list(range(len(ra)))
    if len(set(la)) != len(la) or len(set(ra)) != len(ra):
        return None
    if set(la) != set(ra):
        return None
    return [ra.index(a) for a in la]


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def eval_term(term: AlgebraTerm, instance: Instance) -> Relation:
    """Evaluate a term against an instance (relation name -> relation)."""
    if isinstance(term, Base):
        if term.name not in instance:
            raise UnboundRelationError(f"relation {term.name!r} is not bound in the instance")
        return instance[term.name]

    if isinstance(term, EmptyTuple):
        return EMPTY_TUPLE_RELATION

    if isinstance(term, SingleTuple):
        if len(term.specs) != len(term.values):
            raise EvaluationError("single-tuple relation: specs/values arity mismatch")
        return Relation(term.specs, frozenset({tuple(term.values)}))

    if isinstance(term, Rename):
        rel = eval_term(term.child, instance)
        names = rel.column_names()
        if term.old not in names:
            raise ColumnError(f"cannot rename absent column {term.old!r}")
        if term.new != term.old and term.new in names:
            raise ColumnError(f"rename target {term.new!r} already names a column")
        header = tuple(ColumnSpec(term.new, c.attribute) if c.name == term.old else c
                       for c in rel.header)
        return Relation(header, rel.rows)

    if isinstance(term, Times):
        lhs = eval_term(term.left, instance)
        rhs = eval_term(term.right, instance)
        adjusted, _ = normalize_right_header(lhs.header, rhs.header)
        rows = frozenset(lr + rr for lr in lhs.rows for rr in rhs.rows)
        return Relation(lhs.header + adjusted, rows)

    if isinstance(term, Project):
        rel = eval_term(term.child, instance)
        if len(set(term.names)) != len(term.names):
            raise ColumnError(f"malformed projection list (repeated name): {term.names}")
        names = rel.column_names()
        if any(n not in names for n in term.names):
            return rel
        idx = [names.index(n) for n in term.names]
        header = tuple(rel.header[i] for i in idx)
        rows = frozenset(tuple(row[i] for i in idx) for row in rel.rows)
        return Relation(header, rows)

    if isinstance(term, Select):
        rel = eval_term(term.child, instance)
        cond.validate(term.condition, rel.header)
        rows = frozenset(r for r in rel.rows if cond.evaluate(term.condition, rel.header, r))
        return Relation(rel.header, rows)

    if isinstance(term, Union):
        lhs = eval_term(term.left, instance)
        rhs = eval_term(term.right, instance)
        if not union_compatible(lhs, rhs):
            return EMPTY_TUPLE_RELATION
        align = _alignment(lhs.header, rhs.header)
        if align is None:
            return EMPTY_TUPLE_RELATION
        moved = frozenset(tuple(row[i] for i in align) for row in rhs.rows)
        return Relation(lhs.header, lhs.rows | moved)

    if isinstance(term, Minus):
        lhs = eval_term(term.left, instance)
        rhs = eval_term(term.right, instance)
        if not union_compatible(lhs, rhs):
            return EMPTY_TUPLE_RELATION
        align = _alignment(lhs.header, rhs.header)
        if align is None:
            return EMPTY_TUPLE_RELATION
        moved = frozenset(tuple(row[i] for i in align) for row in rhs.rows)
        return Relation(lhs.header, lhs.rows - moved)

    if isinstance(term, NaturalJoin):
        lhs = eval_term(term.left, instance)
        rhs = eval_term(term.right, instance)
        lnames, rnames = lhs.column_names(), rhs.column_names()
        seen_l, seen_r = set(), set()
        for ln, rn in term.pairs:
            if ln not in lnames:
                raise ColumnError(f"join pair names absent left column {ln!r}")
            if rn not in rnames:
                raise ColumnError(f"join pair names absent right column {rn!r}")
            if ln in seen_l or rn in seen_r:
                raise ColumnError(f"malformed join pair set (repeated column): {term.pairs}")
            seen_l.add(ln)
            seen_r.add(rn)
        adjusted, mapping = normalize_right_header(lhs.header, rhs.header)
        prod_header = lhs.header + adjusted
        conj = cond.conjoin([cond.Compare(Col(ln), "=", Col(mapping[rn]))
                             for ln, rn in term.pairs])
        dropped = {mapping[rn] for _, rn in term.pairs}
        keep = [i for i, c in enumerate(prod_header) if c.name not in dropped]
        header = tuple(prod_header[i] for i in keep)
        rows = set()
        for lr in lhs.rows:
            for rr in rhs.rows:
                row = lr + rr
                if cond.evaluate(conj, prod_header, row):
                    rows.add(tuple(row[i] for i in keep))
        return Relation(header, frozenset(rows))

    if isinstance(term, Extend):
        rel = eval_term(term.child, instance)
        names = rel.column_names()
        if term.name in names:
            raise ColumnError(f"EXTEND target name {term.name!r} already names a column")
        expr = term.expr
        if isinstance(expr, Col) and expr.name not in names:
            raise ColumnError(f"EXTEND expression references absent column {expr.name!r}")
        header = rel.header + (ColumnSpec(term.name, term.attribute),)
        rows = set()
        for row in rel.rows:
            if isinstance(expr, Const):
                v = expr.value
            elif isinstance(expr, Col):
                v = row[names.index(expr.name)]
            elif isinstance(expr, Name):
                v = row[names.index(expr.name)] if expr.name in names else Value.text(expr.name)
            else:
                raise EvaluationError(f"bad EXTEND expression: {expr!r}")
            rows.add(row + (v,))
        return Relation(header, frozenset(rows))

    raise EvaluationError(f"unknown term node: {term!r}")


def single_tuple_for(sig: RelationSignature, values: tuple[Value, ...],
                     names: tuple[str, ...] | None = None) -> SingleTuple:
    """One-tuple relation over (a permutation of) a signature's columns."""
    if names is None:
        specs = sig.columns
    else:
        by_name = {c.name: c for c in sig.columns}
        missing = [n for n in names if n not in by_name]
        if missing:
            raise UpdateError(f"unknown column(s) {missing} for relation {sig.name!r}")
        if len(set(names)) != len(names):
            raise UpdateError(f"repeated column in insert list: {names}")
        specs = tuple(by_name[n] for n in names)
    if len(values) != len(specs):
        raise UpdateError(
            f"value list arity {len(values)} does not match column list arity {len(specs)}")
    return SingleTuple(specs, tuple(values))


# ---------------------------------------------------------------------------
# Update statements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Delete:
    relation: str
    condition: Condition


@dataclass(frozen=True)
class Insert:
    relation: str
    values: tuple[Value, ...] | None = None
    columns: tuple[str, ...] | None = None
    query: AlgebraTerm | None = None


@dataclass(frozen=True)
class Update:
    relation: str
    assignments: tuple[tuple[str, Operand], ...]
    condition: Condition


UpdateStatement = Delete | Insert | Update


def fresh_name(base: str, taken: set[str]) -> str:
    if base not in taken:
        taken.add(base)
        return base
    k = 1
    while suffixed(base, k) in taken:
        k += 1
    name = suffixed(base, k)
    taken.add(name)
    return name


def desugar_update(stmt: UpdateStatement, schema: Schema) -> AlgebraTerm:
    """Lower DELETE / INSERT / UPDATE to an equivalent algebra term."""
    sig = schema.get(stmt.relation)
    base = Base(sig.name)

    if isinstance(stmt, Delete):
        return Minus(base, Select(base, stmt.condition))

    if isinstance(stmt, Insert):
        if (stmt.values is None) == (stmt.query is None):
            raise UpdateError("INSERT takes either a value list or a query, not both")
        if stmt.query is not None:
            return Union(base, stmt.query)
        return Union(base, single_tuple_for(sig, stmt.values, stmt.columns))

    if isinstance(stmt, Update):
        assigned = dict(stmt.assignments)
        known = set(sig.column_names())
        unknown = set(assigned) - known
        if unknown:
            raise UpdateError(f"UPDATE names nonexistent column(s): {sorted(unknown)}")
        kept = Select(base, cond.Not(stmt.condition))
        changed: AlgebraTerm = Select(base, stmt.condition)
        taken = set(sig.column_names())
        new_names = []
        for spec in sig.columns:
            expr = assigned.get(spec.name, Col(spec.name))
            name = fresh_name(spec.name, taken)
            new_names.append(name)
            changed = Extend(changed, spec.attribute, name, expr)
        return Union(kept, Project(changed, tuple(new_names)))

    raise UpdateError(f"unknown update statement: {stmt!r}")


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

_quote_name = cond.quote_name


def render_term(term: AlgebraTerm) -> str:
    """Textual form of a term in the keyword syntax of the parser."""
    if isinstance(term, Base):
        return _quote_name(term.name)
    if isinstance(term, EmptyTuple):
        return "EMPTY"
    if isinstance(term, SingleTuple):
        cells = ", ".join(
            f"{s.attribute},{_quote_name(s.name)} AS {cond._operand_text(Const(v))}"
            for s, v in zip(term.specs, term.values))
        return f"TUPLE({cells})"
    if isinstance(term, Rename):
        return f"({render_term(term.child)} RENAME {_quote_name(term.old)} AS {_quote_name(term.new)})"
    if isinstance(term, Times):
        return f"({render_term(term.left)} TIMES {render_term(term.right)})"
    if isinstance(term, Project):
        cols = ",".join(_quote_name(n) for n in term.names)
        return f"{render_term(term.child)}[{cols}]"
    if isinstance(term, Select):
        return f"({render_term(term.child)} WHERE {cond.render(term.condition)})"
    if isinstance(term, Union):
        return f"({render_term(term.left)} UNION {render_term(term.right)})"
    if isinstance(term, Minus):
        return f"({render_term(term.left)} MINUS {render_term(term.right)})"
    if isinstance(term, NaturalJoin):
        pairs = ",".join(f"{l}={r}" for l, r in term.pairs)
        return f"({render_term(term.left)} JOIN[{pairs}] {render_term(term.right)})"
    if isinstance(term, Extend):
        return (f"(EXTEND {render_term(term.child)} ADD {term.attribute},"
                f"{_quote_name(term.name)} AS {cond._operand_text(term.expr)})")
    raise EvaluationError(f"unknown term node: {term!r}")


def base_names(term: AlgebraTerm) -> set[str]:
    """All relation names referenced by Base nodes of a term."""
    if isinstance(term, Base):
        return {term.name}
    if isinstance(term, (EmptyTuple, SingleTuple)):
        return set()
    if isinstance(term, (Rename, Project, Select, Extend)):
        return base_names(term.child)
    if isinstance(term, (Times, Union, Minus, NaturalJoin)):
        return base_names(term.left) | base_names(term.right)
    raise EvaluationError(f"unknown term node: {term!r}")
