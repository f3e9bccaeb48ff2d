"""Rewriting user queries over the virtual schema into vector-store queries.

A user term mentions only the declared relation names; the store holds
only the four-column vector relation, named after the database itself.
`rewrite` replaces every base relation with an algebra encoding of its
reconstruction from the store (per-column selections re-joined on the
tuple index against the relation's index set, absent cells NULL-filled)
and maps every operator above homomorphically.  Evaluating the rewritten
term against the store therefore gives exactly the answer the original
term has over the materialized instance, for the full operator set; the
correctness anchor is that oracle equality, exercised heavily in tests.

`type_of` gives the (relation, column name) provenance of each output
column of a select-project-join-union term, the typed-view shape used to
reconstruct such results from vector form.
"""

from __future__ import annotations

from . import algebra as ra
from . import conditions as cond
from .conditions import Col, Const
from .errors import RewriteError, SchemaError
from .relations import ColumnSpec, Relation, RelationSignature, Schema
from .values import NULL_VALUE, Value
from .vector import A_NAME, R_NAME, T_INDEX, VALUE, VectorRelation, ViewType


def is_spju(term: ra.AlgebraTerm) -> bool:
    """True when the term uses only select/project/join/rename/union."""
    if isinstance(term, ra.Base):
        return True
    if isinstance(term, (ra.Rename, ra.Project, ra.Select)):
        return is_spju(term.child)
    if isinstance(term, (ra.Times, ra.Union, ra.NaturalJoin)):
        return is_spju(term.left) and is_spju(term.right)
    return False


def _type_and_header(term: ra.AlgebraTerm, schema: Schema
                     ) -> tuple[ViewType, tuple[ColumnSpec, ...]]:
    if isinstance(term, ra.Base):
        if term.name == schema.name:
            raise RewriteError(f"the vector relation {schema.name!r} cannot appear in user terms")
        sig = schema.get(term.name)
        return tuple((sig.name, c.name) for c in sig.columns), sig.columns

    if isinstance(term, ra.Rename):
        prov, header = _type_and_header(term.child, schema)
        names = [c.name for c in header]
        if term.old not in names:
            raise RewriteError(f"cannot rename absent column {term.old!r}")
        if term.new != term.old and term.new in names:
            raise RewriteError(f"rename target {term.new!r} already names a column")
        new_header = tuple(ColumnSpec(term.new, c.attribute) if c.name == term.old else c
                           for c in header)
        return prov, new_header

    if isinstance(term, ra.Project):
        prov, header = _type_and_header(term.child, schema)
        names = [c.name for c in header]
        if any(n not in names for n in term.names):
            return prov, header
        idx = [names.index(n) for n in term.names]
        return tuple(prov[i] for i in idx), tuple(header[i] for i in idx)

    if isinstance(term, ra.Select):
        return _type_and_header(term.child, schema)

    if isinstance(term, ra.Times):
        lprov, lheader = _type_and_header(term.left, schema)
        rprov, rheader = _type_and_header(term.right, schema)
        adjusted, _ = ra.normalize_right_header(lheader, rheader)
        return lprov + rprov, lheader + adjusted

    if isinstance(term, ra.NaturalJoin):
        lprov, lheader = _type_and_header(term.left, schema)
        rprov, rheader = _type_and_header(term.right, schema)
        adjusted, mapping = ra.normalize_right_header(lheader, rheader)
        dropped = {mapping[rn] for _, rn in term.pairs}
        prov = list(lprov)
        header = list(lheader)
        for spec, p in zip(adjusted, rprov):
            if spec.name not in dropped:
                prov.append(p)
                header.append(spec)
        return tuple(prov), tuple(header)

    if isinstance(term, ra.Union):
        lprov, lheader = _type_and_header(term.left, schema)
        rprov, rheader = _type_and_header(term.right, schema)
        if ra._alignment(lheader, rheader) is None:
            return (), ()
        # ambiguous provenance resolves to the left operand
        return lprov, lheader

    raise RewriteError(f"non-SPJU operator in typed view: {type(term).__name__}")


def type_of(term: ra.AlgebraTerm, schema: Schema) -> ViewType:
    """Provenance of each output column of an SPJU term."""
    prov, _ = _type_and_header(term, schema)
    return prov


def header_of(term: ra.AlgebraTerm, schema: Schema) -> tuple[ColumnSpec, ...]:
    """Static output header of a term (evaluated over an empty instance)."""
    empty = {sig.name: Relation(sig.columns, frozenset()) for sig in schema.relations}
    return ra.eval_term(term, empty).header


def matter_encoding(schema: Schema, sig: RelationSignature) -> ra.AlgebraTerm:
    """The store-side encoding of one base relation.

    Selects the relation's tuple-index set and each column's cells from
    the vector relation, NULL-fills indexes missing a cell, joins the
    columns back on the index, and casts to the declared header.
    """
    rv = ra.Base(schema.name)
    taken = set(sig.column_names()) | {R_NAME, T_INDEX, A_NAME, VALUE}
    cell_names = [ra.fresh_name(f"cell{i + 1}#", taken) for i in range(sig.arity)]
    tid_out = ra.fresh_name("tid#", taken)

    is_rel = cond.Compare(Col(R_NAME), "=", Const(Value.text(sig.name)))
    tids = ra.Project(ra.Select(rv, is_rel), (T_INDEX,))

    columns = []
    for i, spec in enumerate(sig.columns):
        is_cell = cond.And(is_rel, cond.Compare(Col(A_NAME), "=", Const(Value.text(spec.name))))
        got = ra.Rename(ra.Project(ra.Select(rv, is_cell), (T_INDEX, VALUE)),
                        VALUE, cell_names[i])
        missing = ra.Minus(tids, ra.Project(got, (T_INDEX,)))
        filled = ra.Extend(missing, VALUE, cell_names[i], Const(NULL_VALUE))
        columns.append(ra.Union(got, filled))

    acc = columns[0]
    for col in columns[1:]:
        acc = ra.NaturalJoin(acc, col, ((T_INDEX, T_INDEX),))
    acc = ra.Rename(acc, T_INDEX, tid_out)
    for i, spec in enumerate(sig.columns):
        acc = ra.Extend(acc, spec.attribute, spec.name, Col(cell_names[i]))
    return ra.Project(acc, sig.column_names())


def rewrite(term: ra.AlgebraTerm, schema: Schema) -> ra.AlgebraTerm:
    """Rewrite a user term into an equivalent term over the vector relation.

    Pure structural recursion: base relations get their matter encoding,
    everything else is rebuilt unchanged on top.
    """
    if isinstance(term, ra.Base):
        if term.name == schema.name:
            raise RewriteError(f"the vector relation {schema.name!r} cannot appear in user terms")
        try:
            sig = schema.get(term.name)
        except SchemaError as exc:
            raise RewriteError(str(exc)) from exc
        return matter_encoding(schema, sig)
    if isinstance(term, (ra.EmptyTuple, ra.SingleTuple)):
        return term
    if isinstance(term, ra.Rename):
        return ra.Rename(rewrite(term.child, schema), term.old, term.new)
    if isinstance(term, ra.Project):
        return ra.Project(rewrite(term.child, schema), term.names)
    if isinstance(term, ra.Select):
        return ra.Select(rewrite(term.child, schema), term.condition)
    if isinstance(term, ra.Extend):
        return ra.Extend(rewrite(term.child, schema), term.attribute, term.name, term.expr)
    if isinstance(term, ra.Times):
        return ra.Times(rewrite(term.left, schema), rewrite(term.right, schema))
    if isinstance(term, ra.Union):
        return ra.Union(rewrite(term.left, schema), rewrite(term.right, schema))
    if isinstance(term, ra.Minus):
        return ra.Minus(rewrite(term.left, schema), rewrite(term.right, schema))
    if isinstance(term, ra.NaturalJoin):
        return ra.NaturalJoin(rewrite(term.left, schema), rewrite(term.right, schema), term.pairs)
    raise RewriteError(f"unknown term node: {term!r}")


def answer(term: ra.AlgebraTerm, store: VectorRelation, schema: Schema) -> Relation:
    """Answer a user query from the vector store alone.

    Rewrites the term over the store and evaluates it there; the result
    equals direct evaluation over the materialized instance, with the
    user-facing header.  SPJU terms additionally carry the typed-view
    provenance available through `type_of`.
    """
    if store.db_name != schema.name:
        raise RewriteError(
            f"store {store.db_name!r} does not belong to database {schema.name!r}")
    rewritten = rewrite(term, schema)
    return ra.eval_term(rewritten, {schema.name: store.as_relation()})
