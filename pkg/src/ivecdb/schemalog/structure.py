"""The SchemaLog structure induced by a federation, with brute-force
satisfaction over the active domain.

The structure's partial-function nest follows db -> rel -> attr -> tid:
a database is defined when it is a federation member, a relation when it
has at least one stored cell, an attribute when some tuple stores a cell
for it, and a cell maps its tuple id to the stored value.  Quantifiers
range over the active domain: every member name, relation name, tuple
index, attribute name, and stored value.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import SchemaLogError
from ..values import Value, theta_compare
from .fol import FunctorTable
from . import syntax as sx


@dataclass(frozen=True)
class SLStructure:
    members: tuple[str, ...]
    nest: dict[str, dict[str, dict[str, dict[str, Value]]]]
    functors: FunctorTable

    @staticmethod
    def from_federation(fed, functors: FunctorTable | None = None) -> "SLStructure":
        nest: dict[str, dict[str, dict[str, dict[str, Value]]]] = {}
        for m in fed.members:
            per_db = nest.setdefault(m.name, {})
            for t in m.store.tuples:
                per_db.setdefault(t.r_name, {}).setdefault(t.a_name, {})[t.t_index] = t.value
        return SLStructure(tuple(m.name for m in fed.members), nest,
                           functors or FunctorTable())


def active_domain(fed) -> list[Value]:
    """Deterministically ordered: all names, tuple indexes, and values."""
    out: set[Value] = set()
    for m in fed.members:
        out.add(Value.text(m.name))
        for t in m.store.tuples:
            out.add(Value.text(t.r_name))
            out.add(Value.text(t.t_index))
            out.add(Value.text(t.a_name))
            out.add(t.value)
    return sorted(out, key=Value.sort_key)


def _eval_term(t: sx.SLTerm, struct: SLStructure, g: dict[str, Value]) -> Value:
    if isinstance(t, sx.Sym):
        return t.value
    if isinstance(t, sx.Var):
        if t.name not in g:
            raise SchemaLogError(f"unbound variable {t.name!r}")
        return g[t.name]
    if isinstance(t, sx.App):
        return struct.functors.apply(t.functor, [_eval_term(a, struct, g) for a in t.args])
    raise SchemaLogError(f"not a term: {t!r}")


def _text(v: Value) -> str | None:
    return v.payload if v.kind == "text" else None


def satisfies_atom(struct: SLStructure, atom, g: dict[str, Value]) -> bool:
    if isinstance(atom, sx.CmpAtom):
        return theta_compare(_eval_term(atom.lhs, struct, g), atom.op,
                             _eval_term(atom.rhs, struct, g))
    if isinstance(atom, sx.DbAtom):
        db = _text(_eval_term(atom.db, struct, g))
        return db is not None and db in struct.members
    db = _text(_eval_term(atom.db, struct, g))
    if db is None or db not in struct.members:
        return False
    per_db = struct.nest.get(db, {})
    rel = _text(_eval_term(atom.rel, struct, g))
    if rel is None or rel not in per_db:
        return False
    if isinstance(atom, sx.RelAtom):
        return True
    attr = _text(_eval_term(atom.attr, struct, g))
    if attr is None or attr not in per_db[rel]:
        return False
    if isinstance(atom, sx.AttrAtom):
        return True
    if isinstance(atom, sx.QuadAtom):
        tid = _text(_eval_term(atom.tid, struct, g))
        if tid is None:
            return False
        stored = per_db[rel][attr].get(tid)
        return stored is not None and stored == _eval_term(atom.val, struct, g)
    raise SchemaLogError(f"cannot evaluate atom {atom!r}")


class _StructureEvaluator:
    """Brute-force satisfaction with memoization on (node, free assignment)."""

    def __init__(self, struct: SLStructure, domain: list[Value]):
        self.struct = struct
        self.domain = domain
        self.memo: dict[tuple[int, tuple], bool] = {}
        self.fv: dict[int, frozenset[str]] = {}

    def free_vars(self, f: sx.SLFormula) -> frozenset[str]:
        key = id(f)
        got = self.fv.get(key)
        if got is None:
            got = frozenset(sx.formula_free_vars(f))
            self.fv[key] = got
        return got

    def eval(self, f: sx.SLFormula, g: dict[str, Value]) -> bool:
        relevant = tuple(sorted((v, g[v]) for v in self.free_vars(f) if v in g))
        key = (id(f), relevant)
        got = self.memo.get(key)
        if got is not None:
            return got
        result = self._eval(f, g)
        self.memo[key] = result
        return result

    def _eval(self, f: sx.SLFormula, g: dict[str, Value]) -> bool:
        if isinstance(f, sx.Atom):
            return satisfies_atom(self.struct, f.atom, g)
        if isinstance(f, sx.Not):
            return not self.eval(f.child, g)
        if isinstance(f, sx.Or):
            return self.eval(f.left, g) or self.eval(f.right, g)
        if isinstance(f, sx.And):
            return self.eval(f.left, g) and self.eval(f.right, g)
        if isinstance(f, sx.Implies):
            if f.premise is None:
                return self.eval(f.conclusion, g)
            return not self.eval(f.premise, g) or self.eval(f.conclusion, g)
        if isinstance(f, sx.Exists):
            return any(self.eval(f.child, {**g, f.var: d}) for d in self.domain)
        if isinstance(f, sx.Forall):
            return all(self.eval(f.child, {**g, f.var: d}) for d in self.domain)
        raise SchemaLogError(f"not a formula: {f!r}")


def satisfies(struct: SLStructure, f: sx.SLFormula, g: dict[str, Value],
              domain: list[Value]) -> bool:
    """Satisfaction per the structure semantics (disjunction, negation,
    and existential primitively; the rest classically on top)."""
    return _StructureEvaluator(struct, domain).eval(f, g)


def structure_eval(f: sx.SLFormula, fed, g: dict[str, Value] | None = None,
                   functors: FunctorTable | None = None) -> bool:
    """Truth of a formula in the structure induced by the federation."""
    struct = SLStructure.from_federation(fed, functors)
    domain = active_domain(fed)
    free = sx.formula_free_vars(f)
    assignment = dict(g or {})
    missing = free - set(assignment)
    if missing:
        raise SchemaLogError(f"free variables without assignment: {sorted(missing)}")
    return satisfies(struct, f, assignment, domain)
