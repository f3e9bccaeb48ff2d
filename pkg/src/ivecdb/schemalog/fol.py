"""First-order encoding of SchemaLog formulas and its Tarskian evaluation.

The four atom forms translate to applications of the member vector
predicates and of the database-listing predicate:

* a cell atom becomes the db term applied to (rel, tid, attr, val);
* an attribute atom existentially closes the tid and value positions;
* a relation atom existentially closes tid, attr, and value;
* a database atom becomes call_1(db).

Connectives and quantifiers pass through unchanged, except that a rule
arrow ``psi -> phi`` encodes as ``not e(psi) or (e(psi) and e(phi))``
(kept verbatim; it is classically material implication).  A database
position may hold a variable: satisfaction then ranges it over the
federation members, which is exactly a scan of call_4 and keeps the
whole encoding first order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from ..errors import SchemaLogError
from ..values import Value
from ..vector import hash_tuple
from . import syntax as sx

# ---------------------------------------------------------------------------
# FOL syntax
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FVar:
    name: str


@dataclass(frozen=True)
class FConst:
    value: Value


@dataclass(frozen=True)
class FApp:
    functor: str
    args: tuple["FTerm", ...]


FTerm = FVar | FConst | FApp


@dataclass(frozen=True)
class FVector:
    """Application of a member's vector predicate: db(rel, tid, attr, val)."""
    db: FTerm
    args: tuple[FTerm, FTerm, FTerm, FTerm]


@dataclass(frozen=True)
class FCall1:
    term: FTerm


@dataclass(frozen=True)
class FCmp:
    lhs: FTerm
    op: str
    rhs: FTerm


@dataclass(frozen=True)
class FNot:
    child: "FolFormula"


@dataclass(frozen=True)
class FAnd:
    left: "FolFormula"
    right: "FolFormula"


@dataclass(frozen=True)
class FOr:
    left: "FolFormula"
    right: "FolFormula"


@dataclass(frozen=True)
class FExists:
    var: str
    child: "FolFormula"


@dataclass(frozen=True)
class FForall:
    var: str
    child: "FolFormula"


FolFormula = FVector | FCall1 | FCmp | FNot | FAnd | FOr | FExists | FForall


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

def encode_term(t: sx.SLTerm) -> FTerm:
    if isinstance(t, sx.Sym):
        return FConst(t.value)
    if isinstance(t, sx.Var):
        return FVar(t.name)
    if isinstance(t, sx.App):
        return FApp(t.functor, tuple(encode_term(a) for a in t.args))
    raise SchemaLogError(f"not a term: {t!r}")


def _fresh(base: str, used: set[str]) -> str:
    if base not in used:
        used.add(base)
        return base
    k = 1
    while f"{base}_{k}" in used:
        k += 1
    name = f"{base}_{k}"
    used.add(name)
    return name


def encode(f: sx.SLFormula) -> FolFormula:
    """Recursive transformation of a SchemaLog formula into FOL."""
    if isinstance(f, sx.Atom):
        atom = f.atom
        if isinstance(atom, sx.QuadAtom):
            return FVector(encode_term(atom.db),
                           (encode_term(atom.rel), encode_term(atom.tid),
                            encode_term(atom.attr), encode_term(atom.val)))
        if isinstance(atom, sx.AttrAtom):
            used = sx.term_vars(atom.db) | sx.term_vars(atom.rel) | sx.term_vars(atom.attr)
            x2, x4 = _fresh("x2", used), _fresh("x4", used)
            return FExists(x2, FExists(x4, FVector(
                encode_term(atom.db),
                (encode_term(atom.rel), FVar(x2), encode_term(atom.attr), FVar(x4)))))
        if isinstance(atom, sx.RelAtom):
            used = sx.term_vars(atom.db) | sx.term_vars(atom.rel)
            x2, x3, x4 = _fresh("x2", used), _fresh("x3", used), _fresh("x4", used)
            return FExists(x2, FExists(x3, FExists(x4, FVector(
                encode_term(atom.db),
                (encode_term(atom.rel), FVar(x2), FVar(x3), FVar(x4))))))
        if isinstance(atom, sx.DbAtom):
            return FCall1(encode_term(atom.db))
        if isinstance(atom, sx.CmpAtom):
            return FCmp(encode_term(atom.lhs), atom.op, encode_term(atom.rhs))
        raise SchemaLogError(f"cannot encode atom {atom!r}")
    if isinstance(f, sx.And):
        return FAnd(encode(f.left), encode(f.right))
    if isinstance(f, sx.Or):
        return FOr(encode(f.left), encode(f.right))
    if isinstance(f, sx.Not):
        return FNot(encode(f.child))
    if isinstance(f, sx.Implies):
        if f.premise is None:
            return encode(f.conclusion)
        e_premise = encode(f.premise)
        return FOr(FNot(e_premise), FAnd(e_premise, encode(f.conclusion)))
    if isinstance(f, sx.Exists):
        return FExists(f.var, encode(f.child))
    if isinstance(f, sx.Forall):
        return FForall(f.var, encode(f.child))
    raise SchemaLogError(f"cannot encode formula {f!r}")


# ---------------------------------------------------------------------------
# Functors and Tarskian evaluation
# ---------------------------------------------------------------------------

class FunctorTable:
    """Interpretations of functional symbols; the tuple hash is built in."""

    def __init__(self, extra: dict[str, Callable[[tuple[Value, ...]], Value]] | None = None):
        self._table = dict(extra or {})

    def apply(self, functor: str, args: Sequence[Value]) -> Value:
        if functor == sx.HASH_FUNCTOR:
            return Value.text(hash_tuple(tuple(args)))
        fn = self._table.get(functor)
        if fn is None:
            raise SchemaLogError(f"no interpretation for functor {functor!r}")
        return fn(tuple(args))


@dataclass(frozen=True)
class TarskiInterpretation:
    """The interpretation induced by a federation: one four-column
    relation per member plus the database-listing predicate."""

    members: dict[str, frozenset[tuple[Value, Value, Value, Value]]]
    call1: frozenset[Value]
    functors: FunctorTable

    @staticmethod
    def from_federation(fed, functors: FunctorTable | None = None) -> "TarskiInterpretation":
        members = {}
        for m in fed.members:
            members[m.name] = frozenset(t.as_row() for t in m.store.tuples)
        call1 = frozenset(Value.text(m.name) for m in fed.members)
        return TarskiInterpretation(members, call1, functors or FunctorTable())


def eval_fterm(t: FTerm, interp: TarskiInterpretation, g: dict[str, Value]) -> Value:
    if isinstance(t, FConst):
        return t.value
    if isinstance(t, FVar):
        if t.name not in g:
            raise SchemaLogError(f"unbound variable {t.name!r}")
        return g[t.name]
    if isinstance(t, FApp):
        return interp.functors.apply(t.functor, [eval_fterm(a, interp, g) for a in t.args])
    raise SchemaLogError(f"not a FOL term: {t!r}")


def fterm_vars(t: FTerm) -> frozenset[str]:
    if isinstance(t, FVar):
        return frozenset({t.name})
    if isinstance(t, FApp):
        out = frozenset()
        for a in t.args:
            out |= fterm_vars(a)
        return out
    return frozenset()


class _TarskiEvaluator:
    """Brute-force satisfaction with memoization on (node, free assignment).

    Enumeration over the domain is exhaustive; caching only collapses
    repeated subproblems, which nested quantifiers produce in bulk.
    """

    def __init__(self, interp: TarskiInterpretation, domain: list[Value]):
        self.interp = interp
        self.domain = domain
        self.memo: dict[tuple[int, tuple], bool] = {}
        self.fv: dict[int, frozenset[str]] = {}

    def free_vars(self, f: FolFormula) -> frozenset[str]:
        key = id(f)
        got = self.fv.get(key)
        if got is not None:
            return got
        if isinstance(f, FVector):
            out = fterm_vars(f.db)
            for a in f.args:
                out |= fterm_vars(a)
        elif isinstance(f, FCall1):
            out = fterm_vars(f.term)
        elif isinstance(f, FCmp):
            out = fterm_vars(f.lhs) | fterm_vars(f.rhs)
        elif isinstance(f, FNot):
            out = self.free_vars(f.child)
        elif isinstance(f, (FAnd, FOr)):
            out = self.free_vars(f.left) | self.free_vars(f.right)
        elif isinstance(f, (FExists, FForall)):
            out = self.free_vars(f.child) - {f.var}
        else:
            raise SchemaLogError(f"not a FOL formula: {f!r}")
        self.fv[key] = out
        return out

    def eval(self, f: FolFormula, g: dict[str, Value]) -> bool:
        relevant = tuple(sorted((v, g[v]) for v in self.free_vars(f) if v in g))
        key = (id(f), relevant)
        got = self.memo.get(key)
        if got is not None:
            return got
        result = self._eval(f, g)
        self.memo[key] = result
        return result

    def _eval(self, f: FolFormula, g: dict[str, Value]) -> bool:
        from ..values import theta_compare

        if isinstance(f, FVector):
            db = eval_fterm(f.db, self.interp, g)
            if db.kind != "text" or db.payload not in self.interp.members:
                return False
            row = tuple(eval_fterm(a, self.interp, g) for a in f.args)
            return row in self.interp.members[db.payload]
        if isinstance(f, FCall1):
            return eval_fterm(f.term, self.interp, g) in self.interp.call1
        if isinstance(f, FCmp):
            return theta_compare(eval_fterm(f.lhs, self.interp, g), f.op,
                                 eval_fterm(f.rhs, self.interp, g))
        if isinstance(f, FNot):
            return not self.eval(f.child, g)
        if isinstance(f, FAnd):
            return self.eval(f.left, g) and self.eval(f.right, g)
        if isinstance(f, FOr):
            return self.eval(f.left, g) or self.eval(f.right, g)
        if isinstance(f, FExists):
            return any(self.eval(f.child, {**g, f.var: d}) for d in self.domain)
        if isinstance(f, FForall):
            return all(self.eval(f.child, {**g, f.var: d}) for d in self.domain)
        raise SchemaLogError(f"not a FOL formula: {f!r}")


def tarski_eval(f: FolFormula, interp: TarskiInterpretation,
                g: dict[str, Value], domain: Iterable[Value]) -> bool:
    """Satisfaction under the interpretation, quantifying over `domain`."""
    return _TarskiEvaluator(interp, list(domain)).eval(f, g)


def render_fterm(t: FTerm) -> str:
    if isinstance(t, FVar):
        return t.name
    if isinstance(t, FConst):
        return repr(t.value)
    return f"{t.functor}({', '.join(render_fterm(a) for a in t.args)})"


def render_fol(f: FolFormula) -> str:
    if isinstance(f, FVector):
        inner = ", ".join(render_fterm(a) for a in f.args)
        return f"{render_fterm(f.db)}({inner})"
    if isinstance(f, FCall1):
        return f"call_1({render_fterm(f.term)})"
    if isinstance(f, FCmp):
        return f"({render_fterm(f.lhs)} {f.op} {render_fterm(f.rhs)})"
    if isinstance(f, FNot):
        return f"not {render_fol(f.child)}"
    if isinstance(f, FAnd):
        return f"({render_fol(f.left)} and {render_fol(f.right)})"
    if isinstance(f, FOr):
        return f"({render_fol(f.left)} or {render_fol(f.right)})"
    if isinstance(f, FExists):
        return f"(exists {f.var}. {render_fol(f.child)})"
    if isinstance(f, FForall):
        return f"(forall {f.var}. {render_fol(f.child)})"
    raise SchemaLogError(f"not a FOL formula: {f!r}")
