"""Compilation of safe, non-recursive rule programs to algebra terms.

Each positive body literal contributes a scan: a member's vector store
when its database position is ground, the stacked call_4 relation when
it is a variable, the member list for bare database atoms, or the term
compiled for a lower derived predicate.  Scans are glued by a product,
constants and repeated variables become selections, and the head is a
projection onto one column per head argument.  Negated literals subtract
the matching part of the positive product; theta comparisons are plain
selections.  Safety requires every head, negated, and comparison
variable to be bound by a positive literal, functor arguments to be
ground, and the derived-predicate dependency graph to be acyclic.
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import algebra as ra
from .. import conditions as cond
from ..conditions import Col, Const
from ..errors import SafetyError, SchemaLogError
from ..relations import ColumnSpec, Relation
from ..values import NULL_VALUE, Value, theta_compare
from ..vector import A_NAME, R_NAME, T_INDEX, VALUE, VECTOR_HEADER
from ..federation import CALL4_HEADER, DB_NAME, Federation
from .fol import FunctorTable
from . import syntax as sx


def _ground_value(t: sx.SLTerm, functors: FunctorTable) -> Value | None:
    """Evaluate a variable-free term; None when it contains a variable."""
    if isinstance(t, sx.Sym):
        return t.value
    if isinstance(t, sx.Var):
        return None
    if isinstance(t, sx.App):
        args = [_ground_value(a, functors) for a in t.args]
        if any(a is None for a in args):
            return None
        return functors.apply(t.functor, args)
    raise SchemaLogError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Safety and stratification
# ---------------------------------------------------------------------------

def _positive_vars(rule: sx.SLRule) -> set[str]:
    out: set[str] = set()
    for lit in rule.body:
        if lit.positive and not isinstance(lit.atom, sx.CmpAtom):
            for t in sx.atom_terms(lit.atom):
                if isinstance(t, sx.Var):
                    out.add(t.name)
    return out


def check_safety(rules: tuple[sx.SLRule, ...]) -> None:
    """Reject unsafe rules; raises SafetyError naming the offender."""
    arities: dict[str, int] = {}
    for i, rule in enumerate(rules, start=1):
        where = f"rule {i}"
        if not isinstance(rule.head, sx.PredAtom):
            raise SafetyError(f"{where}: only derived-predicate heads are supported")
        if len(rule.head.args) < 1:
            raise SafetyError(f"{where}: head predicates need at least one argument")
        seen = arities.setdefault(rule.head.name, len(rule.head.args))
        if seen != len(rule.head.args):
            raise SafetyError(
                f"{where}: predicate {rule.head.name!r} used with arities {seen} "
                f"and {len(rule.head.args)}")
        for t in rule.head.args + tuple(
                t for lit in rule.body for t in sx.atom_terms(lit.atom)):
            if isinstance(t, sx.App) and sx.term_vars(t):
                raise SafetyError(f"{where}: functor argument {t!r} is not ground")
        bound = _positive_vars(rule)
        for t in rule.head.args:
            for v in sx.term_vars(t):
                if v not in bound:
                    raise SafetyError(f"{where}: head variable {v!r} is not bound "
                                      f"by a positive body literal")
        for lit in rule.body:
            if lit.positive and not isinstance(lit.atom, sx.CmpAtom):
                continue
            kind = "comparison" if isinstance(lit.atom, sx.CmpAtom) else "negated literal"
            for t in sx.atom_terms(lit.atom):
                for v in sx.term_vars(t):
                    if v not in bound:
                        raise SafetyError(f"{where}: variable {v!r} in a {kind} "
                                          f"is not bound by a positive body literal")


def stratify(rules: tuple[sx.SLRule, ...]) -> list[str]:
    """Topological order of derived predicates; raises on recursion."""
    deps: dict[str, set[str]] = {}
    defined = {r.head.name for r in rules if isinstance(r.head, sx.PredAtom)}
    for rule in rules:
        head = rule.head.name
        deps.setdefault(head, set())
        for lit in rule.body:
            if isinstance(lit.atom, sx.PredAtom):
                if lit.atom.name not in defined:
                    raise SafetyError(f"predicate {lit.atom.name!r} is used but never defined")
                deps[head].add(lit.atom.name)

    order: list[str] = []
    state: dict[str, int] = {}

    def visit(p: str) -> None:
        mark = state.get(p, 0)
        if mark == 1:
            raise SafetyError(f"recursion through predicate {p!r} is not supported")
        if mark == 2:
            return
        state[p] = 1
        for q in sorted(deps.get(p, ())):
            visit(q)
        state[p] = 2
        order.append(p)

    for p in sorted(deps):
        visit(p)
    return order


# ---------------------------------------------------------------------------
# Compilation
# ---------------------------------------------------------------------------

@dataclass
class _Scan:
    term: ra.AlgebraTerm
    header: tuple[ColumnSpec, ...]
    bindings: tuple[tuple[str, sx.SLTerm], ...]  # (column name, argument term)


def _constant_relation(specs: tuple[ColumnSpec, ...],
                       rows: list[tuple[Value, ...]]) -> ra.AlgebraTerm:
    """A literal relation as a term: unions of single tuples, or a
    self-subtraction for the empty one."""
    if not rows:
        dummy = ra.SingleTuple(specs, tuple(NULL_VALUE for _ in specs))
        return ra.Minus(dummy, dummy)
    parts = [ra.SingleTuple(specs, row) for row in rows]
    term = parts[0]
    for p in parts[1:]:
        term = ra.Union(term, p)
    return term


def _empty(specs: tuple[ColumnSpec, ...]) -> ra.AlgebraTerm:
    return _constant_relation(specs, [])


class _Compiler:
    def __init__(self, fed: Federation, functors: FunctorTable):
        self.fed = fed
        self.functors = functors
        self.member_names = {m.name for m in fed.members}
        self.compiled: dict[str, ra.AlgebraTerm] = {}
        self.specs: dict[str, tuple[ColumnSpec, ...]] = {}

    # -- literal scans ------------------------------------------------------

    def scan(self, atom) -> _Scan:
        if isinstance(atom, sx.PredAtom):
            specs = self.specs[atom.name]
            if len(atom.args) != len(specs):
                raise SafetyError(f"predicate {atom.name!r} used with arity "
                                  f"{len(atom.args)}, defined with {len(specs)}")
            return _Scan(self.compiled[atom.name], specs,
                         tuple((specs[i].name, t) for i, t in enumerate(atom.args)))

        if isinstance(atom, sx.DbAtom):
            specs = CALL4_HEADER[:1]
            rows = [(Value.text(n),) for n in sorted(self.member_names)]
            return _Scan(_constant_relation(specs, rows), specs,
                         ((DB_NAME, atom.db),))

        db_ground = _ground_value(atom.db, self.functors)
        if isinstance(atom.db, sx.Var):
            term, header = self.fed.call4_term(), CALL4_HEADER
            cols = {"db": DB_NAME, "rel": R_NAME, "tid": T_INDEX,
                    "attr": A_NAME, "val": VALUE}
            base_bindings = [(DB_NAME, atom.db)]
        else:
            header = VECTOR_HEADER
            cols = {"rel": R_NAME, "tid": T_INDEX, "attr": A_NAME, "val": VALUE}
            base_bindings = []
            if db_ground is None or db_ground.kind != "text" \
                    or db_ground.payload not in self.member_names:
                return _Scan(_empty(header), header, ())
            term = ra.Base(db_ground.payload)

        if isinstance(atom, sx.QuadAtom):
            named = [("rel", atom.rel), ("tid", atom.tid), ("attr", atom.attr),
                     ("val", atom.val)]
        elif isinstance(atom, sx.AttrAtom):
            named = [("rel", atom.rel), ("attr", atom.attr)]
        elif isinstance(atom, sx.RelAtom):
            named = [("rel", atom.rel)]
        else:
            raise SchemaLogError(f"cannot scan atom {atom!r}")
        bindings = base_bindings + [(cols[k], t) for k, t in named]
        return _Scan(term, header, tuple(bindings))

    # -- rule bodies ----------------------------------------------------------

    def _operand(self, t: sx.SLTerm, varcols: dict[str, str]):
        if isinstance(t, sx.Var):
            return Col(varcols[t.name])
        v = _ground_value(t, self.functors)
        if v is None:
            raise SafetyError(f"non-ground functor term {t!r}")
        return Const(v)

    def compile_rule(self, rule: sx.SLRule, specs: tuple[ColumnSpec, ...]) -> ra.AlgebraTerm:
        positives = [l for l in rule.body
                     if l.positive and not isinstance(l.atom, sx.CmpAtom)]
        negatives = [l for l in rule.body
                     if not l.positive and not isinstance(l.atom, sx.CmpAtom)]
        comparisons = [l for l in rule.body if isinstance(l.atom, sx.CmpAtom)]

        varcols: dict[str, str] = {}
        term: ra.AlgebraTerm | None = None
        header: tuple[ColumnSpec, ...] = ()
        conds: list[cond.Condition] = []

        for lit in positives:
            scan = self.scan(lit.atom)
            if term is None:
                term, mapping = scan.term, {c.name: c.name for c in scan.header}
                header = scan.header
            else:
                adjusted, mapping = ra.normalize_right_header(header, scan.header)
                term = ra.Times(term, scan.term)
                header = header + adjusted
            for col, arg in scan.bindings:
                name = mapping[col]
                if isinstance(arg, sx.Var):
                    if arg.name in varcols:
                        conds.append(cond.Compare(Col(varcols[arg.name]), "=", Col(name)))
                    else:
                        varcols[arg.name] = name
                else:
                    value = _ground_value(arg, self.functors)
                    if value is None:
                        raise SafetyError(f"non-ground functor term {arg!r}")
                    conds.append(cond.Compare(Col(name), "=", Const(value)))

        if term is not None:
            if conds:
                term = ra.Select(term, cond.conjoin(conds))
        else:
            # no positive relational literal: the body is a ground guard
            values = []
            for t in rule.head.args:
                v = _ground_value(t, self.functors)
                if v is None:
                    raise SafetyError(f"head variable in a rule with no positive literal")
                values.append(v)
            term = ra.SingleTuple(specs, tuple(values))
            header = specs

        for lit in negatives:
            scan = self.scan(lit.atom)
            adjusted, mapping = ra.normalize_right_header(header, scan.header)
            product = ra.Times(term, scan.term)
            local: dict[str, str] = {}
            nconds: list[cond.Condition] = []
            for col, arg in scan.bindings:
                name = mapping[col]
                if isinstance(arg, sx.Var):
                    if arg.name in varcols:
                        nconds.append(cond.Compare(Col(varcols[arg.name]), "=", Col(name)))
                    elif arg.name in local:
                        nconds.append(cond.Compare(Col(local[arg.name]), "=", Col(name)))
                    else:
                        local[arg.name] = name
                else:
                    value = _ground_value(arg, self.functors)
                    if value is None:
                        raise SafetyError(f"non-ground functor term {arg!r}")
                    nconds.append(cond.Compare(Col(name), "=", Const(value)))
            matched = ra.Project(ra.Select(product, cond.conjoin(nconds)),
                                 tuple(c.name for c in header))
            term = ra.Minus(term, matched)

        static_false = False
        ccs: list[cond.Condition] = []
        for lit in comparisons:
            atom = lit.atom
            lg = _ground_value(atom.lhs, self.functors) if not sx.term_vars(atom.lhs) else None
            rg = _ground_value(atom.rhs, self.functors) if not sx.term_vars(atom.rhs) else None
            if lg is not None and rg is not None:
                truth = theta_compare(lg, atom.op, rg)
                if not lit.positive:
                    truth = not truth
                if not truth:
                    static_false = True
                continue
            c = cond.Compare(self._operand(atom.lhs, varcols), atom.op,
                             self._operand(atom.rhs, varcols))
            ccs.append(c if lit.positive else cond.Not(c))
        if static_false:
            return _empty(specs)
        if ccs:
            term = ra.Select(term, cond.conjoin(ccs))

        # head assembly: one fresh column per head argument, cast to specs
        taken = {c.name for c in header}
        fresh = []
        for i, arg in enumerate(rule.head.args):
            expr = (Col(varcols[arg.name]) if isinstance(arg, sx.Var)
                    else Const(_ground_value(arg, self.functors)))
            name = ra.fresh_name(f"h{i + 1}#", taken)
            fresh.append(name)
            term = ra.Extend(term, specs[i].attribute, name, expr)
        term = ra.Project(term, tuple(fresh))
        for name, spec in zip(fresh, specs):
            term = ra.Rename(term, name, spec.name)
        return term

    # -- program ---------------------------------------------------------------

    def canonical_specs(self, rules_for: list[sx.SLRule]) -> tuple[ColumnSpec, ...]:
        head = rules_for[0].head
        names: list[str] = []
        for i, arg in enumerate(head.args):
            name = arg.name if isinstance(arg, sx.Var) else f"c{i + 1}"
            if name in names:
                name = f"c{i + 1}"
            names.append(name)
        return tuple(ColumnSpec(n, n) for n in names)

    def run(self, rules: tuple[sx.SLRule, ...]) -> dict[str, ra.AlgebraTerm]:
        check_safety(rules)
        order = stratify(rules)
        by_pred: dict[str, list[sx.SLRule]] = {}
        for r in rules:
            by_pred.setdefault(r.head.name, []).append(r)
        for pred in order:
            group = by_pred[pred]
            specs = self.canonical_specs(group)
            self.specs[pred] = specs
            parts = [self.compile_rule(r, specs) for r in group]
            term = parts[0]
            for p in parts[1:]:
                term = ra.Union(term, p)
            self.compiled[pred] = term
        return dict(self.compiled)


def compile_rules(rules: tuple[sx.SLRule, ...], fed: Federation,
                  functors: FunctorTable | None = None) -> dict[str, ra.AlgebraTerm]:
    """Compile a safe non-recursive program, bottom-up by stratum."""
    return _Compiler(fed, functors or FunctorTable()).run(rules)


def eval_program(rules: tuple[sx.SLRule, ...], fed: Federation, query: str,
                 functors: FunctorTable | None = None) -> Relation:
    """Compile and evaluate one derived predicate over the federation."""
    compiled = compile_rules(rules, fed, functors)
    if query not in compiled:
        raise SchemaLogError(f"no rules define predicate {query!r}")
    return ra.eval_term(compiled[query], fed.instance())


# ---------------------------------------------------------------------------
# Naive oracle evaluation
# ---------------------------------------------------------------------------

def _facts(atom, fed: Federation, derived: dict[str, frozenset]) -> list[tuple[Value, ...]]:
    """The extension matched by a literal, aligned with its binding columns."""
    if isinstance(atom, sx.PredAtom):
        return list(derived.get(atom.name, frozenset()))
    if isinstance(atom, sx.DbAtom):
        return [(Value.text(m.name),) for m in fed.members]
    var_db = isinstance(atom.db, sx.Var)
    rows: set[tuple[Value, ...]] = set()
    for m in fed.members:
        prefix = (Value.text(m.name),) if var_db else ()
        for t in m.store.tuples:
            if isinstance(atom, sx.QuadAtom):
                rows.add(prefix + (Value.text(t.r_name), Value.text(t.t_index),
                                   Value.text(t.a_name), t.value))
            elif isinstance(atom, sx.AttrAtom):
                rows.add(prefix + (Value.text(t.r_name), Value.text(t.a_name)))
            elif isinstance(atom, sx.RelAtom):
                rows.add(prefix + (Value.text(t.r_name),))
    return list(rows)


def _match_args(atom, fed: Federation) -> tuple[sx.SLTerm, ...]:
    if isinstance(atom, (sx.PredAtom, sx.DbAtom)):
        return sx.atom_terms(atom)
    args = list(sx.atom_terms(atom))
    if not isinstance(atom.db, sx.Var):
        args = args[1:]  # the ground database selects the member instead
    return tuple(args)


def _unify(args: tuple[sx.SLTerm, ...], fact: tuple[Value, ...],
           g: dict[str, Value], functors: FunctorTable) -> dict[str, Value] | None:
    out = dict(g)
    for t, v in zip(args, fact):
        if isinstance(t, sx.Var):
            if t.name in out:
                if out[t.name] != v:
                    return None
            else:
                out[t.name] = v
        else:
            ground = _ground_value(t, functors)
            if ground is None or ground != v:
                return None
    return out


def naive_eval(rules: tuple[sx.SLRule, ...], fed: Federation,
               functors: FunctorTable | None = None) -> dict[str, frozenset[tuple[Value, ...]]]:
    """Substitution-enumeration evaluation of a program, as ground truth."""
    functors = functors or FunctorTable()
    check_safety(rules)
    order = stratify(rules)
    by_pred: dict[str, list[sx.SLRule]] = {}
    for r in rules:
        by_pred.setdefault(r.head.name, []).append(r)

    derived: dict[str, frozenset[tuple[Value, ...]]] = {}
    for pred in order:
        tuples: set[tuple[Value, ...]] = set()
        for rule in by_pred[pred]:
            positives = [l for l in rule.body
                         if l.positive and not isinstance(l.atom, sx.CmpAtom)]
            others = [l for l in rule.body
                      if not l.positive or isinstance(l.atom, sx.CmpAtom)]
            assignments: list[dict[str, Value]] = [{}]
            for lit in positives:
                args = _match_args(lit.atom, fed)
                facts = []
                if isinstance(lit.atom, (sx.PredAtom, sx.DbAtom)) or isinstance(lit.atom.db, sx.Var):
                    facts = _facts(lit.atom, fed, derived)
                else:
                    db = _ground_value(lit.atom.db, functors)
                    if db is not None and db.kind == "text" \
                            and any(m.name == db.payload for m in fed.members):
                        sub = Federation([fed.member(db.payload)])
                        facts = _facts(lit.atom, sub, derived)
                new = []
                for g in assignments:
                    for fact in facts:
                        g2 = _unify(args, fact, g, functors)
                        if g2 is not None:
                            new.append(g2)
                assignments = new
                if not assignments:
                    break
            kept = []
            for g in assignments:
                ok = True
                for lit in others:
                    atom = lit.atom
                    if isinstance(atom, sx.CmpAtom):
                        truth = theta_compare(
                            _apply(atom.lhs, g, functors), atom.op,
                            _apply(atom.rhs, g, functors))
                        if truth != lit.positive:
                            ok = False
                            break
                        continue
                    holds = _holds(atom, g, fed, derived, functors)
                    if holds != lit.positive:
                        ok = False
                        break
                if ok:
                    kept.append(g)
            for g in kept:
                tuples.add(tuple(_apply(t, g, functors) for t in rule.head.args))
        derived[pred] = frozenset(tuples)
    return derived


def _apply(t: sx.SLTerm, g: dict[str, Value], functors: FunctorTable) -> Value:
    if isinstance(t, sx.Var):
        return g[t.name]
    if isinstance(t, sx.Sym):
        return t.value
    args = [_apply(a, g, functors) for a in t.args]
    return functors.apply(t.functor, args)


def _holds(atom, g: dict[str, Value], fed: Federation,
           derived: dict[str, frozenset], functors: FunctorTable) -> bool:
    if isinstance(atom, sx.PredAtom):
        row = tuple(_apply(t, g, functors) for t in atom.args)
        return row in derived.get(atom.name, frozenset())
    if isinstance(atom, sx.DbAtom):
        v = _apply(atom.db, g, functors)
        return v.kind == "text" and any(m.name == v.payload for m in fed.members)
    db = _apply(atom.db, g, functors)
    if db.kind != "text" or not any(m.name == db.payload for m in fed.members):
        return False
    member = fed.member(db.payload)
    rel = _apply(atom.rel, g, functors)
    if rel.kind != "text":
        return False
    if isinstance(atom, sx.RelAtom):
        return any(t.r_name == rel.payload for t in member.store.tuples)
    attr = _apply(atom.attr, g, functors)
    if attr.kind != "text":
        return False
    if isinstance(atom, sx.AttrAtom):
        return any(t.r_name == rel.payload and t.a_name == attr.payload
                   for t in member.store.tuples)
    tid = _apply(atom.tid, g, functors)
    val = _apply(atom.val, g, functors)
    if tid.kind != "text":
        return False
    return any(t.r_name == rel.payload and t.t_index == tid.payload
               and t.a_name == attr.payload and t.value == val
               for t in member.store.tuples)
