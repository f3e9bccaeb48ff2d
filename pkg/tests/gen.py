"""Seeded random generators shared by the property and acceptance suites."""

from __future__ import annotations

import random

from ivecdb import algebra as ra
from ivecdb import conditions as cond
from ivecdb.conditions import Col, Const
from ivecdb.federation import Federation, Member, Pattern, PatternItem
from ivecdb.relations import ColumnSpec, Relation, RelationSignature, Schema
from ivecdb.values import NULL_VALUE, Value
from ivecdb.vector import parse_instance
from ivecdb.schemalog import syntax as sx

TEXT_POOL = ["a", "b", "cc", "d1", "e"]
NUMBER_POOL = [0, 1, 2, 35, 700]
ATTR_POOL = ["alpha", "beta", "gamma", "delta", "eps"]


def rand_value(rng: random.Random, null_rate: float = 0.0) -> Value:
    if null_rate and rng.random() < null_rate:
        return NULL_VALUE
    if rng.random() < 0.5:
        return Value.text(rng.choice(TEXT_POOL))
    return Value.number(rng.choice(NUMBER_POOL))


def rand_schema(rng: random.Random, db_name: str = "db",
                max_relations: int = 4, max_columns: int = 5) -> Schema:
    sigs: list[RelationSignature] = []
    for i in range(rng.randint(1, max_relations)):
        if sigs and rng.random() < 0.35:
            # share an existing attribute set (shuffled) to make unions interesting
            attrs = list(rng.choice(sigs).attributes())
            rng.shuffle(attrs)
        else:
            attrs = rng.sample(ATTR_POOL, rng.randint(1, max_columns))
        cols = tuple(ColumnSpec(a if rng.random() < 0.7 else f"{a}_n", a) for a in attrs)
        sigs.append(RelationSignature(f"r{i + 1}", cols))
    return Schema(db_name, tuple(sigs))


def rand_instance(rng: random.Random, schema: Schema, max_tuples: int = 20,
                  null_rate: float = 0.1) -> dict[str, Relation]:
    instance = {}
    for sig in schema.relations:
        rows = set()
        for _ in range(rng.randint(0, max_tuples)):
            row = tuple(rand_value(rng, null_rate) for _ in range(sig.arity))
            if all(v.is_null for v in row):
                continue
            rows.add(row)
        instance[sig.name] = Relation(sig.columns, frozenset(rows))
    return instance


def rand_condition(rng: random.Random, header: tuple[ColumnSpec, ...],
                   depth: int = 2) -> cond.Condition:
    if not header:
        return cond.TrueCond()
    if depth > 0 and rng.random() < 0.4:
        kind = rng.randrange(3)
        if kind == 0:
            return cond.And(rand_condition(rng, header, depth - 1),
                            rand_condition(rng, header, depth - 1))
        if kind == 1:
            return cond.Or(rand_condition(rng, header, depth - 1),
                           rand_condition(rng, header, depth - 1))
        return cond.Not(rand_condition(rng, header, depth - 1))
    op = rng.choice(cond.THETA_OPS)
    lhs = Col(rng.choice(header).name)
    if len(header) > 1 and rng.random() < 0.3:
        return cond.Compare(lhs, op, Col(rng.choice(header).name))
    return cond.Compare(lhs, op, Const(rand_value(rng)))


def _rand_leaf(rng: random.Random, schema: Schema) -> tuple[ra.AlgebraTerm, tuple[ColumnSpec, ...]]:
    sig = rng.choice(schema.relations)
    return ra.Base(sig.name), sig.columns


def rand_spju_term(rng: random.Random, schema: Schema, depth: int = 4
                   ) -> tuple[ra.AlgebraTerm, tuple[ColumnSpec, ...]]:
    """A random select-project-join-rename-union term with its static header."""
    if depth <= 0 or rng.random() < 0.25:
        return _rand_leaf(rng, schema)
    op = rng.choice(["select", "project", "rename", "times", "njoin", "union", "union"])
    if op == "select":
        child, header = rand_spju_term(rng, schema, depth - 1)
        return ra.Select(child, rand_condition(rng, header)), header
    if op == "project":
        child, header = rand_spju_term(rng, schema, depth - 1)
        names = [c.name for c in header]
        if not names:
            return child, header
        k = rng.randint(1, len(names))
        chosen = rng.sample(names, k)
        if rng.random() < 0.1:
            chosen[rng.randrange(len(chosen))] = "no-such-column"
            return ra.Project(child, tuple(chosen)), header
        idx = [names.index(n) for n in chosen]
        return ra.Project(child, tuple(chosen)), tuple(header[i] for i in idx)
    if op == "rename":
        child, header = rand_spju_term(rng, schema, depth - 1)
        if not header:
            return child, header
        old = rng.choice(header).name
        taken = {c.name for c in header}
        new = ra.fresh_name(f"{old}_r", set(taken))
        new_header = tuple(ColumnSpec(new, c.attribute) if c.name == old else c
                           for c in header)
        return ra.Rename(child, old, new), new_header
    if op == "times":
        left, lh = rand_spju_term(rng, schema, depth - 1)
        right, rh = rand_spju_term(rng, schema, depth - 1)
        return ra.Times(left, right), ra.product_header(lh, rh)
    if op == "njoin":
        left, lh = rand_spju_term(rng, schema, depth - 1)
        right, rh = rand_spju_term(rng, schema, depth - 1)
        n = rng.randint(0, min(len(lh), len(rh), 2))
        lnames = rng.sample([c.name for c in lh], n)
        rnames = rng.sample([c.name for c in rh], n)
        pairs = tuple(zip(lnames, rnames))
        adjusted, mapping = ra.normalize_right_header(lh, rh)
        dropped = {mapping[rn] for _, rn in pairs}
        header = lh + tuple(c for c in adjusted if c.name not in dropped)
        return ra.NaturalJoin(left, right, pairs), header
    # union: bias toward compatible operands by reusing one subterm's shape
    left, lh = rand_spju_term(rng, schema, depth - 1)
    if rng.random() < 0.6:
        right, rh = ra.Select(left, rand_condition(rng, lh)), lh
    else:
        right, rh = rand_spju_term(rng, schema, depth - 1)
    if ra._alignment(lh, rh) is None:
        return ra.Union(left, right), ()
    return ra.Union(left, right), lh


def rand_full_term(rng: random.Random, schema: Schema, depth: int = 4
                   ) -> tuple[ra.AlgebraTerm, tuple[ColumnSpec, ...]]:
    """A random term over the full operator set (adds MINUS and EXTEND)."""
    if depth <= 0 or rng.random() < 0.2:
        return _rand_leaf(rng, schema)
    roll = rng.random()
    if roll < 0.25:
        left, lh = rand_full_term(rng, schema, depth - 1)
        if rng.random() < 0.6:
            right, rh = ra.Select(left, rand_condition(rng, lh)), lh
        else:
            right, rh = rand_full_term(rng, schema, depth - 1)
        header = lh if ra._alignment(lh, rh) is not None else ()
        return ra.Minus(left, right), header
    if roll < 0.45:
        child, header = rand_full_term(rng, schema, depth - 1)
        taken = {c.name for c in header}
        name = ra.fresh_name("x", set(taken))
        attr = rng.choice(ATTR_POOL) + "_x"
        if header and rng.random() < 0.5:
            expr = Col(rng.choice(header).name)
        else:
            expr = Const(rand_value(rng))
        return ra.Extend(child, attr, name, expr), header + (ColumnSpec(name, attr),)
    return rand_spju_term(rng, schema, depth)


# ---------------------------------------------------------------------------
# Federations, patterns, formulas, rules
# ---------------------------------------------------------------------------

def rand_federation(rng: random.Random, max_dbs: int = 3, max_relations: int = 3,
                    max_columns: int = 3, max_tuples: int = 4,
                    null_rate: float = 0.1, remark_star: bool = False) -> Federation:
    members = []
    for i in range(rng.randint(1, max_dbs)):
        schema = rand_schema(rng, f"db{i + 1}", max_relations, max_columns)
        instance = rand_instance(rng, schema, max_tuples, null_rate)
        if remark_star:
            instance = _ensure_used(rng, schema, instance)
        members.append(Member(schema, parse_instance(schema, instance)))
    return Federation(members)


def _ensure_used(rng: random.Random, schema: Schema,
                 instance: dict[str, Relation]) -> dict[str, Relation]:
    """Make every relation nonempty and give every column a non-NULL cell."""
    fixed = {}
    for sig in schema.relations:
        rows = set(instance[sig.name].rows)
        covered = [any(not row[i].is_null for row in rows) for i in range(sig.arity)]
        if not rows or not all(covered):
            rows.add(tuple(rand_value(rng) for _ in range(sig.arity)))
        fixed[sig.name] = Relation(sig.columns, frozenset(rows))
    return fixed


def rand_pattern(rng: random.Random, fed: Federation, k: int) -> Pattern:
    attrs, values = set(), set()
    for m in fed.members:
        for t in m.store.tuples:
            attrs.add(t.a_name)
            values.add(t.value)
    attrs = sorted(attrs) or ["alpha"]
    values = sorted(values, key=Value.sort_key) or [Value.text("a")]
    items = []
    for _ in range(k):
        attr = None
        value = None
        if rng.random() < 0.55:
            attr = rng.choice(attrs) if rng.random() < 0.85 else "missing-attr"
        if rng.random() < 0.55:
            value = rng.choice(values) if rng.random() < 0.85 else Value.text("missing!")
        items.append(PatternItem(attr, value))
    return Pattern(tuple(items))


def _fed_symbol_pools(fed: Federation):
    names = [m.name for m in fed.members]
    rels, tids, attrs, vals = set(), set(), set(), set()
    for m in fed.members:
        for t in m.store.tuples:
            rels.add(t.r_name)
            tids.add(t.t_index)
            attrs.add(t.a_name)
            vals.add(t.value)
    return (names, sorted(rels) or ["r0"], sorted(tids) or ["t0"],
            sorted(attrs) or ["a0"], sorted(vals, key=Value.sort_key) or [Value.text("v0")])


def rand_formula(rng: random.Random, fed: Federation, depth: int = 4,
                 max_vars: int = 3) -> sx.SLFormula:
    """A random closed SchemaLog formula over the federation's symbols."""
    var_names = [f"V{i + 1}" for i in range(max_vars)]
    names, rels, tids, attrs, vals = _fed_symbol_pools(fed)

    def term(pool, text: bool = True) -> sx.SLTerm:
        if rng.random() < 0.35:
            return sx.Var(rng.choice(var_names))
        choice = rng.choice(pool)
        if text:
            return sx.Sym(Value.text(choice))
        return sx.Sym(choice)

    def atom() -> sx.SLFormula:
        roll = rng.random()
        if roll < 0.40:
            return sx.Atom(sx.QuadAtom(term(names), term(rels), term(tids),
                                       term(attrs), term(vals, text=False)))
        if roll < 0.60:
            return sx.Atom(sx.AttrAtom(term(names), term(rels), term(attrs)))
        if roll < 0.75:
            return sx.Atom(sx.RelAtom(term(names), term(rels)))
        if roll < 0.90:
            return sx.Atom(sx.DbAtom(term(names)))
        return sx.Atom(sx.CmpAtom(term(vals, text=False), rng.choice(("=", "!=", "<")),
                                  term(vals, text=False)))

    def build(d: int) -> sx.SLFormula:
        if d <= 0 or rng.random() < 0.3:
            return atom()
        roll = rng.random()
        if roll < 0.2:
            return sx.Not(build(d - 1))
        if roll < 0.4:
            return sx.And(build(d - 1), build(d - 1))
        if roll < 0.6:
            return sx.Or(build(d - 1), build(d - 1))
        if roll < 0.7:
            return sx.Implies(build(d - 1), build(d - 1))
        var = rng.choice(var_names)
        inner = build(d - 1)
        return sx.Exists(var, inner) if rng.random() < 0.5 else sx.Forall(var, inner)

    f = build(depth)
    for v in sorted(sx.formula_free_vars(f)):
        f = sx.Exists(v, f) if rng.random() < 0.5 else sx.Forall(v, f)
    return f


def rand_rules(rng: random.Random, fed: Federation) -> tuple[sx.SLRule, ...]:
    """A small safe stratified program: 1-3 rules, 1-3 body literals each."""
    names, rels, tids, attrs, vals = _fed_symbol_pools(fed)

    def sym(pool, text=True):
        choice = rng.choice(pool)
        return sx.Sym(Value.text(choice) if text else choice)

    def positive(vars_out: list[str]) -> sx.SLAtom:
        def slot(pool, text=True):
            if rng.random() < 0.6:
                v = f"X{rng.randint(1, 4)}"
                vars_out.append(v)
                return sx.Var(v)
            return sym(pool, text)
        roll = rng.random()
        if roll < 0.5:
            return sx.QuadAtom(slot(names), slot(rels), slot(tids), slot(attrs),
                               slot(vals, text=False))
        if roll < 0.75:
            return sx.AttrAtom(slot(names), slot(rels), slot(attrs))
        if roll < 0.9:
            return sx.RelAtom(slot(names), slot(rels))
        return sx.DbAtom(slot(names))

    rules: list[sx.SLRule] = []
    n_rules = rng.randint(1, 3)
    for i in range(n_rules):
        bound: list[str] = []
        body: list[sx.Literal] = [sx.Literal(positive(bound)) for _ in range(rng.randint(1, 2))]
        if rules and rng.random() < 0.5:
            prev = rules[0]
            args = tuple(sx.Var(rng.choice(bound)) if bound and rng.random() < 0.7
                         else sym(vals, text=False) for _ in prev.head.args)
            body.append(sx.Literal(sx.PredAtom(prev.head.name, args),
                                   positive=rng.random() < 0.7))
        if bound and rng.random() < 0.4:
            v = rng.choice(bound)
            body.append(sx.Literal(sx.CmpAtom(sx.Var(v), rng.choice(("=", "!=", "<")),
                                              sym(vals, text=False)),
                                   positive=rng.random() < 0.8))
        if bound and rng.random() < 0.3:
            neg_vars: list[str] = []
            neg = positive(neg_vars)
            remap = {v: rng.choice(bound) for v in neg_vars}
            neg = _remap_atom(neg, remap)
            body.append(sx.Literal(neg, positive=False))
        head_vars = sorted(set(bound))[:rng.randint(1, 3)] if bound else []
        if head_vars:
            head = sx.PredAtom(f"p{i + 1}", tuple(sx.Var(v) for v in head_vars))
        else:
            head = sx.PredAtom(f"p{i + 1}", (sym(vals, text=False),))
        rules.append(sx.SLRule(head, tuple(body)))
    return tuple(rules)


def _remap_atom(atom, remap: dict[str, str]):
    def m(t):
        if isinstance(t, sx.Var):
            return sx.Var(remap.get(t.name, t.name))
        return t
    if isinstance(atom, sx.QuadAtom):
        return sx.QuadAtom(m(atom.db), m(atom.rel), m(atom.tid), m(atom.attr), m(atom.val))
    if isinstance(atom, sx.AttrAtom):
        return sx.AttrAtom(m(atom.db), m(atom.rel), m(atom.attr))
    if isinstance(atom, sx.RelAtom):
        return sx.RelAtom(m(atom.db), m(atom.rel))
    if isinstance(atom, sx.DbAtom):
        return sx.DbAtom(m(atom.db))
    raise TypeError(atom)
