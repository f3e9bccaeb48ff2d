from __future__ import annotations

import random

import pytest

from ivecdb import algebra as ra
from ivecdb.errors import SafetyError, SchemaLogParseError
from ivecdb.federation import Federation, Member
from ivecdb.relations import Relation, Schema, signature
from ivecdb.values import Value
from ivecdb.vector import hash_tuple, parse_instance
from ivecdb.schemalog import (FunctorTable, SLStructure, TarskiInterpretation,
                              active_domain, check_safety, compile_rules, encode,
                              eval_program, naive_eval, parse_formula, parse_program,
                              stratify, structure_eval, tarski_eval)
from ivecdb.schemalog import fol
from ivecdb.schemalog import syntax as sx

import gen
from conftest import rows_of

T = Value.text


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def test_parse_quad_atom():
    rule = parse_program("ans(X) :- univ_A::pay-info[X: category -> 'Secretary'].")[0]
    atom = rule.body[0].atom
    assert atom == sx.QuadAtom(sx.Sym(T("univ_A")), sx.Sym(T("pay-info")),
                               sx.Var("X"), sx.Sym(T("category")),
                               sx.Sym(T("Secretary")))


def test_parse_db_atom_form():
    f = parse_formula("univ_A")
    assert f == sx.Atom(sx.DbAtom(sx.Sym(T("univ_A"))))


def test_parse_two_rule_join_program():
    rules = parse_program("""
        % same value appears in both databases
        shared(V) :- univ_A::R1[T1: A1 -> V], univ_C::R2[T2: A2 -> V].
        named(V)  :- shared(V), not V = 'Prof'.
    """)
    assert len(rules) == 2
    assert rules[0].head == sx.PredAtom("shared", (sx.Var("V"),))
    assert rules[1].body[1] == sx.Literal(sx.CmpAtom(sx.Var("V"), "=", sx.Sym(T("Prof"))),
                                          positive=False)


def test_parse_uppercase_needs_quoting_for_symbols():
    rule = parse_program("ans(X) :- univ_C::'CS'[X].")[0]
    assert rule.body[0].atom.rel == sx.Sym(T("CS"))


def test_parse_anonymous_variables_are_fresh():
    rule = parse_program("ans(D) :- D::_[_: _ -> _].")[0]
    atom = rule.body[0].atom
    names = {t.name for t in (atom.rel, atom.tid, atom.attr, atom.val)}
    assert len(names) == 4


def test_parse_error_location():
    with pytest.raises(SchemaLogParseError) as err:
        parse_program("ans(X) :- univ_A::[x].")
    assert err.value.line == 1


def test_parse_functor_arity_must_be_consistent():
    with pytest.raises(SchemaLogParseError):
        parse_program("p(X) :- X::r, q(f(a), f(a, b)).")


def test_hash_functor_arity_is_flexible():
    parse_program("p(X) :- X::r[Hash(a): b -> c], X::s[Hash(a, b): c -> d].")


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

def test_encode_attr_atom_rule():
    f = parse_formula("univ_A::pay-info[category]")
    encoded = encode(f)
    assert encoded == fol.FExists("x2", fol.FExists("x4", fol.FVector(
        fol.FConst(T("univ_A")),
        (fol.FConst(T("pay-info")), fol.FVar("x2"),
         fol.FConst(T("category")), fol.FVar("x4")))))


def test_encode_db_atom_is_call1():
    assert encode(parse_formula("univ_C")) == fol.FCall1(fol.FConst(T("univ_C")))


def test_encode_conjunction_is_homomorphic():
    f = parse_formula("univ_A and univ_C")
    encoded = encode(f)
    assert encoded == fol.FAnd(fol.FCall1(fol.FConst(T("univ_A"))),
                               fol.FCall1(fol.FConst(T("univ_C"))))


def test_encode_rel_atom_closes_three_positions():
    encoded = encode(parse_formula("d::r"))
    assert isinstance(encoded, fol.FExists)
    assert isinstance(encoded.child, fol.FExists)
    assert isinstance(encoded.child.child, fol.FExists)


def test_encode_implication_verbatim_shape():
    f = parse_formula("univ_A -> univ_C")
    encoded = encode(f)
    prem = fol.FCall1(fol.FConst(T("univ_A")))
    conc = fol.FCall1(fol.FConst(T("univ_C")))
    assert encoded == fol.FOr(fol.FNot(prem), fol.FAnd(prem, conc))


def test_encode_fresh_variables_avoid_capture():
    f = sx.Atom(sx.AttrAtom(sx.Var("x2"), sx.Sym(T("r")), sx.Var("x4")))
    encoded = encode(f)
    bound = {encoded.var, encoded.child.var}
    assert bound.isdisjoint({"x2", "x4"})


def test_encoded_implication_equals_material_implication():
    rng = random.Random(9)
    for _ in range(25):
        fed = gen.rand_federation(rng, max_dbs=2, max_relations=2,
                                  max_columns=2, max_tuples=2)
        interp = TarskiInterpretation.from_federation(fed)
        domain = active_domain(fed)
        premise = gen.rand_formula(rng, fed, depth=2)
        conclusion = gen.rand_formula(rng, fed, depth=2)
        verbatim = encode(sx.Implies(premise, conclusion))
        material = fol.FOr(fol.FNot(encode(premise)), encode(conclusion))
        assert tarski_eval(verbatim, interp, {}, domain) == \
            tarski_eval(material, interp, {}, domain)


# ---------------------------------------------------------------------------
# Structure satisfaction
# ---------------------------------------------------------------------------

def test_structure_golden_cell_atom(university_fed):
    id1 = hash_tuple((T("Secretary"), T("CS"), T("35,000")))
    f = parse_formula(f"univ_A::pay-info['{id1}': category -> 'Secretary']")
    assert structure_eval(f, university_fed)
    assert not structure_eval(parse_formula(
        f"univ_A::pay-info['{id1}': category -> 'Prof']"), university_fed)


def test_structure_negation_is_classical():
    rng = random.Random(10)
    for _ in range(25):
        fed = gen.rand_federation(rng, max_dbs=2, max_relations=2,
                                  max_columns=2, max_tuples=2)
        f = gen.rand_formula(rng, fed, depth=2)
        assert structure_eval(sx.Not(f), fed) == (not structure_eval(f, fed))


def test_structure_hash_condition(university_fed):
    f = parse_formula(
        "univ_A::pay-info[Hash('Secretary','CS','35,000'): 'avg-sal' -> '35,000']")
    assert structure_eval(f, university_fed)


def test_structure_quantifiers(university_fed):
    assert structure_eval(parse_formula("exists X. X::'ece'"), university_fed)
    assert not structure_eval(parse_formula("forall X. X::'ece'"), university_fed)


def test_encoding_soundness_golden_formulas(university_fed):
    interp = TarskiInterpretation.from_federation(university_fed)
    domain = active_domain(university_fed)
    for text in (
        "univ_A", "nowhere", "univ_C::'ece'", "univ_C::'ece'[category]",
        "univ_A::pay-info[Hash('Secretary','CS','35,000'): dept -> 'CS']",
        "exists X. univ_C::X['avg-sal']",
        "univ_A and not univ_B::'CS'",
        "univ_B -> univ_B::pay-info['Math']",
    ):
        f = parse_formula(text)
        assert structure_eval(f, university_fed) == \
            tarski_eval(encode(f), interp, {}, domain)


def test_encoding_soundness_random_federations():
    rng = random.Random(13)
    for _ in range(25):
        fed = gen.rand_federation(rng, max_dbs=2, max_relations=2,
                                  max_columns=2, max_tuples=3)
        interp = TarskiInterpretation.from_federation(fed)
        domain = active_domain(fed)
        for _ in range(4):
            f = gen.rand_formula(rng, fed, depth=3)
            assert structure_eval(f, fed) == tarski_eval(encode(f), interp, {}, domain)


# ---------------------------------------------------------------------------
# Safety and stratification
# ---------------------------------------------------------------------------

def _rules(text: str):
    return parse_program(text)


def test_safety_accepts_bound_rules():
    check_safety(_rules("p(X, Y) :- D::R[X: A -> Y], not D::'ghost', Y != 'x'."))


def test_safety_rejects_unbound_head_variable():
    with pytest.raises(SafetyError):
        check_safety(_rules("p(X, Z) :- D::R[X: A -> Y]."))


def test_safety_rejects_unbound_negated_variable():
    with pytest.raises(SafetyError):
        check_safety(_rules("p(X) :- univ_A::r[X: a -> v], not univ_A::Z."))


def test_safety_rejects_unbound_comparison_variable():
    with pytest.raises(SafetyError):
        check_safety(_rules("p(X) :- univ_A::r[X: a -> v], Z < 'q'."))


def test_safety_rejects_nonground_functor():
    with pytest.raises(SafetyError):
        check_safety(_rules("p(X) :- univ_A::r[Hash(X): a -> v]."))


def test_safety_rejects_head_atom_forms():
    with pytest.raises(SafetyError):
        check_safety(_rules("univ_A::r :- univ_A."))


def test_safety_rejects_arity_clash():
    with pytest.raises(SafetyError):
        check_safety(_rules("p(X) :- univ_A::R1[X: a -> v].\np(X, Y) :- univ_A::R1[X: Y -> v]."))


def test_stratify_rejects_recursion():
    with pytest.raises(SafetyError):
        stratify(_rules("p(X) :- q(X).\nq(X) :- p(X)."))


def test_stratify_rejects_undefined_predicates():
    with pytest.raises(SafetyError):
        stratify(_rules("p(X) :- q(X)."))


# ---------------------------------------------------------------------------
# Compilation
# ---------------------------------------------------------------------------

def test_compile_q4_matches_find_token(university_fed):
    from ivecdb.federation import find_token
    rules = _rules("ans(D, R) :- D::R[T1: A -> 'Secretary'].")
    out = eval_program(rules, university_fed, "ans")
    assert out.rows == find_token(university_fed, T("Secretary")).rows
    assert out.column_names() == ("D", "R")


def test_compile_unsatisfiable_comparison_gives_empty(university_fed):
    rules = _rules("ans(D) :- D::R, 1 = 2.")
    assert eval_program(rules, university_fed, "ans").rows == frozenset()


def test_compile_two_atom_join_matches_hand_computation(university_fed):
    rules = _rules("""
        j(C1, C2) :- univ_A::pay-info[T1: 'avg-sal' -> V],
                     univ_C::'ece'[T2: 'avg-sal' -> V],
                     univ_A::pay-info[T1: category -> C1],
                     univ_C::'ece'[T2: category -> C2].
    """)
    out = eval_program(rules, university_fed, "j")
    # the only salary value shared between pay-info and ece is 70,000
    assert rows_of(out) == [("Prof", "Prof")]


def test_compile_ground_guard_rules(university_fed):
    assert rows_of(eval_program(_rules("flag('yes') :- univ_A."),
                                university_fed, "flag")) == [("yes",)]
    assert eval_program(_rules("flag('yes') :- nowhere."),
                        university_fed, "flag").rows == frozenset()


def test_compile_negated_ground_literal(university_fed):
    out = eval_program(_rules("missing(D) :- D, not D::'CS'."), university_fed, "missing")
    assert rows_of(out) == [("univ_A",), ("univ_B",)]


def test_compile_hash_functor_constant(university_fed):
    rules = _rules(
        "sal(V) :- univ_A::pay-info[Hash('Secretary','CS','35,000'): 'avg-sal' -> V].")
    assert rows_of(eval_program(rules, university_fed, "sal")) == [("35,000",)]


def test_compiled_terms_reference_member_stores_only(university_fed):
    rules = _rules("p(D, R) :- D::R. q(R) :- p('univ_C', R), not p('univ_A', R).")
    compiled = compile_rules(rules, university_fed)
    member_names = {m.name for m in university_fed.members}
    for term in compiled.values():
        assert ra.base_names(term) <= member_names
    out = ra.eval_term(compiled["q"], university_fed.instance())
    assert rows_of(out) == [("CS",), ("ece",)]


def test_compile_matches_naive_oracle_randomized():
    rng = random.Random(14)
    checked = 0
    for _ in range(100):
        fed = gen.rand_federation(rng, max_dbs=2, max_relations=2, max_tuples=3)
        rules = gen.rand_rules(rng, fed)
        try:
            check_safety(rules)
        except SafetyError:
            continue
        compiled = compile_rules(rules, fed)
        oracle = naive_eval(rules, fed)
        for pred, term in compiled.items():
            assert ra.eval_term(term, fed.instance()).rows == oracle[pred]
        checked += 1
    assert checked >= 80
