"""The SchemaLog rule front end, compiled to plain algebra.

Rules range variables over database names, relation names, attributes,
tuple ids, and values alike.  Safe non-recursive programs compile to
algebra terms over the member vector stores; a substitution-enumeration
evaluator provides the ground truth, and a brute-force structure checker
evaluates single formulas against the federation.
"""

from _university import federation

from ivecdb import eval_term, render_term
from ivecdb.schemalog import (compile_rules, eval_program, naive_eval, parse_formula,
                              parse_program, structure_eval)

fed = federation()

program = """
% relations in which somebody earns 70,000
rich(D, R) :- D::R[Tid: A -> '70,000'].

% departments of univ_A that pay a category more than univ_C's ece does
better(Dept, Cat) :- univ_A::pay-info[T1: dept -> Dept],
                     univ_A::pay-info[T1: category -> Cat],
                     univ_A::pay-info[T1: 'avg-sal' -> V1],
                     univ_C::'ece'[T2: category -> Cat],
                     univ_C::'ece'[T2: 'avg-sal' -> V2],
                     V2 < V1.
"""

rules = parse_program(program)

for predicate in ("rich", "better"):
    result = eval_program(rules, fed, predicate)
    print(f"== {predicate} ==")
    print(result.pretty())
    oracle = naive_eval(rules, fed)[predicate]
    print("matches the naive evaluator:", result.rows == oracle)
    print()

print("== the compiled algebra for rich (references only vector stores) ==")
print(render_term(compile_rules(rules, fed)["rich"])[:300], "...")

print("\n== single formulas against the federation structure ==")
for text in (
    "exists D. exists R. D::R['avg-sal']",
    "univ_A::pay-info[Hash('Secretary','CS','35,000'): 'avg-sal' -> '35,000']",
    "forall D. D::'ece'",
):
    print(f"  {text}  ->  {structure_eval(parse_formula(text), fed)}")
