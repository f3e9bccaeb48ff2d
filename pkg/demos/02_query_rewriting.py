"""Answering user queries from the vector store alone.

The user writes algebra over the declared schema; the engine rewrites
every base relation into its reconstruction from the single vector
relation and evaluates there.  The result is identical to evaluating
over the materialized tables, which never need to exist.
"""

from _university import univ_a

from ivecdb import answer, eval_term, parse_term, render_term, rewrite, type_of

schema, instance, store = univ_a()

queries = [
    "pay-info WHERE dept = CS",
    "pay-info[category]",
    "(pay-info WHERE \"avg-sal\" > '50,000')[category,avg-sal]",
    "pay-info WHERE dept = CS MINUS pay-info WHERE category = Secretary",
]

for text in queries:
    term = parse_term(text)
    from_store = answer(term, store, schema)
    direct = eval_term(term, instance)
    print(f"== {text} ==")
    print(from_store.pretty())
    print("matches direct evaluation:", from_store == direct)
    print()

term = parse_term("pay-info[dept]")
print("== what the engine actually runs for pay-info[dept] ==")
print(render_term(rewrite(term, schema)))
print("\ntyped-view provenance:", type_of(term, schema))
