"""Shredding a table into the vector store and rebuilding it.

Every tuple becomes one quadruple (r-name, t-index, a-name, value) per
non-NULL cell, all sharing a hash-derived tuple index.  Rebuilding fills
absent cells with NULL, so shred-then-rebuild is the identity, and
column changes are cheap: dropping a column deletes its quadruples,
adding one touches nothing.
"""

from _university import univ_a

from ivecdb import matter, check_canonical, vector_dml, evolve_schema, ColumnSpec
from ivecdb.vector import AddColumn, DropColumn

schema, instance, store = univ_a()
sig = schema.get("pay-info")

print("== the user table ==")
print(instance["pay-info"].pretty())

print(f"\n== its vector store: {len(store)} quadruples (4 tuples x 3 columns) ==")
print(store.as_relation().pretty())

print("\n== rebuilt from the store ==")
rebuilt = matter(sig, store)
print(rebuilt.pretty())
print("roundtrip identity:", rebuilt == instance["pay-info"])
print("canonical model:", check_canonical(schema, store, instance))

print("\n== schema flexibility ==")
wider = evolve_schema(schema, AddColumn("pay-info", ColumnSpec("bonus", "bonus")))
same_store = vector_dml(store, AddColumn("pay-info", ColumnSpec("bonus", "bonus")), schema)
print("added a column; store unchanged:", same_store.tuples == store.tuples)
print("rebuilt with the wider signature (new column is NULL):")
print(matter(wider.get("pay-info"), same_store).pretty())

narrower = vector_dml(store, DropColumn("pay-info", "dept"), schema)
print(f"\ndropped 'dept': {len(store)} -> {len(narrower)} quadruples")
