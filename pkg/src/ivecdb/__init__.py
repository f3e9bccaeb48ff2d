"""ivecdb: a vector-relational database engine.

User-defined relational databases are shredded into a single four-column
key/value relation; queries over the user schema are rewritten into
queries over that store, and federations of such stores answer metadata
queries (database, relation, and attribute names) with the same algebra,
including a SchemaLog rule front end compiled to it.
"""

from .values import Value, NULL_VALUE
from .relations import ColumnSpec, Relation, RelationSignature, Schema, relation, signature
from .algebra import (AlgebraTerm, Base, Delete, EmptyTuple, Extend, Insert, Minus,
                      NaturalJoin, Project, Rename, Select, SingleTuple, Times, Union,
                      Update, desugar_update, eval_term, render_term, union_compatible)
from .algebra_parser import parse_script, parse_term
from .vector import (VectorRelation, VectorTuple, check_canonical, evolve_schema,
                     full_view_type, hash_tuple, matter, parse_instance, parse_tuple,
                     vector_dml, view)
from .rewriter import answer, is_spju, rewrite, type_of
from .federation import (Federation, Member, Pattern, PatternItem, era_alpha, era_delta,
                         era_gamma, era_rho, find_token, gamma_oracle,
                         natural_join_unknown, parse_pattern)

__all__ = [
    "Value", "NULL_VALUE", "ColumnSpec", "Relation", "RelationSignature", "Schema",
    "relation", "signature",
    "AlgebraTerm", "Base", "EmptyTuple", "Rename", "Times", "Project", "Select",
    "Union", "Minus", "NaturalJoin", "Extend", "SingleTuple",
    "Delete", "Insert", "Update", "desugar_update", "eval_term", "render_term",
    "union_compatible", "parse_term", "parse_script",
    "VectorRelation", "VectorTuple", "hash_tuple", "parse_tuple", "parse_instance",
    "matter", "view", "full_view_type", "check_canonical", "vector_dml", "evolve_schema",
    "answer", "rewrite", "type_of", "is_spju",
    "Federation", "Member", "Pattern", "PatternItem", "parse_pattern",
    "era_delta", "era_rho", "era_alpha", "era_gamma", "gamma_oracle",
    "find_token", "natural_join_unknown",
]

__version__ = "0.1.0"
