"""SchemaLog querying front-end: parsing, encoding, compilation, evaluation."""

from .syntax import (App, AttrAtom, CmpAtom, DbAtom, Literal, PredAtom, QuadAtom,
                     RelAtom, SLRule, Sym, Var, parse_formula, parse_program)
from .syntax import Atom, And, Or, Not, Implies, Exists, Forall
from .fol import FunctorTable, TarskiInterpretation, encode, render_fol, tarski_eval
from .structure import SLStructure, active_domain, structure_eval
from .compile import check_safety, compile_rules, eval_program, naive_eval, stratify

__all__ = [
    "Sym", "Var", "App", "QuadAtom", "AttrAtom", "RelAtom", "DbAtom", "CmpAtom",
    "PredAtom", "Literal", "SLRule", "Atom", "And", "Or", "Not", "Implies",
    "Exists", "Forall", "parse_program", "parse_formula",
    "encode", "render_fol", "tarski_eval", "TarskiInterpretation", "FunctorTable",
    "SLStructure", "active_domain", "structure_eval",
    "check_safety", "stratify", "compile_rules", "naive_eval", "eval_program",
]
