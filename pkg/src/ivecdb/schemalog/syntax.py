"""SchemaLog abstract syntax and the concrete grammar.

Atoms take the four bracket forms over databases, relations, tuple ids,
attributes, and values::

    db :: rel [ Tid : attr -> val ]      (a cell of one tuple)
    db :: rel [ attr ]                   (attribute presence)
    db :: rel                            (relation presence)
    db                                   (database presence)

Identifiers starting with an uppercase letter or underscore are
variables (quote a name to force a symbol, e.g. ``'CS'``); ``_`` alone is
a fresh anonymous variable.  Terms may nest functor applications such as
``Hash('Secretary','CS','35,000')``.  Rules are written head ``:-`` body
with comma-separated literals, ``not`` for negation, theta comparisons
as literals, and a terminating period.  ``%`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import SchemaLogParseError
from ..values import Value

# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Sym:
    value: Value


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class App:
    functor: str
    args: tuple["SLTerm", ...]


SLTerm = Sym | Var | App

HASH_FUNCTOR = "Hash"


def term_vars(t: SLTerm) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, App):
        out = set()
        for a in t.args:
            out |= term_vars(a)
        return out
    return set()


# ---------------------------------------------------------------------------
# Atoms, formulas, rules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadAtom:
    db: SLTerm
    rel: SLTerm
    tid: SLTerm
    attr: SLTerm
    val: SLTerm


@dataclass(frozen=True)
class AttrAtom:
    db: SLTerm
    rel: SLTerm
    attr: SLTerm


@dataclass(frozen=True)
class RelAtom:
    db: SLTerm
    rel: SLTerm


@dataclass(frozen=True)
class DbAtom:
    db: SLTerm


@dataclass(frozen=True)
class CmpAtom:
    """Theta comparison, a conservative extension of the atom forms."""
    lhs: SLTerm
    op: str
    rhs: SLTerm


@dataclass(frozen=True)
class PredAtom:
    """A derived-predicate atom, usable in rules only."""
    name: str
    args: tuple[SLTerm, ...]


SLAtom = QuadAtom | AttrAtom | RelAtom | DbAtom


def atom_terms(atom) -> tuple[SLTerm, ...]:
    if isinstance(atom, QuadAtom):
        return (atom.db, atom.rel, atom.tid, atom.attr, atom.val)
    if isinstance(atom, AttrAtom):
        return (atom.db, atom.rel, atom.attr)
    if isinstance(atom, RelAtom):
        return (atom.db, atom.rel)
    if isinstance(atom, DbAtom):
        return (atom.db,)
    if isinstance(atom, CmpAtom):
        return (atom.lhs, atom.rhs)
    if isinstance(atom, PredAtom):
        return atom.args
    raise TypeError(f"not an atom: {atom!r}")


@dataclass(frozen=True)
class Atom:
    atom: SLAtom | CmpAtom


@dataclass(frozen=True)
class Not:
    child: "SLFormula"


@dataclass(frozen=True)
class And:
    left: "SLFormula"
    right: "SLFormula"


@dataclass(frozen=True)
class Or:
    left: "SLFormula"
    right: "SLFormula"


@dataclass(frozen=True)
class Implies:
    """premise -> conclusion; a bare `-> conclusion` has no premise."""
    premise: "SLFormula | None"
    conclusion: "SLFormula"


@dataclass(frozen=True)
class Exists:
    var: str
    child: "SLFormula"


@dataclass(frozen=True)
class Forall:
    var: str
    child: "SLFormula"


SLFormula = Atom | Not | And | Or | Implies | Exists | Forall


def formula_free_vars(f: SLFormula, bound: frozenset[str] = frozenset()) -> set[str]:
    if isinstance(f, Atom):
        out = set()
        for t in atom_terms(f.atom):
            out |= term_vars(t)
        return out - bound
    if isinstance(f, Not):
        return formula_free_vars(f.child, bound)
    if isinstance(f, (And, Or)):
        return formula_free_vars(f.left, bound) | formula_free_vars(f.right, bound)
    if isinstance(f, Implies):
        out = formula_free_vars(f.conclusion, bound)
        if f.premise is not None:
            out |= formula_free_vars(f.premise, bound)
        return out
    if isinstance(f, (Exists, Forall)):
        return formula_free_vars(f.child, bound | {f.var})
    raise TypeError(f"not a formula: {f!r}")


@dataclass(frozen=True)
class Literal:
    atom: SLAtom | CmpAtom | PredAtom
    positive: bool = True


@dataclass(frozen=True)
class SLRule:
    head: PredAtom | SLAtom
    body: tuple[Literal, ...] = ()


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<WS>\s+)
  | (?P<COMMENT>%[^\n]*)
  | (?P<STRING>'(?:[^']|'')*')
  | (?P<NUMBER>-?\d+(?:\.\d+)?)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*)
  | (?P<PUNCT>::|:-|->|!=|<=|>=|[():,.\[\]=<>])
""", re.VERBOSE)

_KEYWORDS = {"not", "and", "or", "exists", "forall"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise SchemaLogParseError(f"unexpected character {text[i]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group(0)
        if kind not in ("WS", "COMMENT"):
            k = kind
            if kind == "IDENT" and chunk in _KEYWORDS:
                k = chunk.upper()
            tokens.append(Token(k, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        i = m.end()
    tokens.append(Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self._anon = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise SchemaLogParseError(f"expected {want!r}, found {tok.text!r}", tok.line, tok.col)
        return self.next()

    def error(self, message: str):
        tok = self.peek()
        raise SchemaLogParseError(message, tok.line, tok.col)

    # terms ----------------------------------------------------------------

    def fresh_anonymous(self) -> Var:
        self._anon += 1
        return Var(f"_G{self._anon}")

    def parse_term(self) -> SLTerm:
        tok = self.peek()
        if tok.kind == "STRING":
            self.next()
            return Sym(Value.text(tok.text[1:-1].replace("''", "'")))
        if tok.kind == "NUMBER":
            self.next()
            return Sym(Value.number(tok.text))
        if tok.kind == "IDENT":
            self.next()
            if self.peek().kind == "PUNCT" and self.peek().text == "(":
                self.next()
                args = [self.parse_term()]
                while self.peek().text == ",":
                    self.next()
                    args.append(self.parse_term())
                self.expect("PUNCT", ")")
                return App(tok.text, tuple(args))
            if tok.text == "_":
                return self.fresh_anonymous()
            if tok.text[0].isupper() or tok.text[0] == "_":
                return Var(tok.text)
            return Sym(Value.text(tok.text))
        self.error(f"expected a term, found {tok.text!r}")

    # atoms ----------------------------------------------------------------

    _CMP_OPS = {"=", "!=", "<", ">", "<=", ">="}

    def parse_atom(self, allow_pred: bool) -> SLAtom | CmpAtom | PredAtom:
        start = self.pos
        term = self.parse_term()
        tok = self.peek()
        if tok.kind == "PUNCT" and tok.text == "::":
            self.next()
            rel = self.parse_term()
            if self.peek().kind == "PUNCT" and self.peek().text == "[":
                self.next()
                first = self.parse_term()
                if self.peek().text == ":":
                    self.next()
                    attr = self.parse_term()
                    self.expect("PUNCT", "->")
                    val = self.parse_term()
                    self.expect("PUNCT", "]")
                    return QuadAtom(term, rel, first, attr, val)
                self.expect("PUNCT", "]")
                return AttrAtom(term, rel, first)
            return RelAtom(term, rel)
        if tok.kind == "PUNCT" and tok.text in self._CMP_OPS:
            self.next()
            rhs = self.parse_term()
            return CmpAtom(term, tok.text, rhs)
        if isinstance(term, App):
            if not allow_pred:
                self.pos = start
                self.error("derived predicates are not allowed in formulas")
            return PredAtom(term.functor, term.args)
        return DbAtom(term)

    # rules ------------------------------------------------------------------

    def parse_literal(self) -> Literal:
        if self.peek().kind == "NOT":
            self.next()
            return Literal(self.parse_atom(allow_pred=True), positive=False)
        return Literal(self.parse_atom(allow_pred=True), positive=True)

    def parse_rule(self) -> SLRule:
        head = self.parse_atom(allow_pred=True)
        if isinstance(head, CmpAtom):
            self.error("a comparison cannot head a rule")
        body: list[Literal] = []
        if self.peek().kind == "PUNCT" and self.peek().text == ":-":
            self.next()
            body.append(self.parse_literal())
            while self.peek().text == ",":
                self.next()
                body.append(self.parse_literal())
        self.expect("PUNCT", ".")
        return SLRule(head, tuple(body))

    def parse_program(self) -> tuple[SLRule, ...]:
        rules = []
        while self.peek().kind != "EOF":
            rules.append(self.parse_rule())
        return tuple(rules)

    # formulas ---------------------------------------------------------------

    def parse_formula(self) -> SLFormula:
        tok = self.peek()
        if tok.kind in ("EXISTS", "FORALL"):
            self.next()
            var = self.expect("IDENT")
            if not (var.text[0].isupper() or var.text[0] == "_"):
                raise SchemaLogParseError(f"{var.text!r} is not a variable", var.line, var.col)
            self.expect("PUNCT", ".")
            child = self.parse_formula()
            return Exists(var.text, child) if tok.kind == "EXISTS" else Forall(var.text, child)
        left = self._parse_disjunction()
        if self.peek().kind == "PUNCT" and self.peek().text == "->":
            self.next()
            return Implies(left, self.parse_formula())
        return left

    def _parse_disjunction(self) -> SLFormula:
        left = self._parse_conjunction()
        while self.peek().kind == "OR":
            self.next()
            left = Or(left, self._parse_conjunction())
        return left

    def _parse_conjunction(self) -> SLFormula:
        left = self._parse_unary()
        while self.peek().kind == "AND":
            self.next()
            left = And(left, self._parse_unary())
        return left

    def _parse_unary(self) -> SLFormula:
        tok = self.peek()
        if tok.kind == "NOT":
            self.next()
            return Not(self._parse_unary())
        if tok.kind in ("EXISTS", "FORALL"):
            return self.parse_formula()
        if tok.kind == "PUNCT" and tok.text == "(":
            self.next()
            inner = self.parse_formula()
            self.expect("PUNCT", ")")
            return inner
        if tok.kind == "PUNCT" and tok.text == "->":
            self.next()
            return Implies(None, self.parse_formula())
        return Atom(self.parse_atom(allow_pred=False))


def _collect_functor_arities(t: SLTerm, seen: dict[str, int]) -> None:
    if not isinstance(t, App):
        return
    if t.functor != HASH_FUNCTOR:  # the tuple hash takes any arity
        known = seen.setdefault(t.functor, len(t.args))
        if known != len(t.args):
            raise SchemaLogParseError(
                f"functor {t.functor!r} used with arities {known} and {len(t.args)}", 0, 0)
    for a in t.args:
        _collect_functor_arities(a, seen)


def _check_arities_in_rules(rules: tuple[SLRule, ...]) -> None:
    seen: dict[str, int] = {}
    for rule in rules:
        for t in sx_all_terms(rule):
            _collect_functor_arities(t, seen)


def sx_all_terms(rule: SLRule) -> list[SLTerm]:
    out = list(atom_terms(rule.head))
    for lit in rule.body:
        out.extend(atom_terms(lit.atom))
    return out


def parse_program(text: str) -> tuple[SLRule, ...]:
    """Parse a rule program; raises SchemaLogParseError with location."""
    rules = _Parser(text).parse_program()
    _check_arities_in_rules(rules)
    return rules


def parse_formula(text: str) -> SLFormula:
    """Parse a single closed or open formula."""
    parser = _Parser(text)
    formula = parser.parse_formula()
    tok = parser.peek()
    if tok.kind != "EOF":
        raise SchemaLogParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return formula
