"""Textual algebra syntax, one term per line.

Grammar (keywords are uppercase; binding from loosest to tightest)::

    term    := times (("UNION" | "MINUS") times)*
    times   := postfix ("TIMES" postfix)*
    postfix := primary ( "[" name ("," name)* "]"
                       | "WHERE" condition
                       | "RENAME" name "AS" name )*
    primary := "(" term ")" | "EMPTY"
             | "EXTEND" postfix "ADD" name "," name "AS" operand
             | name

    condition := conj ("OR" conj)*
    conj      := unary ("AND" unary)*
    unary     := "NOT" unary | "(" condition ")" | "TRUE"
               | operand op operand          with op in = != < > <= >=

Names are identifiers (hyphens allowed inside, e.g. ``pay-info``) or
double-quoted.  In conditions a bare name is the column of that name
when the input has one, otherwise a text constant, so ``dept = CS``
filters on the constant ``CS``; single-quoted operands are always text
constants, double-quoted ones always columns, numbers are numbers.
Parse errors carry line and column.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import algebra as ra
from . import conditions as cond
from .conditions import Col, Const, Name
from .errors import ParseSyntaxError
from .values import Value

_KEYWORDS = {"RENAME", "AS", "TIMES", "WHERE", "UNION", "MINUS", "EXTEND",
             "ADD", "AND", "OR", "NOT", "TRUE", "EMPTY", "NULL"}

_TOKEN_RE = re.compile(r"""
    (?P<WS>[ \t]+)
  | (?P<NEWLINE>\n)
  | (?P<STRING>'(?:[^']|'')*')
  | (?P<QNAME>"(?:[^"]|"")*")
  | (?P<NUMBER>-?\d+(?:\.\d+)?)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*)
  | (?P<PUNCT>!=|<=|>=|[()\[\],=<>])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    tokens = []
    line, col, i = 1, 1, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseSyntaxError(f"unexpected character {text[i]!r}", line, col)
        kind, chunk = m.lastgroup, m.group(0)
        if kind == "NEWLINE":
            line += 1
            col = 1
            i = m.end()
            continue
        if kind != "WS":
            if kind == "IDENT" and chunk in _KEYWORDS:
                kind = chunk
            tokens.append(_Tok(kind, chunk, line, col))
        col += len(chunk)
        i = m.end()
    tokens.append(_Tok("EOF", "", line, col))
    return tokens


class _TermParser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Tok:
        return self.tokens[self.pos]

    def next(self) -> _Tok:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Tok:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseSyntaxError(f"expected {kind}, found {tok.text or 'end of input'!r}",
                                   tok.line, tok.col)
        return self.next()

    def error(self, msg: str):
        tok = self.peek()
        raise ParseSyntaxError(msg, tok.line, tok.col)

    def parse_name(self) -> str:
        tok = self.peek()
        if tok.kind == "IDENT":
            return self.next().text
        if tok.kind == "QNAME":
            return self.next().text[1:-1].replace('""', '"')
        self.error(f"expected a name, found {tok.text or 'end of input'!r}")

    # operands --------------------------------------------------------------

    def parse_operand(self) -> cond.Operand:
        tok = self.peek()
        if tok.kind == "STRING":
            self.next()
            return Const(Value.text(tok.text[1:-1].replace("''", "'")))
        if tok.kind == "NUMBER":
            self.next()
            return Const(Value.number(tok.text))
        if tok.kind == "QNAME":
            return Col(self.parse_name())
        if tok.kind == "NULL":
            self.next()
            return Const(Value.null())
        if tok.kind == "IDENT":
            return Name(self.next().text)
        self.error(f"expected a value or column, found {tok.text or 'end of input'!r}")

    # conditions --------------------------------------------------------------

    _OPS = {"=", "!=", "<", ">", "<=", ">="}

    def parse_condition(self) -> cond.Condition:
        left = self._parse_conj()
        while self.peek().kind == "OR":
            self.next()
            left = cond.Or(left, self._parse_conj())
        return left

    def _parse_conj(self) -> cond.Condition:
        left = self._parse_unary_cond()
        while self.peek().kind == "AND":
            self.next()
            left = cond.And(left, self._parse_unary_cond())
        return left

    def _parse_unary_cond(self) -> cond.Condition:
        tok = self.peek()
        if tok.kind == "NOT":
            self.next()
            return cond.Not(self._parse_unary_cond())
        if tok.kind == "TRUE":
            self.next()
            return cond.TrueCond()
        if tok.kind == "PUNCT" and tok.text == "(":
            self.next()
            inner = self.parse_condition()
            closing = self.peek()
            if closing.kind != "PUNCT" or closing.text != ")":
                self.error("expected ')'")
            self.next()
            return inner
        lhs = self.parse_operand()
        op = self.peek()
        if op.kind != "PUNCT" or op.text not in self._OPS:
            self.error(f"expected a comparison operator, found {op.text!r}")
        self.next()
        rhs = self.parse_operand()
        return cond.Compare(lhs, op.text, rhs)

    # terms ---------------------------------------------------------------------

    def parse_term(self) -> ra.AlgebraTerm:
        left = self.parse_times()
        while self.peek().kind in ("UNION", "MINUS"):
            op = self.next().kind
            right = self.parse_times()
            left = ra.Union(left, right) if op == "UNION" else ra.Minus(left, right)
        return left

    def parse_times(self) -> ra.AlgebraTerm:
        left = self.parse_postfix()
        while self.peek().kind == "TIMES":
            self.next()
            left = ra.Times(left, self.parse_postfix())
        return left

    def parse_postfix(self) -> ra.AlgebraTerm:
        term = self.parse_primary()
        while True:
            tok = self.peek()
            if tok.kind == "PUNCT" and tok.text == "[":
                self.next()
                names = [self.parse_name()]
                while self.peek().text == ",":
                    self.next()
                    names.append(self.parse_name())
                closing = self.peek()
                if closing.kind != "PUNCT" or closing.text != "]":
                    self.error("expected ']'")
                self.next()
                term = ra.Project(term, tuple(names))
            elif tok.kind == "WHERE":
                self.next()
                term = ra.Select(term, self.parse_condition())
            elif tok.kind == "RENAME":
                self.next()
                old = self.parse_name()
                self.expect("AS")
                new = self.parse_name()
                term = ra.Rename(term, old, new)
            else:
                return term

    def parse_primary(self) -> ra.AlgebraTerm:
        tok = self.peek()
        if tok.kind == "PUNCT" and tok.text == "(":
            self.next()
            inner = self.parse_term()
            closing = self.peek()
            if closing.kind != "PUNCT" or closing.text != ")":
                self.error("expected ')'")
            self.next()
            return inner
        if tok.kind == "EMPTY":
            self.next()
            return ra.EmptyTuple()
        if tok.kind == "EXTEND":
            self.next()
            child = self.parse_postfix()
            self.expect("ADD")
            attribute = self.parse_name()
            comma = self.peek()
            if comma.kind != "PUNCT" or comma.text != ",":
                self.error("expected ',' between attribute and column name")
            self.next()
            name = self.parse_name()
            self.expect("AS")
            expr = self.parse_operand()
            return ra.Extend(child, attribute, name, expr)
        if tok.kind in ("IDENT", "QNAME"):
            return ra.Base(self.parse_name())
        self.error(f"expected a term, found {tok.text or 'end of input'!r}")


def parse_term(text: str) -> ra.AlgebraTerm:
    """Parse a single algebra term; raises ParseSyntaxError with location."""
    parser = _TermParser(text)
    term = parser.parse_term()
    tok = parser.peek()
    if tok.kind != "EOF":
        raise ParseSyntaxError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return term


def parse_script(text: str) -> list[ra.AlgebraTerm]:
    """Parse a script: one term per line, blank and #-comment lines skipped."""
    terms = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parser = _TermParser(line)
        try:
            term = parser.parse_term()
            tok = parser.peek()
            if tok.kind != "EOF":
                raise ParseSyntaxError(f"trailing input {tok.text!r}", tok.line, tok.col)
        except ParseSyntaxError as exc:
            raise ParseSyntaxError(str(exc).rsplit(" (line", 1)[0], lineno, exc.column) from None
        terms.append(term)
    return terms
