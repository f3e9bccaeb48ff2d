"""Selection conditions: theta atoms, connectives, and the semijoin atom.

Atoms compare a column against another column or a constant with one of
the six theta operators; NULL operands make any theta atom false and the
connectives stay classical on top.  The IN atom tests membership of a
column tuple in a parameter relation (set membership, so NULL matches
NULL there) and is what the federation layer uses for semijoins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import ConditionError
from .relations import ColumnSpec, Relation
from .values import Value, theta_compare

THETA_OPS = ("=", "!=", "<", ">", "<=", ">=")


@dataclass(frozen=True)
class Col:
    """Explicit column reference; must resolve against the header."""
    name: str


@dataclass(frozen=True)
class Const:
    value: Value


@dataclass(frozen=True)
class Name:
    """A bare name from the textual syntax: a column when the header has
    one of that name, otherwise a text constant."""
    name: str


Operand = Union[Col, Const, Name]


@dataclass(frozen=True)
class Compare:
    lhs: Operand
    op: str
    rhs: Operand

    def __post_init__(self):
        if self.op not in THETA_OPS:
            raise ConditionError(f"unknown comparison operator {self.op!r}")


@dataclass(frozen=True)
class InRelation:
    """Semijoin atom: the tuple of named columns is a row of `param`."""
    columns: tuple[str, ...]
    param: Relation


@dataclass(frozen=True)
class TrueCond:
    """The tautology condition (used for blank pattern items)."""


@dataclass(frozen=True)
class And:
    left: "Condition"
    right: "Condition"


@dataclass(frozen=True)
class Or:
    left: "Condition"
    right: "Condition"


@dataclass(frozen=True)
class Not:
    child: "Condition"


Condition = Union[Compare, InRelation, TrueCond, And, Or, Not]


def conjoin(conds: list[Condition]) -> Condition:
    """Left-nested conjunction; the empty conjunction is TRUE."""
    if not conds:
        return TrueCond()
    out = conds[0]
    for c in conds[1:]:
        out = And(out, c)
    return out


def _resolve(op: Operand, header: tuple[ColumnSpec, ...]) -> tuple[str, int | Value]:
    """Return ("col", index) or ("const", value) for an operand."""
    names = [c.name for c in header]
    if isinstance(op, Col):
        if op.name not in names:
            raise ConditionError(f"unknown column {op.name!r} in condition")
        return ("col", names.index(op.name))
    if isinstance(op, Const):
        return ("const", op.value)
    if isinstance(op, Name):
        if op.name in names:
            return ("col", names.index(op.name))
        return ("const", Value.text(op.name))
    raise ConditionError(f"bad condition operand: {op!r}")


def validate(cond: Condition, header: tuple[ColumnSpec, ...]) -> None:
    """Check all explicit column references resolve; raise ConditionError."""
    if isinstance(cond, Compare):
        _resolve(cond.lhs, header)
        _resolve(cond.rhs, header)
    elif isinstance(cond, InRelation):
        names = [c.name for c in header]
        for n in cond.columns:
            if n not in names:
                raise ConditionError(f"unknown column {n!r} in IN atom")
        if len(cond.columns) != cond.param.arity:
            raise ConditionError(
                f"IN atom arity mismatch: {len(cond.columns)} columns vs "
                f"parameter relation of arity {cond.param.arity}")
    elif isinstance(cond, (And, Or)):
        validate(cond.left, header)
        validate(cond.right, header)
    elif isinstance(cond, Not):
        validate(cond.child, header)
    elif isinstance(cond, TrueCond):
        pass
    else:
        raise ConditionError(f"bad condition node: {cond!r}")


def evaluate(cond: Condition, header: tuple[ColumnSpec, ...], row: tuple[Value, ...]) -> bool:
    if isinstance(cond, Compare):
        kind_l, l = _resolve(cond.lhs, header)
        kind_r, r = _resolve(cond.rhs, header)
        lv = row[l] if kind_l == "col" else l
        rv = row[r] if kind_r == "col" else r
        return theta_compare(lv, cond.op, rv)
    if isinstance(cond, InRelation):
        names = [c.name for c in header]
        key = tuple(row[names.index(n)] for n in cond.columns)
        return key in cond.param.rows
    if isinstance(cond, TrueCond):
        return True
    if isinstance(cond, And):
        return evaluate(cond.left, header, row) and evaluate(cond.right, header, row)
    if isinstance(cond, Or):
        return evaluate(cond.left, header, row) or evaluate(cond.right, header, row)
    if isinstance(cond, Not):
        return not evaluate(cond.child, header, row)
    raise ConditionError(f"bad condition node: {cond!r}")


import re as _re

_PLAIN_NAME = _re.compile(r"[A-Za-z_][A-Za-z0-9_]*(-[A-Za-z0-9_]+)*")


def quote_name(name: str) -> str:
    """Quote a column or relation name for the textual syntax if needed."""
    if _PLAIN_NAME.fullmatch(name):
        return name
    return '"' + name.replace('"', '""') + '"'


def _operand_text(op: Operand) -> str:
    if isinstance(op, Col):
        return quote_name(op.name)
    if isinstance(op, Name):
        return op.name
    v = op.value
    if v.is_null:
        return "NULL"
    if v.kind == "number":
        return v.render()
    return "'" + v.payload.replace("'", "''") + "'"


def render(cond: Condition) -> str:
    """Textual form of a condition, parseable back where the grammar allows."""
    if isinstance(cond, Compare):
        return f"{_operand_text(cond.lhs)} {cond.op} {_operand_text(cond.rhs)}"
    if isinstance(cond, InRelation):
        cols = ",".join(cond.columns)
        return f"({cols}) IN <relation:{len(cond.param.rows)} rows>"
    if isinstance(cond, TrueCond):
        return "TRUE"
    if isinstance(cond, And):
        return f"({render(cond.left)} AND {render(cond.right)})"
    if isinstance(cond, Or):
        return f"({render(cond.left)} OR {render(cond.right)})"
    if isinstance(cond, Not):
        return f"NOT ({render(cond.child)})"
    raise ConditionError(f"bad condition node: {cond!r}")
