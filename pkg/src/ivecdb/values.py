"""Scalar values: text, exact decimal numbers, and NULL.

Every cell of every relation holds a :class:`Value`.  Numbers are exact
decimals with a canonical textual rendering (no exponent, no leading zeros,
no trailing fractional zeros) that is used for hashing and file output.
Comparison atoms involving NULL are always false; NULL still equals NULL
for set membership and deduplication.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, InvalidOperation

TEXT = "text"
NUMBER = "number"
NULL = "null"

_KIND_RANK = {NULL: 0, NUMBER: 1, TEXT: 2}


def canonical_number_str(d: Decimal) -> str:
    """Render a decimal in canonical fixed-point form."""
    if d == 0:
        return "0"
    return format(d.normalize(), "f")


@dataclass(frozen=True)
class Value:
    """A tagged scalar. Use the `text`, `number`, and `null` constructors."""

    kind: str
    payload: str | Decimal | None = None

    @staticmethod
    def text(s: str) -> "Value":
        return Value(TEXT, s)

    @staticmethod
    def number(x: int | str | Decimal) -> "Value":
        try:
            d = Decimal(str(x))
        except InvalidOperation as exc:
            raise ValueError(f"not a decimal number: {x!r}") from exc
        # store the canonical form so that equal numbers hash equally
        return Value(NUMBER, Decimal(canonical_number_str(d)))

    @staticmethod
    def null() -> "Value":
        return NULL_VALUE

    @property
    def is_null(self) -> bool:
        return self.kind == NULL

    def render(self) -> str:
        """Canonical textual rendering used for hashing and file output."""
        if self.kind == NULL:
            raise ValueError("NULL has no canonical rendering")
        if self.kind == NUMBER:
            return canonical_number_str(self.payload)
        return self.payload

    def sort_key(self) -> tuple:
        """Deterministic total order: NULL < numbers < texts."""
        if self.kind == NULL:
            return (0,)
        if self.kind == NUMBER:
            return (1, self.payload)
        return (2, self.payload)

    def __repr__(self) -> str:
        if self.kind == NULL:
            return "NULL"
        if self.kind == NUMBER:
            return canonical_number_str(self.payload)
        return repr(self.payload)


NULL_VALUE = Value(NULL, None)

_THETA_OPS = ("=", "!=", "<", ">", "<=", ">=")


def theta_compare(a: Value, op: str, b: Value) -> bool:
    """Evaluate a theta comparison atom.

    Any atom with a NULL operand is false.  Equality requires matching
    kinds; ordering across kinds follows the fixed rank numbers < texts.
    """
    if op not in _THETA_OPS:
        raise ValueError(f"unknown comparison operator {op!r}")
    if a.is_null or b.is_null:
        return False
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    ka, kb = a.sort_key(), b.sort_key()
    if op == "<":
        return ka < kb
    if op == ">":
        return ka > kb
    if op == "<=":
        return ka <= kb
    return ka >= kb


def infer_value(text: str) -> Value:
    """Type a raw field: a number when the text is a canonical decimal.

    The rule is round-trip based: the field becomes a number exactly when
    re-rendering the parsed decimal reproduces the input, so loading and
    re-saving a store is byte-identical ("007" and "1e3" stay text).
    An empty field denotes NULL.
    """
    if text == "":
        return NULL_VALUE
    try:
        d = Decimal(text)
    except InvalidOperation:
        return Value.text(text)
    if canonical_number_str(d) == text:
        return Value.number(d)
    return Value.text(text)
