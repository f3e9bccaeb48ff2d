"""Exception hierarchy for the ivecdb engine."""

from __future__ import annotations


class IvecdbError(Exception):
    """Base class for all engine errors."""


class SchemaError(IvecdbError):
    """Invalid signature, schema, or catalog definition."""


class EvaluationError(IvecdbError):
    """A term could not be evaluated against the given instance."""


class UnboundRelationError(EvaluationError):
    """A base term names a relation that is not bound in the instance."""


class ColumnError(EvaluationError):
    """A column reference does not resolve against the input header."""


class ConditionError(EvaluationError):
    """A selection condition is malformed for the input header."""


class UpdateError(IvecdbError):
    """An update statement cannot be desugared against the schema."""


class VectorError(IvecdbError):
    """Invalid vector tuple or vector relation content."""


class HashCollisionError(VectorError):
    """Two distinct source tuples of one relation produced the same index."""


class RewriteError(IvecdbError):
    """A user term cannot be rewritten over the vector relation."""


class FederationError(IvecdbError):
    """Invalid federation construction or meta-query argument."""


class SchemaLogError(IvecdbError):
    """Base class for SchemaLog front-end errors."""


class SchemaLogParseError(SchemaLogError):
    """Syntax error in a SchemaLog program, with source location."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class SafetyError(SchemaLogError):
    """A rule violates the safety or stratification requirements."""


class ParseSyntaxError(IvecdbError):
    """Syntax error in the textual algebra syntax, with source location."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class StorageError(IvecdbError):
    """Malformed on-disk catalog, vector store, or data file."""
