"""Expression evaluation over a single binding row.

Numbers stay exact (int / Fraction) unless an xsd:double enters the
computation. Filter evaluation follows SPARQL error semantics: an error
inside ``&&``/``||`` is absorbed when the other operand decides the result.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Union

from ..csparql.ast import BinOp, Expr, Num, PName
from ..rdf import (
    NUMERIC_DATATYPES,
    XSD_BOOLEAN,
    BlankNode,
    Iri,
    Literal,
    Term,
    Variable,
    number_literal,
    numeric_value,
)

Number = Union[int, Fraction, float]
Value = Union[Number, bool, Iri, Literal, BlankNode]


class EvaluationError(Exception):
    """Raised for unbound variables, type mismatches and division by zero."""


def _as_number(value: Value) -> Number:
    if isinstance(value, bool):
        raise EvaluationError(f"boolean {value} used as a number")
    if isinstance(value, (int, Fraction, float)):
        return value
    if isinstance(value, Literal) and value.datatype in NUMERIC_DATATYPES:
        try:
            return numeric_value(value)
        except ValueError as exc:
            raise EvaluationError(str(exc)) from None
    raise EvaluationError(f"{value} is not numeric")


def _is_numeric(value: Value) -> bool:
    if isinstance(value, bool):
        return False
    return isinstance(value, (int, Fraction, float)) or (
        isinstance(value, Literal) and value.datatype in NUMERIC_DATATYPES
    )


def effective_boolean(value: Value) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, Literal) and value.datatype == XSD_BOOLEAN:
        return value.lexical in ("true", "1")
    if _is_numeric(value):
        return _as_number(value) != 0
    if isinstance(value, Literal):
        return value.lexical != ""
    raise EvaluationError(f"{value} has no boolean value")


def _logical(expr: BinOp, row: Mapping[str, Term]) -> bool:
    results: list[bool | EvaluationError] = []
    for side in (expr.left, expr.right):
        try:
            results.append(effective_boolean(eval_expr(side, row)))
        except EvaluationError as exc:
            results.append(exc)
    decisive = expr.op == "||"
    if decisive in results:
        return decisive
    for r in results:
        if isinstance(r, EvaluationError):
            raise r
    return not decisive


def _arith(op: str, a: Number, b: Number) -> Number:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if b == 0:
        raise EvaluationError("division by zero")
    if isinstance(a, float) or isinstance(b, float):
        return a / b
    return Fraction(a) / Fraction(b)


def _compare(op: str, a: Value, b: Value) -> bool:
    if _is_numeric(a) and _is_numeric(b):
        x, y = _as_number(a), _as_number(b)
        return {
            "<": x < y,
            "<=": x <= y,
            ">": x > y,
            ">=": x >= y,
            "=": x == y,
            "!=": x != y,
        }[op]
    if op in ("=", "!="):
        if isinstance(a, bool) or isinstance(b, bool):
            equal = effective_boolean(a) == effective_boolean(b)
        else:
            equal = a == b
        return equal if op == "=" else not equal
    raise EvaluationError(f"cannot compare {a} {op} {b}")


def eval_expr(expr: Expr, row: Mapping[str, Term]) -> Value:
    """Evaluate ``expr`` against ``row``; raises EvaluationError on failure."""
    if isinstance(expr, Variable):
        if expr.name not in row:
            raise EvaluationError(f"unbound variable ?{expr.name}")
        return row[expr.name]  # type: ignore[return-value]
    if isinstance(expr, Num):
        return expr.value.numerator if expr.value.denominator == 1 else expr.value
    if isinstance(expr, (Iri, Literal)):
        return expr
    if isinstance(expr, PName):
        raise EvaluationError(f"unresolved prefixed name {expr}")
    if isinstance(expr, BinOp):
        if expr.op in ("&&", "||"):
            return _logical(expr, row)
        left = eval_expr(expr.left, row)
        right = eval_expr(expr.right, row)
        if expr.op in ("+", "-", "*", "/"):
            return _arith(expr.op, _as_number(left), _as_number(right))
        return _compare(expr.op, left, right)
    raise EvaluationError(f"cannot evaluate {expr!r}")


def filter_passes(expr: Expr | None, row: Mapping[str, Term]) -> bool:
    """True iff the filter holds; evaluation errors reject the row."""
    if expr is None:
        return True
    try:
        return effective_boolean(eval_expr(expr, row))
    except EvaluationError:
        return False


def to_term(value: Value) -> Term:
    if isinstance(value, (Iri, Literal, BlankNode)):
        return value
    return number_literal(value)
