from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from ..rdf import Iri, Literal, Term, TriplePattern, Variable

UNIT_MS = {"ms": 1, "s": 1_000, "m": 60_000, "h": 3_600_000, "d": 86_400_000}

ARITHMETIC_OPS = ("+", "-", "*", "/")
COMPARISON_OPS = ("<", "<=", ">", ">=", "=", "!=")
LOGICAL_OPS = ("&&", "||")

AGGREGATE_FUNCTIONS = ("COUNT", "SUM", "AVG", "MIN", "MAX")
IMPLEMENTED_AGGREGATES = ("COUNT",)


@dataclass(frozen=True, eq=False)
class Duration:
    """A positive time span; equality and hashing use the millisecond value."""

    value: int
    unit: str

    def __post_init__(self) -> None:
        if self.unit not in UNIT_MS:
            raise ValueError(f"unknown duration unit {self.unit!r}")
        if self.value <= 0:
            raise ValueError(f"duration must be positive, got {self.value}{self.unit}")

    @property
    def millis(self) -> int:
        return self.value * UNIT_MS[self.unit]

    @classmethod
    def of_millis(cls, ms: int) -> "Duration":
        for unit in ("d", "h", "m", "s"):
            if ms % UNIT_MS[unit] == 0:
                return cls(ms // UNIT_MS[unit], unit)
        return cls(ms, "ms")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Duration):
            return NotImplemented
        return self.millis == other.millis

    def __hash__(self) -> int:
        return hash(self.millis)

    def __str__(self) -> str:
        return f"{self.value}{self.unit}"


@dataclass(frozen=True, order=True)
class PName:
    """A prefixed name kept unexpanded until the query is resolved."""

    prefix: str
    local: str

    def __str__(self) -> str:
        return f"{self.prefix}:{self.local}"


@dataclass(frozen=True)
class Num:
    value: Fraction

    def __str__(self) -> str:
        from ..rdf import format_decimal

        if self.value.denominator == 1:
            return str(self.value.numerator)
        return format_decimal(self.value)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Variable, Num, Iri, PName, Literal, BinOp]
QTerm = Union[Term, PName]


@dataclass(frozen=True)
class SelectItem:
    expr: Expr
    alias: str | None = None

    @property
    def name(self) -> str:
        if self.alias is not None:
            return self.alias
        assert isinstance(self.expr, Variable)
        return self.expr.name


@dataclass(frozen=True)
class StreamSource:
    stream_iri: Iri | PName
    range: Duration
    step: Duration


@dataclass(frozen=True)
class AggregateClause:
    out_var: str
    function: str
    over_vars: tuple[str, ...]
    filter: Expr | None = None


@dataclass
class RegisteredQuery:
    kind: str  # "STREAM" or "QUERY"
    name: str
    compute_every: Duration
    prefixes: dict[str, str] = field(default_factory=dict)
    select: list[SelectItem] = field(default_factory=list)
    sources: list[StreamSource] = field(default_factory=list)
    where: list[TriplePattern] = field(default_factory=list)
    aggregates: list[AggregateClause] = field(default_factory=list)
    filters: list[Expr] = field(default_factory=list)

    @property
    def is_stream(self) -> bool:
        return self.kind == "STREAM"

    def output_vars(self) -> list[str]:
        return [item.name for item in self.select]


def expr_variables(expr: Expr | None) -> list[str]:
    if expr is None:
        return []
    if isinstance(expr, Variable):
        return [expr.name]
    if isinstance(expr, BinOp):
        return expr_variables(expr.left) + expr_variables(expr.right)
    return []
