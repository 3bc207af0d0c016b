"""Front end for the continuous-query dialect: parsing, printing and static checks."""

from .ast import (
    AggregateClause,
    BinOp,
    Duration,
    Expr,
    Num,
    PName,
    RegisteredQuery,
    SelectItem,
    StreamSource,
    expr_variables,
)
from .parser import QuerySyntaxError, parse_queries, parse_query, tokenize
from .serialize import format_expr, serialize_query
from .validate import (
    DEFAULT_STREAM_BASE,
    Diagnostic,
    UnknownPrefixError,
    resolve_query,
    stream_iri,
    validate_query,
)

__all__ = [
    "AggregateClause",
    "BinOp",
    "DEFAULT_STREAM_BASE",
    "Diagnostic",
    "Duration",
    "Expr",
    "Num",
    "PName",
    "QuerySyntaxError",
    "RegisteredQuery",
    "SelectItem",
    "StreamSource",
    "UnknownPrefixError",
    "expr_variables",
    "format_expr",
    "parse_queries",
    "parse_query",
    "resolve_query",
    "serialize_query",
    "stream_iri",
    "tokenize",
    "validate_query",
]
