"""Prefix resolution and static checks for parsed queries."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Optional

from ..rdf import DEFAULT_PREFIXES, Iri, Literal, TriplePattern
from .ast import (
    IMPLEMENTED_AGGREGATES,
    BinOp,
    PName,
    RegisteredQuery,
    expr_variables,
)

DEFAULT_STREAM_BASE = "http://cpps.example/stream/"

# stream IRI -> variable vocabulary of its rows, or None for a raw triple stream
StreamCatalog = Mapping[str, Optional[frozenset]]


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class UnknownPrefixError(KeyError):
    pass


def stream_iri(name: str, base: str = DEFAULT_STREAM_BASE) -> str:
    """IRI under which a registered stream named ``name`` is published."""
    return base + name


def _expand(term, prefixes: Mapping[str, str]):
    if isinstance(term, PName):
        if term.prefix in prefixes:
            return Iri(prefixes[term.prefix] + term.local)
        if term.prefix in DEFAULT_PREFIXES:
            return Iri(DEFAULT_PREFIXES[term.prefix] + term.local)
        raise UnknownPrefixError(term.prefix)
    if isinstance(term, Literal) and isinstance(term.datatype, PName):
        return Literal(term.lexical, _expand(term.datatype, prefixes))
    if isinstance(term, BinOp):
        return BinOp(term.op, _expand(term.left, prefixes), _expand(term.right, prefixes))
    return term


def resolve_query(q: RegisteredQuery) -> RegisteredQuery:
    """Return a copy with every prefixed name expanded to a full IRI.

    Raises UnknownPrefixError for prefixes neither declared nor predefined.
    """
    p = q.prefixes
    return replace(
        q,
        select=[replace(i, expr=_expand(i.expr, p)) for i in q.select],
        sources=[replace(s, stream_iri=_expand(s.stream_iri, p)) for s in q.sources],
        where=[TriplePattern(*(_expand(t, p) for t in pat)) for pat in q.where],
        aggregates=[replace(a, filter=_expand(a.filter, p)) for a in q.aggregates],
        filters=[_expand(f, p) for f in q.filters],
    )


def _prefixed_names(q: RegisteredQuery) -> list[PName]:
    found: list[PName] = []

    def walk(x) -> None:
        if isinstance(x, PName):
            found.append(x)
        elif isinstance(x, Literal) and isinstance(x.datatype, PName):
            found.append(x.datatype)
        elif isinstance(x, BinOp):
            walk(x.left)
            walk(x.right)

    for item in q.select:
        walk(item.expr)
    for s in q.sources:
        walk(s.stream_iri)
    for pat in q.where:
        for t in pat:
            walk(t)
    for a in q.aggregates:
        walk(a.filter)
    for f in q.filters:
        walk(f)
    return found


def _source_key(src_iri, q: RegisteredQuery) -> str | None:
    try:
        return _expand(src_iri, q.prefixes).value
    except UnknownPrefixError:
        return None


def validate_query(
    q: RegisteredQuery,
    known_streams: StreamCatalog | set[str],
    base: str = DEFAULT_STREAM_BASE,
) -> list[Diagnostic]:
    """Static checks; an empty list means the query can be registered.

    ``known_streams`` maps stream IRIs (or bare names, resolved against
    ``base``) to the variables their rows bind; ``None`` marks a raw input
    stream. A plain set is read as raw inputs only.
    """
    if not isinstance(known_streams, Mapping):
        known_streams = {s: None for s in known_streams}
    catalog: dict[str, frozenset | None] = {}
    for key, vocab in known_streams.items():
        iri = key if ":" in key else stream_iri(key, base)
        catalog[iri] = frozenset(vocab) if vocab is not None else None

    diags: list[Diagnostic] = []
    for pn in _prefixed_names(q):
        if pn.prefix not in q.prefixes and pn.prefix not in DEFAULT_PREFIXES:
            diags.append(Diagnostic("unknown-prefix", f"prefix {pn.prefix!r} is not declared"))

    available: set[str] = set()
    for src in q.sources:
        if src.step.millis > src.range.millis:
            diags.append(Diagnostic("step-exceeds-range", f"STEP {src.step} is larger than RANGE {src.range} on {src.stream_iri}"))
        elif src.range.millis % src.step.millis:
            diags.append(Diagnostic("step-not-divisor", f"STEP {src.step} does not divide RANGE {src.range} on {src.stream_iri}"))
        key = _source_key(src.stream_iri, q)
        if key is None:
            continue
        if key not in catalog:
            diags.append(Diagnostic("unknown-stream", f"stream {key} is neither registered nor a declared input"))
        elif catalog[key] is not None:
            available |= catalog[key]  # type: ignore[operator]
        if key == stream_iri(q.name, base) and q.is_stream:
            diags.append(Diagnostic("cycle", f"{q.name} reads its own output stream"))

    where_vars = {v for pat in q.where for v in pat.variables()}
    available |= where_vars
    upstream_and_where = set(available)
    outputs: set[str] = set()
    for agg in q.aggregates:
        if agg.function not in IMPLEMENTED_AGGREGATES:
            diags.append(Diagnostic("unsupported-aggregate", f"{agg.function} is recognized but not implemented"))
        if agg.out_var in upstream_and_where or agg.out_var in outputs:
            diags.append(Diagnostic("aggregate-not-fresh", f"?{agg.out_var} is already bound"))
        outputs.add(agg.out_var)
        for v in list(agg.over_vars) + expr_variables(agg.filter):
            if v not in upstream_and_where:
                diags.append(Diagnostic("unresolved-variable", f"?{v} in AGGREGATE is not bound"))
    for f in q.filters:
        for v in expr_variables(f):
            if v not in upstream_and_where:
                diags.append(Diagnostic("unresolved-variable", f"?{v} in FILTER is not bound"))

    available |= outputs
    seen_names: set[str] = set()
    for item in q.select:
        for v in expr_variables(item.expr):
            if v not in available:
                diags.append(Diagnostic("unresolved-variable", f"?{v} in SELECT is not bound"))
        if item.name in seen_names:
            diags.append(Diagnostic("duplicate-output", f"?{item.name} is selected twice"))
        seen_names.add(item.name)
    return diags
