"""RDF terms, triples and an in-memory indexed graph with pattern matching."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Protocol, Union

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
XSD = "http://www.w3.org/2001/XMLSchema#"
OWL = "http://www.w3.org/2002/07/owl#"
SOSA = "http://www.w3.org/ns/sosa/"

DEFAULT_PREFIXES: dict[str, str] = {
    "rdf": RDF,
    "rdfs": RDFS,
    "xsd": XSD,
    "sosa": SOSA,
}

_VAR_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_IRI_FORBIDDEN = re.compile(r'[\s<>"{}|^`\\]')


@dataclass(frozen=True, order=True)
class Iri:
    value: str

    def __post_init__(self) -> None:
        if not self.value or _IRI_FORBIDDEN.search(self.value):
            raise ValueError(f"malformed IRI: {self.value!r}")

    def __str__(self) -> str:
        return f"<{self.value}>"


XSD_STRING = Iri(XSD + "string")
XSD_INTEGER = Iri(XSD + "integer")
XSD_DECIMAL = Iri(XSD + "decimal")
XSD_DOUBLE = Iri(XSD + "double")
XSD_BOOLEAN = Iri(XSD + "boolean")
# Exact ratio datatype (lexical form "n/d") so derived values survive a stream hop unrounded.
OWL_RATIONAL = Iri(OWL + "rational")
RDF_TYPE = Iri(RDF + "type")

NUMERIC_DATATYPES = frozenset({XSD_INTEGER, XSD_DECIMAL, XSD_DOUBLE, OWL_RATIONAL})


@dataclass(frozen=True, order=True)
class Literal:
    lexical: str
    datatype: Iri = XSD_STRING

    def __str__(self) -> str:
        escaped = self.lexical.replace("\\", "\\\\").replace('"', '\\"')
        escaped = escaped.replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")
        if self.datatype == XSD_STRING:
            return f'"{escaped}"'
        return f'"{escaped}"^^{self.datatype}'


@dataclass(frozen=True, order=True)
class BlankNode:
    label: str

    def __str__(self) -> str:
        return f"_:{self.label}"


@dataclass(frozen=True, order=True)
class Variable:
    name: str

    def __post_init__(self) -> None:
        if not _VAR_NAME.match(self.name):
            raise ValueError(f"invalid variable name: {self.name!r}")

    def __str__(self) -> str:
        return f"?{self.name}"


Term = Union[Iri, Literal, BlankNode, Variable]
Bindings = Mapping[str, "Term"]


def sort_key(term: Term) -> tuple[int, str, str]:
    """Total order over terms used for reproducible result ordering."""
    if isinstance(term, Iri):
        return (0, term.value, "")
    if isinstance(term, BlankNode):
        return (1, term.label, "")
    if isinstance(term, Literal):
        return (2, term.lexical, term.datatype.value)
    return (3, term.name, "")


@dataclass(frozen=True)
class Triple:
    subject: Term
    predicate: Iri
    object: Term

    def __post_init__(self) -> None:
        if isinstance(self.subject, (Variable, Literal)):
            raise TypeError(f"invalid triple subject: {self.subject!r}")
        if not isinstance(self.predicate, Iri):
            raise TypeError(f"triple predicate must be an IRI: {self.predicate!r}")
        if isinstance(self.object, Variable):
            raise TypeError("variables are not allowed in a concrete triple")
        object.__setattr__(self, "_hash", hash((self.subject, self.predicate, self.object)))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def __iter__(self) -> Iterator[Term]:
        return iter((self.subject, self.predicate, self.object))

    def __str__(self) -> str:
        return f"{self.subject} {self.predicate} {self.object} ."


@dataclass(frozen=True)
class TimestampedTriple:
    triple: Triple
    timestamp: int

    def __post_init__(self) -> None:
        if self.timestamp < 0:
            raise ValueError(f"negative timestamp: {self.timestamp}")


@dataclass(frozen=True)
class TriplePattern:
    subject: Term
    predicate: Term
    object: Term

    def __iter__(self) -> Iterator[Term]:
        return iter((self.subject, self.predicate, self.object))

    def variables(self) -> list[str]:
        return [t.name for t in self if isinstance(t, Variable)]


class TripleSource(Protocol):
    def triples(self, s: Term | None, p: Term | None, o: Term | None) -> Iterator[Triple]: ...


class StaticGraph:
    """Set of triples indexed by subject, predicate and object."""

    def __init__(self, triples: Iterable[Triple] = ()) -> None:
        self._triples: set[Triple] = set()
        self._by_s: dict[Term, set[Triple]] = {}
        self._by_p: dict[Term, set[Triple]] = {}
        self._by_o: dict[Term, set[Triple]] = {}
        for t in triples:
            self.add(t)

    def add(self, triple: Triple) -> None:
        if triple in self._triples:
            return
        self._triples.add(triple)
        self._by_s.setdefault(triple.subject, set()).add(triple)
        self._by_p.setdefault(triple.predicate, set()).add(triple)
        self._by_o.setdefault(triple.object, set()).add(triple)

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __contains__(self, triple: object) -> bool:
        return triple in self._triples

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StaticGraph):
            return NotImplemented
        return self._triples == other._triples

    def __repr__(self) -> str:
        return f"StaticGraph({len(self)} triples)"

    def triples(self, s: Term | None = None, p: Term | None = None, o: Term | None = None) -> Iterator[Triple]:
        candidates: Iterable[Triple] | None = None
        for term, index in ((s, self._by_s), (p, self._by_p), (o, self._by_o)):
            if term is None:
                continue
            bucket = index.get(term)
            if not bucket:
                return
            if candidates is None or len(bucket) < len(candidates):  # type: ignore[arg-type]
                candidates = bucket
        if candidates is None:
            candidates = self._triples
        for t in candidates:
            if (s is None or t.subject == s) and (p is None or t.predicate == p) and (o is None or t.object == o):
                yield t


class GraphUnion:
    """Read-only union of several triple sources; each distinct triple is yielded once."""

    def __init__(self, *graphs: TripleSource) -> None:
        self.graphs = graphs

    def triples(self, s: Term | None = None, p: Term | None = None, o: Term | None = None) -> Iterator[Triple]:
        if len(self.graphs) == 1:
            yield from self.graphs[0].triples(s, p, o)
            return
        seen: set[Triple] = set()
        for g in self.graphs:
            for t in g.triples(s, p, o):
                if t not in seen:
                    seen.add(t)
                    yield t


def _resolve(term: Term, seed: Bindings) -> Term | None:
    if isinstance(term, Variable):
        return seed.get(term.name)
    return term


def match_pattern(graph: TripleSource, pattern: TriplePattern, seed: Bindings | None = None) -> list[dict[str, Term]]:
    """Return every extension of ``seed`` that maps ``pattern`` onto a triple of ``graph``.

    Results are sorted by the terms newly bound, so the output does not depend
    on insertion order.
    """
    seed = dict(seed or {})
    s, p, o = (_resolve(t, seed) for t in pattern)
    free = [t for t in pattern if isinstance(t, Variable) and t.name not in seed]
    results: list[dict[str, Term]] = []
    for triple in graph.triples(s, p, o):
        row = dict(seed)
        ok = True
        for pos, value in zip(pattern, triple):
            if isinstance(pos, Variable):
                bound = row.get(pos.name)
                if bound is None:
                    row[pos.name] = value
                elif bound != value:
                    # repeated variable within one pattern, e.g. (?x, p, ?x)
                    ok = False
                    break
        if ok:
            results.append(row)
    names = list(dict.fromkeys(v.name for v in free))
    results.sort(key=lambda r: [sort_key(r[n]) for n in names])
    return results


def plan_join(patterns: Iterable[TriplePattern], bound: Iterable[str] = ()) -> list[TriplePattern]:
    """Order patterns greedily so each step has as many fixed positions as possible."""
    remaining = list(patterns)
    known = set(bound)
    plan = []
    while remaining:
        best = max(
            range(len(remaining)),
            key=lambda i: (sum(not isinstance(t, Variable) or t.name in known for t in remaining[i]), -i),
        )
        pattern = remaining.pop(best)
        plan.append(pattern)
        known.update(pattern.variables())
    return plan


def match_bgp(graph: TripleSource, patterns: Iterable[TriplePattern], seed: Bindings | None = None) -> list[dict[str, Term]]:
    """Join a set of triple patterns; the result does not depend on pattern order."""
    rows: list[dict[str, Term]] = [dict(seed or {})]
    for pattern in plan_join(patterns, rows[0]):
        nxt: list[dict[str, Term]] = []
        for row in rows:
            nxt.extend(match_pattern(graph, pattern, row))
        rows = nxt
        if not rows:
            break
    return rows


_INTEGER_RE = re.compile(r"[+-]?\d+\Z")
_DECIMAL_RE = re.compile(r"[+-]?(\d+\.\d*|\.\d+|\d+)\Z")
_DOUBLE_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\Z|[+-]?INF\Z|NaN\Z")
_RATIONAL_RE = re.compile(r"[+-]?\d+(/\d+)?\Z")


def numeric_value(term: Term) -> int | Fraction | float:
    """Coerce a numeric literal to a Python number; exact for integers, decimals and rationals."""
    if not isinstance(term, Literal) or term.datatype not in NUMERIC_DATATYPES:
        raise TypeError(f"not a numeric literal: {term}")
    lex = term.lexical.strip()
    dt = term.datatype
    if dt == XSD_INTEGER:
        if not _INTEGER_RE.match(lex):
            raise ValueError(f"invalid xsd:integer lexical form: {lex!r}")
        return int(lex)
    if dt == XSD_DECIMAL:
        if not _DECIMAL_RE.match(lex):
            raise ValueError(f"invalid xsd:decimal lexical form: {lex!r}")
        return Fraction(lex)
    if dt == OWL_RATIONAL:
        if not _RATIONAL_RE.match(lex):
            raise ValueError(f"invalid owl:rational lexical form: {lex!r}")
        num, _, den = lex.partition("/")
        if den and int(den) == 0:
            raise ValueError("owl:rational with zero denominator")
        return Fraction(int(num), int(den or 1))
    if not _DOUBLE_RE.match(lex):
        raise ValueError(f"invalid xsd:double lexical form: {lex!r}")
    return float(lex)


def _terminating(value: Fraction) -> bool:
    d = value.denominator
    for f in (2, 5):
        while d % f == 0:
            d //= f
    return d == 1


def format_decimal(value: Fraction) -> str:
    """Exact decimal string for a fraction whose denominator has only factors 2 and 5."""
    if not _terminating(value):
        raise ValueError(f"{value} has no finite decimal expansion")
    sign = "-" if value < 0 else ""
    value = abs(value)
    whole, rest = divmod(value.numerator, value.denominator)
    digits = []
    while rest:
        rest *= 10
        q, rest = divmod(rest, value.denominator)
        digits.append(str(q))
    return f"{sign}{whole}.{''.join(digits) or '0'}"


def number_literal(value: int | Fraction | float | bool) -> Literal:
    """Encode a number as the narrowest exact literal."""
    if isinstance(value, bool):
        return Literal("true" if value else "false", XSD_BOOLEAN)
    if isinstance(value, float):
        return Literal(repr(value), XSD_DOUBLE)
    value = Fraction(value)
    if value.denominator == 1:
        return Literal(str(value.numerator), XSD_INTEGER)
    if _terminating(value):
        return Literal(format_decimal(value), XSD_DECIMAL)
    return Literal(f"{value.numerator}/{value.denominator}", OWL_RATIONAL)
