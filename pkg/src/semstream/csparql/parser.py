"""Lexer and recursive-descent parser for REGISTER STREAM/QUERY blocks.

The accepted grammar is documented in ``docs/grammar.ebnf``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from ..rdf import (
    RDF_TYPE,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_INTEGER,
    XSD_STRING,
    BlankNode,
    Iri,
    Literal,
    TriplePattern,
    Variable,
)
from .ast import (
    AGGREGATE_FUNCTIONS,
    AggregateClause,
    BinOp,
    Duration,
    Expr,
    Num,
    PName,
    QTerm,
    RegisteredQuery,
    SelectItem,
    StreamSource,
)


class QuerySyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int
    column: int


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<iri><[^<>"{}|^`\\\x00-\x20]*>)
  | (?P<var>[?$][A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<dtype>\^\^)
  | (?P<bnode>_:[A-Za-z0-9_]+)
  | (?P<duration>\d+(?:ms|s|m|h|d)(?![A-Za-z0-9_]))
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<pname>(?:[A-Za-z][A-Za-z0-9_-]*)?:[A-Za-z0-9_]*)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>&&|\|\||<=|>=|!=|[<>=+\-*/])
  | (?P<punct>[{}()\[\].,;])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup or ""
        value = m.group()
        if kind != "ws":
            tokens.append(Token(kind, value, line, pos - line_start + 1))
        if "\n" in value:
            line += value.count("\n")
            line_start = m.start() + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


_COMPARISONS = ("<", "<=", ">", ">=", "=", "!=")


class _Parser:
    def __init__(self, text: str) -> None:
        self.toks = tokenize(text)
        self.i = 0

    # -- token helpers -------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, message: str, tok: Token | None = None) -> QuerySyntaxError:
        tok = tok or self.tok
        return QuerySyntaxError(message, tok.line, tok.column)

    def is_kw(self, *words: str) -> bool:
        return self.tok.kind == "word" and self.tok.value.upper() in words

    def kw(self, word: str) -> Token:
        if not self.is_kw(word):
            raise self.error(f"expected {word}, got {self.tok.value or 'end of input'!r}")
        return self.advance()

    def is_punct(self, value: str) -> bool:
        return self.tok.kind in ("punct", "op") and self.tok.value == value

    def punct(self, value: str) -> Token:
        if not self.is_punct(value):
            raise self.error(f"expected {value!r}, got {self.tok.value or 'end of input'!r}")
        return self.advance()

    def advance(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    # -- top level -----------------------------------------------------

    def queries(self) -> list[RegisteredQuery]:
        out = []
        while self.tok.kind != "eof":
            out.append(self.register())
        return out

    def register(self) -> RegisteredQuery:
        self.kw("REGISTER")
        if not self.is_kw("STREAM", "QUERY"):
            raise self.error("expected STREAM or QUERY after REGISTER")
        kind = self.advance().value.upper()
        if self.tok.kind != "word":
            raise self.error("expected query name")
        name = self.advance().value
        self.kw("COMPUTED")
        self.kw("EVERY")
        every = self.duration()
        self.kw("AS")
        q = RegisteredQuery(kind=kind, name=name, compute_every=every)
        while self.is_kw("PREFIX"):
            self.prefix(q)
        self.kw("SELECT")
        while not self.is_kw("FROM"):
            if self.tok.kind == "eof" or self.is_kw("WHERE", "REGISTER"):
                break
            q.select.append(self.select_item())
        if not q.select:
            raise self.error("SELECT needs at least one item")
        while self.is_kw("FROM"):
            q.sources.append(self.source())
        if not q.sources:
            raise self.error("expected FROM STREAM clause")
        if self.is_kw("WHERE"):
            self.where(q)
        while self.is_kw("AGGREGATE", "FILTER"):
            if self.is_kw("AGGREGATE"):
                q.aggregates.append(self.aggregate())
            else:
                q.filters.append(self.filter())
        if self.tok.kind != "eof" and not self.is_kw("REGISTER"):
            raise self.error(f"unexpected {self.tok.value!r}")
        return q

    def duration(self) -> Duration:
        tok = self.tok
        if tok.kind != "duration":
            raise self.error(f"malformed duration {tok.value!r}")
        self.advance()
        m = re.fullmatch(r"(\d+)(ms|s|m|h|d)", tok.value)
        assert m is not None
        try:
            return Duration(int(m.group(1)), m.group(2))
        except ValueError as exc:
            raise self.error(f"malformed duration {tok.value!r}: {exc}", tok) from None

    def prefix(self, q: RegisteredQuery) -> None:
        self.kw("PREFIX")
        tok = self.tok
        if tok.kind != "pname" or not tok.value.endswith(":"):
            raise self.error("expected prefix name ending in ':'")
        self.advance()
        prefix = tok.value[:-1]
        if prefix in q.prefixes:
            raise self.error(f"duplicate PREFIX {prefix!r}", tok)
        q.prefixes[prefix] = self.iri().value

    def iri(self) -> Iri:
        tok = self.tok
        if tok.kind != "iri":
            raise self.error(f"expected IRI, got {tok.value!r}")
        self.advance()
        try:
            return Iri(tok.value[1:-1])
        except ValueError as exc:
            raise self.error(str(exc), tok) from None

    def iri_or_pname(self) -> Iri | PName:
        if self.tok.kind == "pname":
            return self.pname()
        return self.iri()

    def pname(self) -> PName:
        tok = self.advance()
        prefix, _, local = tok.value.partition(":")
        return PName(prefix, local)

    def variable(self) -> Variable:
        tok = self.tok
        if tok.kind != "var":
            raise self.error(f"expected variable, got {tok.value!r}")
        self.advance()
        return Variable(tok.value[1:])

    # -- clauses -------------------------------------------------------

    def select_item(self) -> SelectItem:
        start = self.tok
        if self.is_punct("("):
            mark = self.i
            self.advance()
            try:
                expr = self.expr()
                if self.is_kw("AS"):
                    self.advance()
                    alias = self.variable()
                    self.punct(")")
                    return SelectItem(expr, alias.name)
            except QuerySyntaxError:
                pass
            self.i = mark
        expr = self.expr()
        if self.is_kw("AS"):
            self.advance()
            return SelectItem(expr, self.variable().name)
        if not isinstance(expr, Variable):
            raise self.error("a computed SELECT expression needs 'AS ?alias'", start)
        return SelectItem(expr)

    def source(self) -> StreamSource:
        self.kw("FROM")
        self.kw("STREAM")
        iri = self.iri_or_pname()
        self.punct("[")
        self.kw("RANGE")
        rng = self.duration()
        self.kw("STEP")
        step = self.duration()
        self.punct("]")
        return StreamSource(iri, rng, step)

    def where(self, q: RegisteredQuery) -> None:
        self.kw("WHERE")
        self.punct("{")
        while not self.is_punct("}"):
            if self.is_kw("FILTER"):
                q.filters.append(self.filter())
            else:
                s = self.pattern_term("subject")
                p = self.pattern_term("predicate")
                o = self.pattern_term("object")
                q.where.append(TriplePattern(s, p, o))
            if self.is_punct("."):
                self.advance()
            elif not self.is_punct("}") and not self.is_kw("FILTER"):
                raise self.error(f"expected '.' or '}}', got {self.tok.value!r}")
        self.punct("}")

    def pattern_term(self, position: str) -> QTerm:
        tok = self.tok
        if tok.kind == "var":
            return self.variable()
        if tok.kind == "iri":
            return self.iri()
        if tok.kind == "pname":
            return self.pname()
        if tok.kind == "word" and tok.value == "a" and position == "predicate":
            self.advance()
            return RDF_TYPE
        if position == "predicate":
            raise self.error(f"invalid predicate {tok.value!r}")
        if tok.kind == "bnode":
            self.advance()
            return BlankNode(tok.value[2:])
        if position == "object":
            if tok.kind == "string":
                return self.literal()
            if tok.kind == "number":
                self.advance()
                if re.fullmatch(r"\d+", tok.value):
                    return Literal(tok.value, XSD_INTEGER)
                if "e" in tok.value.lower():
                    return Literal(tok.value, XSD_DOUBLE)
                return Literal(tok.value, XSD_DECIMAL)
        raise self.error(f"invalid {position} {tok.value!r}")

    def literal(self) -> Literal:
        tok = self.advance()
        body = tok.value[1:-1]
        lexical = re.sub(r"\\(.)", lambda m: {"n": "\n", "t": "\t", "r": "\r"}.get(m.group(1), m.group(1)), body)
        if self.tok.kind == "dtype":
            self.advance()
            dt = self.iri_or_pname()
            # prefixed datatypes are expanded during resolution
            return Literal(lexical, dt)  # type: ignore[arg-type]
        return Literal(lexical, XSD_STRING)

    def aggregate(self) -> AggregateClause:
        self.kw("AGGREGATE")
        self.punct("{")
        self.punct("(")
        out = self.variable()
        self.punct(",")
        if not self.is_kw(*AGGREGATE_FUNCTIONS):
            raise self.error(f"unknown aggregate function {self.tok.value!r}")
        func = self.advance().value.upper()
        self.punct(",")
        self.punct("{")
        over = [self.variable().name]
        while not self.is_punct("}"):
            if self.is_punct(","):
                self.advance()
            over.append(self.variable().name)
        self.punct("}")
        self.punct(")")
        flt = self.filter() if self.is_kw("FILTER") else None
        self.punct("}")
        return AggregateClause(out.name, func, tuple(over), flt)

    def filter(self) -> Expr:
        self.kw("FILTER")
        self.punct("(")
        e = self.expr()
        self.punct(")")
        return e

    # -- expressions, lowest precedence first --------------------------

    def expr(self) -> Expr:
        left = self.and_expr()
        while self.is_punct("||"):
            self.advance()
            left = BinOp("||", left, self.and_expr())
        return left

    def and_expr(self) -> Expr:
        left = self.comparison()
        while self.is_punct("&&"):
            self.advance()
            left = BinOp("&&", left, self.comparison())
        return left

    def comparison(self) -> Expr:
        left = self.additive()
        if self.tok.kind == "op" and self.tok.value in _COMPARISONS:
            op = self.advance().value
            left = BinOp(op, left, self.additive())
        return left

    def additive(self) -> Expr:
        left = self.multiplicative()
        while self.is_punct("+") or self.is_punct("-"):
            op = self.advance().value
            left = BinOp(op, left, self.multiplicative())
        return left

    def multiplicative(self) -> Expr:
        left = self.primary()
        while self.is_punct("*") or self.is_punct("/"):
            op = self.advance().value
            left = BinOp(op, left, self.primary())
        return left

    def primary(self) -> Expr:
        tok = self.tok
        if self.is_punct("("):
            self.advance()
            e = self.expr()
            self.punct(")")
            return e
        if tok.kind == "var":
            return self.variable()
        if tok.kind == "number":
            self.advance()
            return Num(Fraction(tok.value))
        if self.is_punct("-") and self.toks[self.i + 1].kind == "number":
            self.advance()
            return Num(-Fraction(self.advance().value))
        if tok.kind == "iri":
            return self.iri()
        if tok.kind == "pname":
            return self.pname()
        if tok.kind == "string":
            return self.literal()
        raise self.error(f"unexpected {tok.value or 'end of input'!r} in expression")


def parse_queries(text: str) -> list[RegisteredQuery]:
    """Parse every REGISTER block in ``text``."""
    return _Parser(text).queries()


def parse_query(text: str) -> RegisteredQuery:
    """Parse exactly one REGISTER block."""
    queries = parse_queries(text)
    if len(queries) != 1:
        raise QuerySyntaxError(f"expected exactly one REGISTER block, found {len(queries)}", 1, 1)
    return queries[0]
