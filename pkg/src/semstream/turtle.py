"""Reader and writer for the Turtle subset used by asset models and fixtures.

Supported: ``@prefix``/``PREFIX`` directives, IRIs, prefixed names, blank node
labels, quoted literals with optional ``^^datatype``, bare numbers and
booleans, the ``a`` keyword, ``;`` predicate lists and ``,`` object lists.
"""

from __future__ import annotations

import re
from collections import defaultdict

from .rdf import (
    DEFAULT_PREFIXES,
    RDF_TYPE,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_INTEGER,
    XSD_STRING,
    BlankNode,
    Iri,
    Literal,
    StaticGraph,
    Term,
    Triple,
    sort_key,
)


class TurtleSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<iri><[^<>"{}|^`\\\s]*>)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<dtype>\^\^)
  | (?P<bnode>_:[A-Za-z0-9_][A-Za-z0-9_.-]*(?<!\.))
  | (?P<directive>@prefix\b|@base\b|PREFIX\b)
  | (?P<number>[+-]?(?:\d+\.\d+(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\d+))
  | (?P<pname>(?:[A-Za-z][A-Za-z0-9_-]*)?:(?:[A-Za-z0-9_](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?)?)
  | (?P<keyword>a\b|true\b|false\b)
  | (?P<punct>[.;,])
    """,
    re.VERBOSE,
)

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\", "'": "'"}


def _unescape(body: str, line: int, col: int) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            nxt = body[i + 1]
            if nxt in _ESCAPES:
                out.append(_ESCAPES[nxt])
                i += 2
                continue
            if nxt in "uU":
                width = 4 if nxt == "u" else 8
                out.append(chr(int(body[i + 2 : i + 2 + width], 16)))
                i += 2 + width
                continue
            raise TurtleSyntaxError(f"bad escape \\{nxt}", line, col)
        out.append(ch)
        i += 1
    return "".join(out)


def _tokenize(text: str) -> list[tuple[str, str, int, int]]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise TurtleSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind != "ws":
            tokens.append((kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + value.rindex("\n") + 1
        pos = m.end()
    return tokens


class _Reader:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.i = 0
        self.prefixes: dict[str, str] = dict(DEFAULT_PREFIXES)
        self.graph = StaticGraph()

    def peek(self) -> tuple[str, str, int, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self, what: str) -> tuple[str, str, int, int]:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else ("", "", 1, 1)
            raise TurtleSyntaxError(f"unexpected end of input, expected {what}", last[2], last[3])
        self.i += 1
        return tok

    def expect_dot(self) -> None:
        kind, value, line, col = self.next("'.'")
        if value != ".":
            raise TurtleSyntaxError(f"expected '.', got {value!r}", line, col)

    def run(self) -> StaticGraph:
        while self.peek() is not None:
            kind, value, line, col = self.peek()  # type: ignore[misc]
            if kind == "directive":
                self.directive()
            else:
                self.statement()
        return self.graph

    def directive(self) -> None:
        _, word, line, col = self.next("directive")
        if word == "@base":
            raise TurtleSyntaxError("@base is not supported", line, col)
        kind, pname, pl, pc = self.next("prefix name")
        if kind != "pname" or not pname.endswith(":"):
            raise TurtleSyntaxError(f"expected prefix declaration, got {pname!r}", pl, pc)
        kind, iri, il, ic = self.next("IRI")
        if kind != "iri":
            raise TurtleSyntaxError(f"expected IRI, got {iri!r}", il, ic)
        self.prefixes[pname[:-1]] = self._iri(iri, il, ic).value
        if word == "@prefix":
            self.expect_dot()

    def _iri(self, token: str, line: int, col: int) -> Iri:
        try:
            return Iri(token[1:-1])
        except ValueError as exc:
            raise TurtleSyntaxError(str(exc), line, col) from None

    def term(self, position: str) -> Term:
        kind, value, line, col = self.next(position)
        if kind == "iri":
            return self._iri(value, line, col)
        if kind == "pname":
            prefix, _, local = value.partition(":")
            if prefix not in self.prefixes:
                raise TurtleSyntaxError(f"unknown prefix {prefix!r}", line, col)
            return self._iri("<" + self.prefixes[prefix] + local + ">", line, col)
        if kind == "bnode":
            if position == "predicate":
                raise TurtleSyntaxError("blank node in predicate position", line, col)
            return BlankNode(value[2:])
        if kind == "keyword" and value == "a":
            if position != "predicate":
                raise TurtleSyntaxError("'a' is only allowed as a predicate", line, col)
            return RDF_TYPE
        if position != "object":
            raise TurtleSyntaxError(f"unexpected {value!r} in {position} position", line, col)
        if kind == "keyword":
            return Literal(value, XSD_BOOLEAN)
        if kind == "number":
            if re.fullmatch(r"[+-]?\d+", value):
                return Literal(value, XSD_INTEGER)
            if "e" in value.lower():
                return Literal(value, XSD_DOUBLE)
            return Literal(value, XSD_DECIMAL)
        if kind == "string":
            lexical = _unescape(value[1:-1], line, col)
            nxt = self.peek()
            if nxt is not None and nxt[0] == "dtype":
                self.i += 1
                dtype = self.term("datatype")
                return Literal(lexical, dtype)  # type: ignore[arg-type]
            return Literal(lexical, XSD_STRING)
        raise TurtleSyntaxError(f"unexpected {value!r}", line, col)

    def statement(self) -> None:
        subject = self.term("subject")
        while True:
            predicate = self.term("predicate")
            while True:
                obj = self.term("object")
                self.graph.add(Triple(subject, predicate, obj))  # type: ignore[arg-type]
                tok = self.peek()
                if tok is not None and tok[1] == ",":
                    self.i += 1
                    continue
                break
            tok = self.peek()
            if tok is not None and tok[1] == ";":
                self.i += 1
                # a trailing ';' before '.' is legal
                after = self.peek()
                if after is not None and after[1] == ".":
                    break
                continue
            break
        self.expect_dot()


def parse_turtle(text: str) -> StaticGraph:
    return _Reader(text).run()


_LOCAL_SAFE = re.compile(r"[A-Za-z0-9_](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?\Z")


def _compact(iri: Iri, prefixes: dict[str, str], used: set[str]) -> str:
    if iri == RDF_TYPE:
        return "a"
    best = None
    for prefix, ns in prefixes.items():
        if iri.value.startswith(ns):
            local = iri.value[len(ns) :]
            if local == "" or _LOCAL_SAFE.match(local):
                if best is None or len(ns) > len(prefixes[best[0]]):
                    best = (prefix, local)
    if best is None:
        return str(iri)
    used.add(best[0])
    return f"{best[0]}:{best[1]}"


def _format(term: Term, prefixes: dict[str, str], used: set[str], predicate: bool = False) -> str:
    if isinstance(term, Iri):
        if term == RDF_TYPE and not predicate:
            used.add("rdf")
            return "rdf:type"
        return _compact(term, prefixes, used)
    if isinstance(term, Literal):
        escaped = str(Literal(term.lexical))
        if term.datatype == XSD_STRING:
            return escaped
        return f"{escaped}^^{_compact(term.datatype, prefixes, used)}"
    if isinstance(term, BlankNode):
        return str(term)
    raise TypeError(f"cannot serialize {term!r}")


def serialize_turtle(graph: StaticGraph, prefixes: dict[str, str] | None = None) -> str:
    """Write ``graph`` as Turtle, grouping predicates per subject; output is deterministic."""
    prefixes = dict(DEFAULT_PREFIXES if prefixes is None else prefixes)
    used: set[str] = set()
    by_subject: dict[Term, dict[Iri, list[Term]]] = defaultdict(lambda: defaultdict(list))
    for t in graph:
        by_subject[t.subject][t.predicate].append(t.object)
    blocks = []
    for subject in sorted(by_subject, key=sort_key):
        preds = by_subject[subject]
        lines = []
        for pred in sorted(preds, key=lambda p: (p != RDF_TYPE, sort_key(p))):
            objs = ", ".join(_format(o, prefixes, used) for o in sorted(preds[pred], key=sort_key))
            lines.append(f"{_format(pred, prefixes, used, predicate=True)} {objs}")
        blocks.append(_format(subject, prefixes, used) + " " + " ;\n    ".join(lines) + " .")
    header = [f"@prefix {p}: <{prefixes[p]}> ." for p in sorted(used)]
    parts = []
    if header:
        parts.append("\n".join(header))
    if blocks:
        parts.append("\n\n".join(blocks))
    return "\n\n".join(parts) + ("\n" if parts else "")
