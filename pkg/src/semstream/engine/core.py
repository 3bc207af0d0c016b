from __future__ import annotations

import bisect
import json
import logging
import queue
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from ..csparql import (
    DEFAULT_STREAM_BASE,
    Diagnostic,
    RegisteredQuery,
    expr_variables,
    resolve_query,
    stream_iri,
    validate_query,
)
from ..dag import topological_order
from ..rdf import BlankNode, GraphUnion, Iri, Literal, StaticGraph, Term, TimestampedTriple, match_bgp
from .expressions import EvaluationError, eval_expr, filter_passes, to_term
from .transport import decode_bindings, encode_result_stream

logger = logging.getLogger(__name__)

BindingRow = dict[str, Term]


class EngineError(Exception):
    pass


class OutOfOrderError(EngineError):
    pass


class DuplicateQueryError(EngineError):
    pass


class RegistrationError(EngineError):
    def __init__(self, name: str, diagnostics: list[Diagnostic]) -> None:
        super().__init__(f"cannot register {name}: " + "; ".join(map(str, diagnostics)))
        self.diagnostics = diagnostics


class StreamBuffer:
    """Time-ordered elements of one stream."""

    def __init__(self, stream_iri: str) -> None:
        self.stream_iri = stream_iri
        self.elements: list[TimestampedTriple] = []
        self._times: list[int] = []
        self.watermark: int | None = None

    def __len__(self) -> int:
        return len(self.elements)

    def append(self, element: TimestampedTriple) -> None:
        if self.watermark is not None and element.timestamp < self.watermark:
            raise OutOfOrderError(
                f"{self.stream_iri}: timestamp {element.timestamp} is behind watermark {self.watermark}"
            )
        self.elements.append(element)
        self._times.append(element.timestamp)
        self.watermark = element.timestamp

    def window(self, lower: int, upper: int) -> list[TimestampedTriple]:
        """Elements with ``lower < timestamp <= upper``."""
        lo = bisect.bisect_right(self._times, lower)
        hi = bisect.bisect_right(self._times, upper)
        return self.elements[lo:hi]

    def evict(self, cutoff: int) -> int:
        """Drop elements with ``timestamp <= cutoff``; returns how many were dropped."""
        n = bisect.bisect_right(self._times, cutoff)
        del self.elements[:n]
        del self._times[:n]
        return n


def _term_json(term: Term) -> dict[str, str]:
    if isinstance(term, Iri):
        return {"type": "uri", "value": term.value}
    if isinstance(term, BlankNode):
        return {"type": "bnode", "value": term.label}
    assert isinstance(term, Literal)
    return {"type": "literal", "value": term.lexical, "datatype": term.datatype.value}


@dataclass
class Emission:
    query_name: str
    fire_time: int
    rows: list[BindingRow] = field(default_factory=list)
    error: str | None = None

    def to_json(self) -> dict:
        out: dict = {
            "query": self.query_name,
            "fire_time_ms": self.fire_time,
            "rows": [{var: _term_json(value) for var, value in row.items()} for row in self.rows],
        }
        if self.error is not None:
            out["error"] = self.error
        return out


def write_emission_log(emissions: Iterable[Emission], fp) -> None:
    """JSON-lines, one object per emission."""
    for e in emissions:
        fp.write(json.dumps(e.to_json(), sort_keys=True) + "\n")


class Evaluation(NamedTuple):
    rows: list[BindingRow]
    errors: list[str]


@dataclass
class _Registration:
    query: RegisteredQuery  # prefixes resolved
    next_fire: int
    raw_access: bool
    order: int


def _join(left: list[BindingRow], right: list[BindingRow]) -> list[BindingRow]:
    out = []
    for a in left:
        for b in right:
            if all(a[k] == b[k] for k in a.keys() & b.keys()):
                out.append({**a, **b})
    return out


class Engine:
    """Virtual-clock executor for registered continuous queries.

    One owner drives ``push`` and ``advance_clock``; other threads hand over
    elements through an :class:`IngestionQueue`.
    """

    def __init__(
        self,
        static_graph: StaticGraph | None = None,
        stream_base: str = DEFAULT_STREAM_BASE,
        evict: bool = True,
    ) -> None:
        self.clock = 0
        self.static_graph = static_graph if static_graph is not None else StaticGraph()
        self.stream_base = stream_base
        self.evict = evict
        self.buffers: dict[str, StreamBuffer] = {}
        self.raw_inputs: set[str] = set()
        self.report_sink: list[Emission] = []
        self._regs: dict[str, _Registration] = {}
        self._outputs: dict[str, str] = {}  # output stream IRI -> producing query
        self._order: list[str] = []

    # -- setup ---------------------------------------------------------

    def declare_input(self, iri: str) -> StreamBuffer:
        """Declare a raw triple stream that producers may push into."""
        if iri in self._outputs:
            raise EngineError(f"{iri} is the output of query {self._outputs[iri]}")
        self.raw_inputs.add(iri)
        return self.buffers.setdefault(iri, StreamBuffer(iri))

    def catalog(self) -> dict[str, frozenset | None]:
        cat: dict[str, frozenset | None] = {iri: None for iri in self.raw_inputs}
        for iri, name in self._outputs.items():
            cat[iri] = frozenset(self._regs[name].query.output_vars())
        return cat

    @property
    def queries(self) -> list[RegisteredQuery]:
        return [self._regs[n].query for n in self._order]

    def next_fire_time(self, name: str | None = None) -> int | None:
        if name is not None:
            return self._regs[name].next_fire
        return min((r.next_fire for r in self._regs.values()), default=None)

    def register(self, query: RegisteredQuery, *, raw_access: bool = True) -> None:
        """Register ``query``; it first fires at the next multiple of its period after the clock.

        With ``raw_access=False`` the query may only read result streams of
        other registered queries and sees an empty static graph.
        """
        if query.name in self._regs:
            raise DuplicateQueryError(f"a query named {query.name!r} is already registered")
        diags = validate_query(query, self.catalog(), self.stream_base)
        if diags:
            raise RegistrationError(query.name, diags)
        resolved = resolve_query(query)
        if not raw_access:
            raw = [s.stream_iri.value for s in resolved.sources if s.stream_iri.value not in self._outputs]  # type: ignore[union-attr]
            if raw:
                raise RegistrationError(
                    query.name, [Diagnostic("raw-access-denied", f"may not read raw stream {i}") for i in raw]
                )
        every = query.compute_every.millis
        reg = _Registration(resolved, (self.clock // every + 1) * every, raw_access, len(self._order))
        self._regs[query.name] = reg
        self._order.append(query.name)
        if query.is_stream:
            iri = stream_iri(query.name, self.stream_base)
            self._outputs[iri] = query.name
            self.buffers[iri] = StreamBuffer(iri)
        logger.debug("registered %s, first fire at %d ms", query.name, reg.next_fire)

    def _topo_rank(self) -> dict[str, int]:
        deps = {}
        for name in self._order:
            q = self._regs[name].query
            deps[name] = [self._outputs[s.stream_iri.value] for s in q.sources if s.stream_iri.value in self._outputs]  # type: ignore[union-attr]
        return {name: i for i, name in enumerate(topological_order(deps))}

    # -- runtime -------------------------------------------------------

    def push(self, stream: str, element: TimestampedTriple) -> None:
        if stream not in self.raw_inputs:
            raise EngineError(f"{stream} is not a declared input stream")
        self.buffers[stream].append(element)

    def push_many(self, stream: str, elements: Iterable[TimestampedTriple]) -> None:
        for e in elements:
            self.push(stream, e)

    def advance_clock(self, to: int) -> list[Emission]:
        """Fire every query due in ``(clock, to]`` and return the emissions in firing order."""
        if to < self.clock:
            raise EngineError(f"clock cannot move backwards ({self.clock} -> {to})")
        rank = self._topo_rank()
        emitted: list[Emission] = []
        while True:
            due = self.next_fire_time()
            if due is None or due > to:
                break
            names = sorted((n for n, r in self._regs.items() if r.next_fire == due), key=rank.__getitem__)
            self.clock = due
            for name in names:
                emitted.append(self._fire(name, due))
        self.clock = to
        if self.evict:
            self._evict()
        return emitted

    def _fire(self, name: str, fire_time: int) -> Emission:
        reg = self._regs[name]
        q = reg.query
        result = evaluate(q, self, fire_time, raw_access=reg.raw_access)
        emission = Emission(name, fire_time, result.rows, "; ".join(result.errors) or None)
        if q.is_stream:
            out = self.buffers[stream_iri(name, self.stream_base)]
            for element in encode_result_stream(result.rows, name, fire_time):
                out.append(element)
        reg.next_fire += q.compute_every.millis
        self.report_sink.append(emission)
        return emission

    def _evict(self) -> None:
        horizon: dict[str, int] = {}
        for reg in self._regs.values():
            for s in reg.query.sources:
                iri = s.stream_iri.value  # type: ignore[union-attr]
                horizon[iri] = max(horizon.get(iri, 0), s.range.millis)
        for iri, rng in horizon.items():
            buf = self.buffers.get(iri)
            if buf is not None:
                buf.evict(self.clock - rng)


def evaluate(query: RegisteredQuery, engine: Engine, fire_time: int, *, raw_access: bool = True) -> Evaluation:
    """Evaluate a resolved query over its windows ending at ``fire_time``.

    Upstream result streams contribute decoded binding rows; raw streams
    contribute triples that, together with the static graph, answer the
    WHERE patterns.
    """
    outputs = engine._outputs
    window_graph = StaticGraph()
    upstream: list[list[BindingRow]] = []
    for src in query.sources:
        iri = src.stream_iri.value  # type: ignore[union-attr]
        buf = engine.buffers.get(iri)
        elements = buf.window(fire_time - src.range.millis, fire_time) if buf is not None else []
        if iri in outputs:
            upstream.append(decode_bindings(elements))
        elif raw_access:
            for e in elements:
                window_graph.add(e.triple)

    base_rows: list[BindingRow] = [{}]
    for rows in upstream:
        base_rows = _join(base_rows, rows)

    graph = GraphUnion(window_graph, engine.static_graph) if raw_access else window_graph
    if query.where:
        candidates = [row for base in base_rows for row in match_bgp(graph, query.where, base)]
    else:
        candidates = [dict(b) for b in base_rows]
    candidates = [r for r in candidates if all(filter_passes(f, r) for f in query.filters)]

    if query.aggregates:
        rows = _aggregate(query, base_rows, candidates)
    else:
        rows = candidates

    out: list[BindingRow] = []
    errors: list[str] = []
    for row in rows:
        try:
            out.append({item.name: to_term(eval_expr(item.expr, row)) for item in query.select})
        except EvaluationError as exc:
            errors.append(str(exc))
    return Evaluation(out, errors)


def _aggregate(query: RegisteredQuery, base_rows: list[BindingRow], candidates: list[BindingRow]) -> list[BindingRow]:
    agg_outs = {a.out_var for a in query.aggregates}
    key_vars = list(dict.fromkeys(v for item in query.select for v in expr_variables(item.expr) if v not in agg_outs))
    groups: dict[tuple, list[BindingRow]] = {}
    # groups seeded from base rows so an empty match set still counts to zero
    for base in base_rows:
        if all(v in base for v in key_vars):
            groups.setdefault(tuple(base[v] for v in key_vars), [])
    for row in candidates:
        groups.setdefault(tuple(row.get(v) for v in key_vars), []).append(row)
    rows = []
    for key, members in groups.items():
        row = {v: t for v, t in zip(key_vars, key) if t is not None}
        for agg in query.aggregates:
            count = sum(
                1 for m in members if all(v in m for v in agg.over_vars) and filter_passes(agg.filter, m)
            )
            row[agg.out_var] = to_term(count)
        rows.append(row)
    return rows


class IngestionQueue:
    """Thread-safe hand-off from producers to the thread that owns the engine."""

    def __init__(self, engine: Engine) -> None:
        self.engine = engine
        self._q: queue.Queue[tuple[str, TimestampedTriple]] = queue.Queue()

    def offer(self, stream: str, element: TimestampedTriple) -> None:
        self._q.put((stream, element))

    def drain(self) -> int:
        """Push every queued element into the engine, in hand-off order."""
        n = 0
        while True:
            try:
                stream, element = self._q.get_nowait()
            except queue.Empty:
                return n
            self.engine.push(stream, element)
            n += 1
