"""Producer/consumer graph between registered queries."""

from __future__ import annotations

from typing import Iterable

from .csparql import DEFAULT_STREAM_BASE, RegisteredQuery, resolve_query, stream_iri
from .csparql.validate import UnknownPrefixError


class CycleError(ValueError):
    def __init__(self, path: list[str]) -> None:
        super().__init__("dependency cycle: " + " -> ".join(path))
        self.path = path


def source_iris(query: RegisteredQuery) -> list[str]:
    try:
        resolved = resolve_query(query)
    except UnknownPrefixError:
        resolved = query
    return [getattr(s.stream_iri, "value", str(s.stream_iri)) for s in resolved.sources]


def dependency_graph(queries: Iterable[RegisteredQuery], base: str = DEFAULT_STREAM_BASE) -> dict[str, list[str]]:
    """Map each query name to the names of the registered streams it reads, in source order."""
    queries = list(queries)
    producers = {stream_iri(q.name, base): q.name for q in queries if q.is_stream}
    deps: dict[str, list[str]] = {}
    for q in queries:
        deps[q.name] = list(dict.fromkeys(producers[i] for i in source_iris(q) if i in producers))
    return deps


def raw_inputs(queries: Iterable[RegisteredQuery], base: str = DEFAULT_STREAM_BASE) -> list[str]:
    """Stream IRIs read by some query but produced by none."""
    queries = list(queries)
    produced = {stream_iri(q.name, base) for q in queries if q.is_stream}
    out: dict[str, None] = {}
    for q in queries:
        for iri in source_iris(q):
            if iri not in produced:
                out[iri] = None
    return list(out)


def topological_order(deps: dict[str, list[str]]) -> list[str]:
    """Producers before consumers; ties keep the insertion order of ``deps``.

    Raises CycleError carrying one offending cycle.
    """
    index = {name: i for i, name in enumerate(deps)}
    state: dict[str, int] = {}  # 1 = on stack, 2 = done
    order: list[str] = []
    stack: list[str] = []

    def visit(node: str) -> None:
        state[node] = 1
        stack.append(node)
        for dep in sorted(deps.get(node, ()), key=lambda d: index.get(d, len(index))):
            if state.get(dep) == 1:
                raise CycleError(stack[stack.index(dep) :] + [dep])
            if state.get(dep) is None and dep in deps:
                visit(dep)
        stack.pop()
        state[node] = 2
        order.append(node)

    for name in deps:
        if name not in state:
            visit(name)
    return order
