"""Binding-triple transport: how result rows travel between registered streams.

Every row becomes a fresh blank node ``r`` with one ``(r, bind:<var>, value)``
triple per bound variable, all stamped with the emitting fire time.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from ..rdf import BlankNode, Iri, Term, TimestampedTriple, Triple

BIND = "http://cpps.example/binding#"


class DecodeError(ValueError):
    pass


def encode_result_stream(rows: Iterable[Mapping[str, Term]], query_name: str, fire_time: int) -> list[TimestampedTriple]:
    out = []
    for i, row in enumerate(rows):
        # label is unique per (query, fire time, row) so windows spanning
        # several emissions never merge rows
        node = BlankNode(f"{query_name}_{fire_time}_r{i}")
        for var, value in row.items():
            out.append(TimestampedTriple(Triple(node, Iri(BIND + var), value), fire_time))
    return out


def decode_bindings(triples: Iterable[TimestampedTriple | Triple]) -> list[dict[str, Term]]:
    """Regroup binding triples by subject into rows, in order of first appearance.

    Subjects carrying no ``bind:`` predicate at all are ignored.
    """
    rows: dict[Term, dict[str, Term]] = {}
    foreign: set[Term] = set()
    for item in triples:
        t = item.triple if isinstance(item, TimestampedTriple) else item
        if not t.predicate.value.startswith(BIND):
            if t.subject in rows:
                raise DecodeError(f"{t.subject} mixes binding and non-binding predicates")
            foreign.add(t.subject)
            continue
        if t.subject in foreign:
            raise DecodeError(f"{t.subject} mixes binding and non-binding predicates")
        var = t.predicate.value[len(BIND) :]
        row = rows.setdefault(t.subject, {})
        if var in row:
            raise DecodeError(f"?{var} bound twice under {t.subject}")
        row[var] = t.object
    return list(rows.values())
