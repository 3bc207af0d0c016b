"""KPI and emission report writers (JSON and CSV)."""

from __future__ import annotations

import csv
import json
from typing import IO, Iterable

from .engine import Emission
from .kpi.formulas import KpiValues
from .kpi.pipeline import KPI_QUERIES, kpis_at
from .rdf import Literal

KPI_COLUMNS = ["fire_time", "availability", "performance", "quality", "oee", "flags"]
_KPI_QUERY_NAMES = {q for q, _ in KPI_QUERIES.values()}


def kpi_records(emissions: Iterable[Emission]) -> list[tuple[int, KpiValues]]:
    """One KPI quadruple per fire time at which any KPI query emitted."""
    emissions = list(emissions)
    times = sorted({e.fire_time for e in emissions if e.query_name in _KPI_QUERY_NAMES})
    return [(t, kpis_at(emissions, t)) for t in times]


def _kpi_dict(fire_time: int | None, k: KpiValues) -> dict:
    out: dict = {} if fire_time is None else {"fire_time": fire_time}
    for name, value in k.factors().items():
        out[name] = None if value is None else float(value)
    out["exact"] = {name: None if v is None else str(v) for name, v in k.factors().items()}
    out["flags"] = list(k.flags)
    return out


def write_kpi_json(records: list[tuple[int, KpiValues]], fp: IO[str], oracle: KpiValues | None = None, match: bool | None = None) -> None:
    payload: dict = {"engine": [_kpi_dict(t, k) for t, k in records]}
    if oracle is not None:
        payload["oracle"] = _kpi_dict(None, oracle)
        payload["match"] = match
    fp.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_kpi_csv(records: list[tuple[int | None, KpiValues]], fp: IO[str]) -> None:
    w = csv.writer(fp, lineterminator="\n")
    w.writerow(KPI_COLUMNS)
    for t, k in records:
        cells = ["" if v is None else repr(float(v)) for v in k.factors().values()]
        w.writerow(["" if t is None else t, *cells, ";".join(k.flags)])


def write_emissions_csv(emissions: Iterable[Emission], fp: IO[str]) -> None:
    w = csv.writer(fp, lineterminator="\n")
    w.writerow(["query", "fire_time_ms", "row", "variable", "value", "datatype", "error"])
    for e in emissions:
        if not e.rows:
            w.writerow([e.query_name, e.fire_time, "", "", "", "", e.error or ""])
        for i, row in enumerate(e.rows):
            for var, term in row.items():
                if isinstance(term, Literal):
                    value, dtype = term.lexical, term.datatype.value
                else:
                    value, dtype = str(term), ""
                w.writerow([e.query_name, e.fire_time, i, var, value, dtype, e.error or ""])
