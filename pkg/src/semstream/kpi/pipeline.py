"""The six OEE queries and the end-to-end run that checks them against the oracle."""

from __future__ import annotations

import heapq
from fractions import Fraction
from typing import Iterable, NamedTuple

from ..csparql import DEFAULT_STREAM_BASE, Duration, Num, RegisteredQuery, parse_queries
from ..engine import Emission, Engine
from ..rdf import TimestampedTriple, numeric_value
from ..sosa import PLANT_BASE, PlantConfig, build_asset_graph, default_plant
from .formulas import KpiValues, Ratio

KPI_QUERIES = {
    "availability": ("Availability", "availability"),
    "performance": ("Performance", "performance"),
    "quality": ("Quality", "quality"),
    "oee": ("OEE", "oee"),
}

# Verbatim query texts, elided IRIs included.
LITERAL_LISTINGS = (
    """REGISTER STREAM DownTime COMPUTED EVERY 24h AS
  PREFIX sosa: <http://www.w3.org/ns/sosa/>
  SELECT ?downTime
  FROM STREAM <http://../production> [RANGE 24h STEP 1m]
  WHERE {?sensor sosa:observes ?voltage.
         ?voltage rdf:type sosa:FeatureOfInterest.
         ?productionLine sosa:hosts ?sensor}
  AGGREGATE {(?downTime, COUNT, {?voltage})
    FILTER (?voltage < 5 && ?productionLine = <http://.../ProductionLine>)}
""",
    """REGISTER STREAM Availability COMPUTED EVERY 24h AS
  PREFIX sosa: <http://www.w3.org/ns/sosa/>
  SELECT (1440-?downTime)/1440 AS ?availability
  FROM STREAM <http://../DownTime> [RANGE 24h STEP 1m]
""",
    """REGISTER STREAM TotalProduction COMPUTED EVERY 24h AS
  PREFIX sosa: <http://www.w3.org/ns/sosa/>
  SELECT ?total
  FROM STREAM <http://../production> [RANGE 24h STEP 1m]
  WHERE {
         ?assemblySensor sosa:observes ?product.
         ?product rdf:type sosa:FeatureOfInterest.
         ?platform sosa:hosts ?assemblySensor
         }
  AGGREGATE {(?total, COUNT, {?product})
    FILTER (?platform = <http://.../ASSEMBLY/AP1A>)}
""",
    """REGISTER STREAM Performance COMPUTED EVERY 24h AS
  PREFIX sosa: <http://www.w3.org/ns/sosa/>
  SELECT (25 * ?total)/(1440-?downTime) AS ?performance
  FROM STREAM <http://../TotalProduction> [RANGE 24h STEP 1m]
  FROM STREAM <http://../DownTime> [RANGE 24h STEP 1m]
""",
    """REGISTER STREAM Quality COMPUTED EVERY 24h AS
  PREFIX sosa: <http://www.w3.org/ns/sosa/>
  SELECT ((?total - ?defectTotal)/?total) AS ?quality
  FROM STREAM <http://../TotalProduction> [RANGE 24h STEP 1m]
  FROM STREAM <http://../production> [RANGE 24h STEP 1m]
  WHERE {
         ?integritySensor sosa:observes ?defect.
         ?defect rdf:type sosa:FeatureOfInterest.
         ?platform sosa:hosts ?integritySensor
         }
  AGGREGATE {(?defectTotal, COUNT, {?defect})
        FILTER (?platform = <http://.../INTEGRITY/IT1A>)}
""",
    """REGISTER QUERY OEE COMPUTED EVERY 24h AS
    SELECT (?availability * ?performance * ?quality) AS ?oee
    FROM STREAM <http://../Availability> [RANGE 24h STEP 1m]
    FROM STREAM <http://../Performance> [RANGE 24h STEP 1m]
    FROM STREAM <http://../Quality> [RANGE 24h STEP 1m]
""",
)


def substitute_elided(text: str, stream_base: str = DEFAULT_STREAM_BASE, plant_base: str = PLANT_BASE) -> str:
    """Replace ``http://.../`` (plant assets) and ``http://../`` (streams) with concrete bases."""
    return text.replace("<http://.../", "<" + plant_base).replace("<http://../", "<" + stream_base)


def literal_listings_text(stream_base: str = DEFAULT_STREAM_BASE, plant_base: str = PLANT_BASE) -> str:
    return "\n".join(substitute_elided(t, stream_base, plant_base) for t in LITERAL_LISTINGS)


_EXECUTABLE = """\
REGISTER STREAM DownTime COMPUTED EVERY {window} AS
  PREFIX sosa: <http://www.w3.org/ns/sosa/>
  SELECT ?downTime
  FROM STREAM <{production}> [RANGE {window} STEP 1m]
  WHERE {{ ?obs sosa:madeBySensor ?sensor .
          ?obs sosa:hasSimpleResult ?voltage .
          ?sensor sosa:observes ?feature .
          ?feature rdf:type sosa:FeatureOfInterest .
          ?productionLine sosa:hosts ?sensor }}
  AGGREGATE {{(?downTime, COUNT, {{?voltage}})
    FILTER (?voltage < {threshold} && ?productionLine = <{line}>)}}

REGISTER STREAM Availability COMPUTED EVERY {window} AS
  SELECT ({total_time}-?downTime)/{total_time} AS ?availability
  FROM STREAM <{base}DownTime> [RANGE {window} STEP 1m]

REGISTER STREAM TotalProduction COMPUTED EVERY {window} AS
  PREFIX sosa: <http://www.w3.org/ns/sosa/>
  SELECT ?total
  FROM STREAM <{production}> [RANGE {window} STEP 1m]
  WHERE {{ ?obs sosa:madeBySensor ?assemblySensor .
          ?assemblySensor sosa:observes ?product .
          ?product rdf:type sosa:FeatureOfInterest .
          ?platform sosa:hosts ?assemblySensor }}
  AGGREGATE {{(?total, COUNT, {{?product}})
    FILTER (?platform = <{assembly}>)}}

REGISTER STREAM Performance COMPUTED EVERY {window} AS
  SELECT ({cycle} * ?total)/({total_time}-?downTime) AS ?performance
  FROM STREAM <{base}TotalProduction> [RANGE {window} STEP 1m]
  FROM STREAM <{base}DownTime> [RANGE {window} STEP 1m]

REGISTER STREAM Quality COMPUTED EVERY {window} AS
  PREFIX sosa: <http://www.w3.org/ns/sosa/>
  SELECT ((?total - ?defectTotal)/?total) AS ?quality
  FROM STREAM <{base}TotalProduction> [RANGE {window} STEP 1m]
  FROM STREAM <{production}> [RANGE {window} STEP 1m]
  WHERE {{ ?obs sosa:madeBySensor ?integritySensor .
          ?integritySensor sosa:observes ?defect .
          ?defect rdf:type sosa:FeatureOfInterest .
          ?platform sosa:hosts ?integritySensor }}
  AGGREGATE {{(?defectTotal, COUNT, {{?defect}})
    FILTER (?platform = <{integrity}>)}}

REGISTER QUERY OEE COMPUTED EVERY {window} AS
  SELECT (?availability * ?performance * ?quality) AS ?oee
  FROM STREAM <{base}Availability> [RANGE {window} STEP 1m]
  FROM STREAM <{base}Performance> [RANGE {window} STEP 1m]
  FROM STREAM <{base}Quality> [RANGE {window} STEP 1m]
"""


def executable_pipeline_text(
    plant: PlantConfig | None = None,
    total_time: int = 1440,
    cycle_time: Fraction | int = 25,
    threshold: Fraction | int = 5,
    stream_base: str = DEFAULT_STREAM_BASE,
) -> str:
    """Query text over the observation wire shape; ``total_time`` is in minutes."""
    plant = plant or default_plant()
    plant.validate()
    window = Duration(total_time // 60, "h") if total_time % 60 == 0 else Duration(total_time, "m")
    return _EXECUTABLE.format(
        window=window,
        production=stream_base + "production",
        base=stream_base,
        line=plant.line_iri,
        assembly=plant.sensor("product-counter").host,
        integrity=plant.sensor("defect-detector").host,
        total_time=total_time,
        cycle=Num(Fraction(cycle_time)),
        threshold=Num(Fraction(threshold)),
    )


def load_pipeline(mode: str = "executable", **params) -> list[RegisteredQuery]:
    """``paper-literal``: the six listings as printed (parse-only corpus).
    ``executable``: the same pipeline over the observation wire shape."""
    if mode == "paper-literal":
        bases = {k: params[k] for k in ("stream_base", "plant_base") if k in params}
        return parse_queries(literal_listings_text(**bases))
    if mode == "executable":
        return parse_queries(executable_pipeline_text(**params))
    raise ValueError(f"unknown pipeline mode {mode!r}")


class PipelineRun(NamedTuple):
    engine: KpiValues
    oracle: KpiValues
    emissions: list[Emission]


def replay(engine: Engine, streams: dict[str, list[TimestampedTriple]], until: int) -> list[Emission]:
    """Feed events to the engine in timestamp order, firing queries as the clock passes their periods.

    Every element stamped at or before a fire time is pushed before that fire.
    """
    merged = heapq.merge(*[[(e.timestamp, i, iri, e) for i, e in enumerate(evts)] for iri, evts in streams.items()])
    pending = list(merged)
    pos = 0
    emissions: list[Emission] = []
    while True:
        nxt = engine.next_fire_time()
        target = until if nxt is None else min(nxt, until)
        while pos < len(pending) and pending[pos][0] <= target:
            _, _, iri, element = pending[pos]
            engine.push(iri, element)
            pos += 1
        emissions += engine.advance_clock(target)
        if target >= until:
            break
    return emissions


def _value(emission: Emission | None, var: str) -> Ratio:
    if emission is None or not emission.rows:
        return None
    value = numeric_value(emission.rows[0][var])
    return Fraction(value)


def kpis_at(emissions: Iterable[Emission], fire_time: int) -> KpiValues:
    """Read the four KPI values emitted at ``fire_time``."""
    by_name = {e.query_name: e for e in emissions if e.fire_time == fire_time}
    values = {k: _value(by_name.get(q), var) for k, (q, var) in KPI_QUERIES.items()}
    flags = list(KpiValues.combine(values["availability"], values["performance"], values["quality"]).flags)
    if values["oee"] is not None and "oee-undefined" in flags:
        flags.remove("oee-undefined")
    elif values["oee"] is None and "oee-undefined" not in flags:
        flags.append("oee-undefined")
    return KpiValues(values["availability"], values["performance"], values["quality"], values["oee"], tuple(flags))


def build_engine(
    asset: PlantConfig,
    queries: list[RegisteredQuery],
    stream_base: str = DEFAULT_STREAM_BASE,
    raw_isolation: bool = False,
) -> Engine:
    """Engine with the asset graph loaded, the production input declared and ``queries`` registered.

    With ``raw_isolation`` the derived KPI queries (Availability, Performance,
    OEE) are barred from raw streams and the static graph.
    """
    engine = Engine(build_asset_graph(asset), stream_base)
    engine.declare_input(stream_base + "production")
    for q in queries:
        isolated = raw_isolation and q.name in ("Availability", "Performance", "OEE")
        engine.register(q, raw_access=not isolated)
    return engine


def run_pipeline(
    asset: PlantConfig,
    scenario,
    stream_base: str = DEFAULT_STREAM_BASE,
    raw_isolation: bool = False,
) -> PipelineRun:
    """Simulate ``scenario``, run the executable pipeline over it and compare with the oracle."""
    from ..simulator import oracle_kpis, simulate

    queries = load_pipeline(
        "executable",
        plant=asset,
        total_time=scenario.duration_minutes,
        cycle_time=scenario.cycle_time_minutes,
        threshold=scenario.voltage_threshold,
        stream_base=stream_base,
    )
    engine = build_engine(asset, queries, stream_base, raw_isolation)
    streams, truth = simulate(scenario, asset, stream_base)
    end = scenario.duration_minutes * 60_000
    emissions = replay(engine, streams, end)
    return PipelineRun(kpis_at(emissions, end), oracle_kpis(truth, scenario), emissions)
