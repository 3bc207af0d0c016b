"""SOSA vocabulary, the plant asset model and the observation wire shape."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

from .rdf import RDF_TYPE, SOSA, BlankNode, Iri, Literal, StaticGraph, TimestampedTriple, Triple

PLATFORM = Iri(SOSA + "Platform")
SENSOR = Iri(SOSA + "Sensor")
OBSERVATION = Iri(SOSA + "Observation")
FEATURE_OF_INTEREST = Iri(SOSA + "FeatureOfInterest")
HOSTS = Iri(SOSA + "hosts")
OBSERVES = Iri(SOSA + "observes")
MADE_BY_SENSOR = Iri(SOSA + "madeBySensor")
HAS_FEATURE_OF_INTEREST = Iri(SOSA + "hasFeatureOfInterest")
HAS_SIMPLE_RESULT = Iri(SOSA + "hasSimpleResult")
RDFS_LABEL = Iri("http://www.w3.org/2000/01/rdf-schema#label")

PLANT_BASE = "http://cpps.example/plant/"
SENSOR_KINDS = ("voltage", "product-counter", "defect-detector")


class PlantConfigError(ValueError):
    def __init__(self, problems: list[str]) -> None:
        super().__init__("invalid plant config: " + "; ".join(problems))
        self.problems = problems


@dataclass(frozen=True)
class Station:
    iri: str
    label: str


@dataclass(frozen=True)
class SensorSpec:
    iri: str
    host: str
    feature: str
    kind: str


@dataclass
class PlantConfig:
    line_iri: str
    stations: list[Station] = field(default_factory=list)
    sensors: list[SensorSpec] = field(default_factory=list)
    line_label: str = "ProductionLine"

    def problems(self) -> list[str]:
        issues = []
        station_labels = {s.iri: s.label for s in self.stations}
        hosts = set(station_labels) | {self.line_iri}
        seen: set[str] = set()
        for s in self.sensors:
            if s.iri in seen:
                issues.append(f"duplicate sensor IRI {s.iri}")
            seen.add(s.iri)
            if s.kind not in SENSOR_KINDS:
                issues.append(f"sensor {s.iri} has unknown kind {s.kind!r}")
            if s.host not in hosts:
                issues.append(f"sensor {s.iri} is hosted by {s.host}, which is neither the line nor a station")
        by_kind = {k: [s for s in self.sensors if s.kind == k] for k in SENSOR_KINDS}
        expected_host = {
            "voltage": (self.line_iri, "the production line"),
            "product-counter": (self._station("ASSEMBLY"), "the ASSEMBLY station"),
            "defect-detector": (self._station("INTEGRITY"), "the INTEGRITY station"),
        }
        for kind, (host, where) in expected_host.items():
            found = by_kind[kind]
            if len(found) != 1:
                issues.append(f"expected exactly one {kind} sensor, found {len(found)}")
            elif host is None or found[0].host != host:
                issues.append(f"the {kind} sensor must be hosted by {where}")
        return issues

    def _station(self, label: str) -> str | None:
        return next((s.iri for s in self.stations if s.label == label), None)

    def sensor(self, kind: str) -> SensorSpec:
        return next(s for s in self.sensors if s.kind == kind)

    def validate(self) -> None:
        issues = self.problems()
        if issues:
            raise PlantConfigError(issues)

    def to_dict(self) -> dict:
        return {
            "line": {"iri": self.line_iri, "label": self.line_label},
            "stations": [{"iri": s.iri, "label": s.label} for s in self.stations],
            "sensors": [{"iri": s.iri, "host": s.host, "feature": s.feature, "kind": s.kind} for s in self.sensors],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PlantConfig":
        try:
            line = data["line"]
            return cls(
                line_iri=line["iri"],
                line_label=line.get("label", "ProductionLine"),
                stations=[Station(s["iri"], s["label"]) for s in data.get("stations", [])],
                sensors=[SensorSpec(s["iri"], s["host"], s["feature"], s["kind"]) for s in data.get("sensors", [])],
            )
        except (KeyError, TypeError) as exc:
            raise PlantConfigError([f"missing or malformed field {exc}"]) from None

    @classmethod
    def load(cls, path: str | Path) -> "PlantConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


DEFAULT_STATIONS = (
    ("WELDING", "WELDING/W1A"),
    ("PAINT", "PAINT/P1A"),
    ("ASSEMBLY", "ASSEMBLY/AP1A"),
    ("INTEGRITY", "INTEGRITY/IT1A"),
    ("PACKAGING", "PACKAGING/PK1A"),
)


def default_plant(base: str = PLANT_BASE) -> PlantConfig:
    """Five stations on one line; voltage, assembly-counter and integrity sensors."""
    line = base + "ProductionLine"
    stations = [Station(base + path, label) for label, path in DEFAULT_STATIONS]
    sensors = [
        SensorSpec(line + "/VoltageSensor", line, base + "LineVoltage", "voltage"),
        SensorSpec(base + "ASSEMBLY/AP1A/ProductCounter", base + "ASSEMBLY/AP1A", base + "AssembledProduct", "product-counter"),
        SensorSpec(base + "INTEGRITY/IT1A/DefectDetector", base + "INTEGRITY/IT1A", base + "ProductIntegrity", "defect-detector"),
    ]
    return PlantConfig(line, stations, sensors)


def build_asset_graph(config: PlantConfig) -> StaticGraph:
    config.validate()
    g = StaticGraph()
    for iri, label in [(config.line_iri, config.line_label)] + [(s.iri, s.label) for s in config.stations]:
        g.add(Triple(Iri(iri), RDF_TYPE, PLATFORM))
        g.add(Triple(Iri(iri), RDFS_LABEL, Literal(label)))
    for s in config.sensors:
        g.add(Triple(Iri(s.iri), RDF_TYPE, SENSOR))
        g.add(Triple(Iri(s.host), HOSTS, Iri(s.iri)))
        g.add(Triple(Iri(s.iri), OBSERVES, Iri(s.feature)))
        g.add(Triple(Iri(s.feature), RDF_TYPE, FEATURE_OF_INTEREST))
    return g


_fresh = itertools.count()


def make_observation(
    sensor: Iri, feature: Iri, value: Literal, t: int, node: BlankNode | None = None
) -> list[TimestampedTriple]:
    """The four triples of one observation, all stamped ``t``.

    Without an explicit ``node`` a process-unique blank node is minted.
    """
    if not isinstance(value, Literal):
        raise TypeError("observation result must be a literal")
    if node is None:
        node = BlankNode(f"obs{next(_fresh)}")
    return [
        TimestampedTriple(Triple(node, RDF_TYPE, OBSERVATION), t),
        TimestampedTriple(Triple(node, MADE_BY_SENSOR, sensor), t),
        TimestampedTriple(Triple(node, HAS_FEATURE_OF_INTEREST, feature), t),
        TimestampedTriple(Triple(node, HAS_SIMPLE_RESULT, value), t),
    ]
