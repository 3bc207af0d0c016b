"""Minute-resolution production line simulator.

Each simulated minute ``m`` covers ``[m, m+1)`` and its events carry the
timestamp of the minute's close, ``(m + 1) * 60_000`` ms, so a day of
minutes fills the window ``(0, 86_400_000]`` exactly.

Random draws come from ``random.Random(seed)`` (Mersenne Twister) in this
fixed order: per minute, one draw for downtime (only when a downtime
probability is configured), then one draw per product completed in that
minute (only when defects are probabilistic).
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .csparql.validate import DEFAULT_STREAM_BASE
from .kpi.formulas import KpiValues, availability, performance, quality
from .rdf import BlankNode, Iri, TimestampedTriple, number_literal
from .sosa import PlantConfig, make_observation

MINUTE_MS = 60_000


class ScenarioError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    duration_minutes: int = 1440
    downtime_intervals: list[tuple[int, int]] = field(default_factory=list)
    downtime_probability: float | None = None
    cycle_time_minutes: Fraction = Fraction(25)
    # actual pace of the line; defaults to the theoretical cycle time
    production_cycle_minutes: Fraction | None = None
    defect_probability: float = 0.0
    # 0-based indices of completed products that are defective; overrides the probability
    defect_products: list[int] | None = None
    nominal_voltage: Fraction = Fraction(12)
    down_voltage: Fraction = Fraction(0)
    voltage_threshold: Fraction = Fraction(5)
    seed: int = 0
    name: str = "custom"

    def __post_init__(self) -> None:
        self.downtime_intervals = [tuple(iv) for iv in self.downtime_intervals]  # type: ignore[misc]
        for attr in ("cycle_time_minutes", "production_cycle_minutes", "nominal_voltage", "down_voltage", "voltage_threshold"):
            value = getattr(self, attr)
            if value is not None and not isinstance(value, Fraction):
                setattr(self, attr, Fraction(str(value)))

    @property
    def pace(self) -> Fraction:
        return self.production_cycle_minutes if self.production_cycle_minutes is not None else self.cycle_time_minutes

    def validate(self) -> None:
        problems = []
        if self.duration_minutes <= 0:
            problems.append("duration_minutes must be positive")
        if self.cycle_time_minutes <= 0 or self.pace <= 0:
            problems.append("cycle times must be positive")
        if self.downtime_intervals and self.downtime_probability is not None:
            problems.append("give downtime_intervals or downtime_probability, not both")
        if self.downtime_probability is not None and not 0 <= self.downtime_probability <= 1:
            problems.append("downtime_probability must lie in [0, 1]")
        if not 0 <= self.defect_probability <= 1:
            problems.append("defect_probability must lie in [0, 1]")
        for start, end in self.downtime_intervals:
            if not 0 <= start < end <= self.duration_minutes:
                problems.append(f"downtime interval [{start}, {end}) outside [0, {self.duration_minutes})")
        ordered = sorted(self.downtime_intervals)
        for (_, e1), (s2, _) in zip(ordered, ordered[1:]):
            if s2 < e1:
                problems.append("downtime intervals overlap")
        if not self.nominal_voltage >= self.voltage_threshold > self.down_voltage:
            problems.append("need down_voltage < voltage_threshold <= nominal_voltage")
        if problems:
            raise ScenarioError("; ".join(problems))

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, Fraction):
                d[k] = str(v)
        d["downtime_intervals"] = [list(iv) for iv in self.downtime_intervals]
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ScenarioError(f"unknown scenario fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "ScenarioConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class GroundTruth:
    down_minutes: int
    total_production: int
    defected: int
    operating_minutes: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def simulate(
    config: ScenarioConfig, asset: PlantConfig, stream_base: str = DEFAULT_STREAM_BASE
) -> tuple[dict[str, list[TimestampedTriple]], GroundTruth]:
    """Generate the raw ``production`` stream and the exact tallies behind it."""
    config.validate()
    asset.validate()
    rng = random.Random(config.seed)
    voltage = asset.sensor("voltage")
    counter = asset.sensor("product-counter")
    detector = asset.sensor("defect-detector")
    v_sensor, v_feature = Iri(voltage.iri), Iri(voltage.feature)
    c_sensor, c_feature = Iri(counter.iri), Iri(counter.feature)
    d_sensor, d_feature = Iri(detector.iri), Iri(detector.feature)
    one = number_literal(1)
    nominal = number_literal(config.nominal_voltage)
    down_v = number_literal(config.down_voltage)
    scripted_down = set()
    for start, end in config.downtime_intervals:
        scripted_down.update(range(start, end))
    scripted_defects = set(config.defect_products) if config.defect_products is not None else None

    events: list[TimestampedTriple] = []
    down = produced = defected = 0
    operating = 0
    for m in range(config.duration_minutes):
        t = (m + 1) * MINUTE_MS
        if config.downtime_probability is not None:
            is_down = rng.random() < config.downtime_probability
        else:
            is_down = m in scripted_down
        events += make_observation(v_sensor, v_feature, down_v if is_down else nominal, t, BlankNode(f"v{m}"))
        if is_down:
            down += 1
            continue
        before = operating // config.pace
        operating += 1
        for _ in range(int(operating // config.pace - before)):
            index = produced
            produced += 1
            events += make_observation(c_sensor, c_feature, one, t, BlankNode(f"p{index}"))
            if scripted_defects is not None:
                bad = index in scripted_defects
            else:
                bad = rng.random() < config.defect_probability
            if bad:
                defected += 1
                events += make_observation(d_sensor, d_feature, one, t, BlankNode(f"d{index}"))

    truth = GroundTruth(down, produced, defected, config.duration_minutes - down)
    return {stream_base + "production": events}, truth


def oracle_kpis(gt: GroundTruth, config: ScenarioConfig) -> KpiValues:
    """Closed-form KPIs straight from the ground-truth tallies."""
    a = availability(config.duration_minutes, gt.down_minutes)
    p = performance(config.cycle_time_minutes, gt.total_production, gt.operating_minutes)
    q = quality(gt.total_production, gt.defected)
    return KpiValues.combine(a, p, q)


def reference_scenario() -> ScenarioConfig:
    """144 down minutes, 48 products (one per 27 operating minutes), 3 defects."""
    return ScenarioConfig(
        name="reference",
        downtime_intervals=[(300, 360), (720, 804)],
        production_cycle_minutes=Fraction(27),
        defect_products=[5, 20, 41],
    )


def perfect_scenario() -> ScenarioConfig:
    """No stops, no defects, one product every 25 minutes over 56 cycles."""
    return ScenarioConfig(name="perfect", duration_minutes=1400)


def all_down_scenario() -> ScenarioConfig:
    return ScenarioConfig(name="all-down", downtime_intervals=[(0, 1440)])


def random_scenario(seed: int) -> ScenarioConfig:
    """Seeded scenario with downtime p in [0, 0.3], defect p in [0, 0.2] and a pace of 20-35 minutes."""
    rng = random.Random(seed)
    return ScenarioConfig(
        name=f"random-{seed}",
        downtime_probability=rng.uniform(0, 0.3),
        defect_probability=rng.uniform(0, 0.2),
        production_cycle_minutes=Fraction(rng.randint(20, 35)),
        seed=seed,
    )


BUILTIN_SCENARIOS = {
    "reference": reference_scenario,
    "perfect": perfect_scenario,
    "all-down": all_down_scenario,
}
