from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semstream.kpi import KpiValues
from semstream.rdf import numeric_value
from semstream.simulator import (
    MINUTE_MS,
    GroundTruth,
    ScenarioConfig,
    ScenarioError,
    all_down_scenario,
    oracle_kpis,
    perfect_scenario,
    random_scenario,
    reference_scenario,
    simulate,
)
from semstream.sosa import HAS_SIMPLE_RESULT, MADE_BY_SENSOR, default_plant


def tallies(streams, plant):
    """Recount ground truth from the emitted triples alone."""
    (events,) = streams.values()
    sensor_of = {e.triple.subject: e.triple.object.value for e in events if e.triple.predicate == MADE_BY_SENSOR}
    result_of = {e.triple.subject: e.triple.object for e in events if e.triple.predicate == HAS_SIMPLE_RESULT}
    down = sum(1 for n, s in sensor_of.items() if s == plant.sensor("voltage").iri and numeric_value(result_of[n]) < 5)
    made = sum(1 for s in sensor_of.values() if s == plant.sensor("product-counter").iri)
    bad = sum(1 for s in sensor_of.values() if s == plant.sensor("defect-detector").iri)
    return down, made, bad


def test_zero_downtime_day(plant):
    _, gt = simulate(ScenarioConfig(), plant)
    assert gt == GroundTruth(0, 1440 // 25, 0, 1440)
    assert gt.total_production == 57


def test_fully_down_day(plant):
    _, gt = simulate(all_down_scenario(), plant)
    assert (gt.total_production, gt.down_minutes) == (0, 1440)


def test_reference_day(plant):
    streams, gt = simulate(reference_scenario(), plant)
    assert gt == GroundTruth(144, 48, 3, 1296)
    assert tallies(streams, plant) == (144, 48, 3)


def test_perfect_plant(plant):
    _, gt = simulate(perfect_scenario(), plant)
    assert gt == GroundTruth(0, 56, 0, 1400)


def test_events_lie_inside_the_day(plant):
    streams, _ = simulate(reference_scenario(), plant)
    (events,) = streams.values()
    times = [e.timestamp for e in events]
    assert times == sorted(times)
    assert 0 < times[0] and times[-1] == 1440 * MINUTE_MS


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_invariants_on_random_days(seed):
    plant = default_plant()
    config = random_scenario(seed)
    streams, gt = simulate(config, plant)
    assert gt.down_minutes + gt.operating_minutes == config.duration_minutes
    assert 0 <= gt.defected <= gt.total_production
    assert gt.total_production == int(gt.operating_minutes // config.pace)
    assert tallies(streams, plant) == (gt.down_minutes, gt.total_production, gt.defected)
    assert 0 <= config.downtime_probability <= 0.3 and 0 <= config.defect_probability <= 0.2


def test_same_seed_same_output(plant):
    a = simulate(random_scenario(42), plant)
    b = simulate(random_scenario(42), plant)
    assert a == b
    assert random_scenario(42) != random_scenario(43)


def test_config_validation():
    with pytest.raises(ScenarioError, match="overlap"):
        ScenarioConfig(downtime_intervals=[(0, 10), (5, 20)]).validate()
    with pytest.raises(ScenarioError, match="not both"):
        ScenarioConfig(downtime_intervals=[(0, 10)], downtime_probability=0.1).validate()
    with pytest.raises(ScenarioError, match="outside"):
        ScenarioConfig(downtime_intervals=[(1400, 1500)]).validate()
    with pytest.raises(ScenarioError):
        ScenarioConfig(defect_probability=1.5).validate()
    with pytest.raises(ScenarioError, match="unknown scenario fields"):
        ScenarioConfig.from_dict({"speed": 3})


def test_config_dict_round_trip():
    config = reference_scenario()
    assert ScenarioConfig.from_dict(config.to_dict()) == config


class TestOracle:
    def test_no_downtime_day(self):
        k = oracle_kpis(GroundTruth(0, 57, 0, 1440), ScenarioConfig())
        assert k.availability == 1
        assert k.performance == Fraction(1425, 1440)
        assert k.quality == 1

    def test_perfect(self):
        k = oracle_kpis(GroundTruth(0, 56, 0, 1400), perfect_scenario())
        assert k.oee == 1

    def test_reference(self):
        k = oracle_kpis(GroundTruth(144, 48, 3, 1296), reference_scenario())
        assert k == KpiValues(Fraction(9, 10), Fraction(1200, 1296), Fraction(45, 48), Fraction(25, 32), ())
        assert k.oee == Fraction(78125, 100000)

    def test_all_down(self):
        k = oracle_kpis(GroundTruth(1440, 0, 0, 0), all_down_scenario())
        assert k.availability == 0
        assert k.performance is None and k.quality is None and k.oee is None
        assert set(k.flags) == {"performance-undefined", "quality-undefined", "oee-undefined"}
