from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from semstream.csparql import Duration, validate_query
from semstream.engine import Engine
from semstream.kpi import (
    KpiValues,
    availability,
    build_engine,
    kpis_at,
    load_pipeline,
    oee,
    performance,
    quality,
    run_pipeline,
)
from semstream.rdf import numeric_value
from semstream.simulator import all_down_scenario, perfect_scenario, reference_scenario, simulate
from semstream.kpi.pipeline import replay

REFERENCE = KpiValues(Fraction(9, 10), Fraction(25, 27), Fraction(15, 16), Fraction(25, 32))


class TestFormulas:
    @pytest.mark.parametrize("down, expected", [(0, 1), (1440, 0), (144, Fraction(9, 10))])
    def test_availability(self, down, expected):
        assert availability(1440, down) == expected

    def test_availability_rejects_bad_input(self):
        with pytest.raises(ValueError):
            availability(0, 0)
        with pytest.raises(ValueError):
            availability(1440, 1441)

    @pytest.mark.parametrize(
        "total, operating, expected", [(0, 1440, 0), (48, 1200, 1), (48, 1296, Fraction(25 * 48, 1296))]
    )
    def test_performance(self, total, operating, expected):
        assert performance(25, total, operating) == expected

    def test_performance_without_operating_time(self):
        assert performance(25, 0, 0) is None

    @pytest.mark.parametrize("total, bad, expected", [(100, 0, 1), (48, 3, Fraction(15, 16)), (0, 0, None)])
    def test_quality(self, total, bad, expected):
        assert quality(total, bad) == expected

    def test_quality_rejects_more_defects_than_products(self):
        with pytest.raises(ValueError):
            quality(3, 4)

    def test_oee(self):
        assert oee(1, 1, 1) == 1
        assert oee(Fraction(9, 10), Fraction(1200, 1296), Fraction(15, 16)) == Fraction(78125, 100000)
        assert oee(0, Fraction(1, 3), Fraction(2, 3)) == 0
        assert oee(1, None, 1) is None

    def test_combine_flags(self):
        assert KpiValues.combine(1, Fraction(3, 2), 1).flags == ("performance-above-1",)
        assert KpiValues.combine(0, None, None).flags == ("performance-undefined", "quality-undefined", "oee-undefined")

    def test_close_to(self):
        assert REFERENCE.close_to(KpiValues(0.9, 25 / 27, 0.9375, 0.78125))
        assert not REFERENCE.close_to(KpiValues(0.9, None, 0.9375, None))


fractions01 = st.fractions(min_value=0, max_value=1)


@given(st.integers(1, 10_000), st.data())
def test_availability_decreases_with_downtime(total, data):
    d1 = data.draw(st.integers(0, total))
    d2 = data.draw(st.integers(d1, total))
    assert availability(total, d2) <= availability(total, d1)


@given(fractions01, fractions01, fractions01)
def test_oee_is_symmetric_and_bounded(a, p, q):
    value = oee(a, p, q)
    assert value == oee(q, a, p) == oee(p, q, a)
    assert 0 <= value <= min(a, p, q)


@given(st.integers(1, 100), st.integers(1, 1000), st.integers(0, 5000), st.integers(1, 1000))
def test_performance_is_scale_invariant(scale, cycle, produced, operating):
    assert performance(cycle * scale, produced, operating * scale) == performance(cycle, produced, operating)


@given(st.integers(1, 500), st.data())
def test_quality_decreases_with_defects(total, data):
    a = data.draw(st.integers(0, total))
    b = data.draw(st.integers(a, total))
    assert quality(total, b) <= quality(total, a)


class TestPipeline:
    def test_literal_pipeline_shape(self):
        queries = load_pipeline("paper-literal")
        assert len(queries) == 6
        assert [q.kind for q in queries].count("STREAM") == 5
        assert queries[-1].kind == "QUERY"

    def test_executable_pipeline_registers_cleanly(self, plant):
        engine = Engine()
        engine.declare_input(engine.stream_base + "production")
        for q in load_pipeline("executable", plant=plant):
            assert validate_query(q, engine.catalog()) == []
            engine.register(q)

    def test_executable_preserves_windows(self, plant):
        for q in load_pipeline("executable", plant=plant):
            assert q.compute_every == Duration(24, "h")
            assert all((s.range, s.step) == (Duration(24, "h"), Duration(1, "m")) for s in q.sources)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            load_pipeline("fast")

    def test_downtime_on_reference_day(self, plant):
        queries = load_pipeline("executable", plant=plant)[:1]
        engine = build_engine(plant, queries)
        streams, truth = simulate(reference_scenario(), plant)
        (emission,) = replay(engine, streams, 1440 * 60_000)
        assert numeric_value(emission.rows[0]["downTime"]) == truth.down_minutes == 144

    def test_reference(self, plant):
        run = run_pipeline(plant, reference_scenario())
        assert run.engine == run.oracle == REFERENCE

    def test_perfect(self, plant):
        run = run_pipeline(plant, perfect_scenario())
        assert run.engine.oee == run.oracle.oee == 1

    def test_all_down(self, plant):
        run = run_pipeline(plant, all_down_scenario())
        assert run.engine.availability == 0
        assert run.engine.quality is None and "quality-undefined" in run.engine.flags
        assert run.engine == run.oracle

    def test_isolated_cascade_matches(self, plant):
        assert run_pipeline(plant, reference_scenario(), raw_isolation=True).engine == REFERENCE

    def test_kpis_at_missing_emissions(self):
        k = kpis_at([], 0)
        assert k.oee is None and "oee-undefined" in k.flags
