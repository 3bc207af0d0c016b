import json
from importlib import resources

import pytest

from semstream.cli import main
from semstream.kpi import executable_pipeline_text, literal_listings_text
from semstream.simulator import BUILTIN_SCENARIOS, ScenarioConfig
from semstream.sosa import PlantConfig, build_asset_graph, default_plant
from semstream.turtle import parse_turtle

DATA = resources.files("semstream") / "data"
LISTINGS = str(DATA / "listings-paper.rq")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_reference_compare_oracle(capsys, tmp_path):
    code, out, _ = run(capsys, "run", "--scenario", "reference", "--compare-oracle", "--out", str(tmp_path))
    assert code == 0
    assert "oee=0.78125" in out and "engine matches oracle" in out
    report = json.loads((tmp_path / "kpi.json").read_text())
    assert report["match"] is True
    assert report["engine"][-1]["oee"] == pytest.approx(0.78125, abs=1e-12)
    assert report["engine"][-1]["exact"]["performance"] == "25/27"
    assert json.loads((tmp_path / "ground_truth.json").read_text())["total_production"] == 48
    assert len((tmp_path / "emissions.jsonl").read_text().splitlines()) == 6


def test_parse_only_listings(capsys, tmp_path):
    code, out, _ = run(capsys, "run", "--parse-only", "--queries", LISTINGS, "--out", str(tmp_path / "never"))
    assert code == 0
    assert "6 queries parsed" in out
    assert not (tmp_path / "never").exists()


def test_parse_only_accepts_bare_builtin_name(capsys):
    assert run(capsys, "run", "--parse-only", "--queries", "listings-paper.rq")[0] == 0


def test_missing_file(capsys, tmp_path):
    out_dir = tmp_path / "out"
    code, _, err = run(capsys, "run", "--queries", str(tmp_path / "nope.rq"), "--out", str(out_dir))
    assert code == 2
    assert "no such file" in err
    assert not out_dir.exists()


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["run", "--format", "xml"])
    assert info.value.code == 2


def test_syntax_error(capsys, tmp_path):
    bad = tmp_path / "bad.rq"
    bad.write_text("REGISTER STREAM X COMPUTED EVERY 24x AS")
    code, _, err = run(capsys, "run", "--parse-only", "--queries", str(bad))
    assert code == 3 and "line 1" in err


def test_validation_error(capsys, tmp_path):
    bad = tmp_path / "bad.rq"
    bad.write_text("REGISTER QUERY Q COMPUTED EVERY 1m AS SELECT ?ghost FROM STREAM <http://ex/s> [RANGE 1m STEP 1m]")
    code, _, err = run(capsys, "run", "--parse-only", "--queries", str(bad))
    assert code == 4 and "ghost" in err


def test_config_error(capsys, tmp_path):
    bad = tmp_path / "plant.json"
    bad.write_text(json.dumps({"line_iri": "http://ex/line", "stations": [], "sensors": []}))
    code, _, _ = run(capsys, "run", "--asset", str(bad))
    assert code == 5
    scenario = tmp_path / "s.json"
    scenario.write_text(json.dumps({"downtime_probability": 2}))
    assert run(capsys, "run", "--scenario", str(scenario))[0] == 5


def test_identical_runs_are_byte_identical(capsys, tmp_path):
    args = ["run", "--scenario", "reference", "--seed", "7", "--down", "0.2", "--defect-p", "0.1", "--compare-oracle"]
    for name in ("a", "b"):
        assert run(capsys, *args, "--out", str(tmp_path / name))[0] == 0
    for f in ("emissions.jsonl", "kpi.json", "ground_truth.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_csv_reports(capsys, tmp_path):
    assert run(capsys, "run", "--scenario", "perfect", "--format", "csv", "--compare-oracle", "--out", str(tmp_path))[0] == 0
    kpi = (tmp_path / "kpi.csv").read_text().splitlines()
    assert kpi[0] == "fire_time,availability,performance,quality,oee,flags"
    assert kpi[1].split(",")[1:5] == ["1.0", "1.0", "1.0", "1.0"]
    assert (tmp_path / "oracle.csv").exists()
    assert (tmp_path / "emissions.csv").read_text().startswith("query,fire_time_ms,row,variable,value,datatype,error")


def test_down_intervals(capsys, tmp_path):
    code, out, _ = run(capsys, "run", "--scenario", "perfect", "--down", "0-140", "--compare-oracle")
    assert code == 0 and "availability=0.9 " in out


def test_bad_down_value(capsys):
    assert run(capsys, "run", "--down", "lots")[0] == 2


def test_raw_isolation_run(capsys):
    code, out, _ = run(capsys, "run", "--scenario", "reference", "--raw-isolation", "--compare-oracle")
    assert code == 0 and "oee=0.78125" in out


def test_explain_listings(capsys):
    code, out, _ = run(capsys, "explain", LISTINGS)
    assert code == 0
    assert "QUERY  OEE: reads [Availability, Performance, Quality]" in out
    assert "http://cpps.example/stream/production" in out


def test_explain_single_query(capsys, tmp_path):
    q = tmp_path / "one.rq"
    q.write_text("REGISTER QUERY Q COMPUTED EVERY 1m AS SELECT ?s FROM STREAM <http://ex/s> [RANGE 1m STEP 1m] WHERE {?s ?p ?o}")
    code, out, _ = run(capsys, "explain", str(q))
    assert code == 0
    assert "Q: reads [-] feeds [-]" in out


def test_explain_cycle(capsys, tmp_path):
    q = tmp_path / "loop.rq"
    q.write_text(
        "REGISTER STREAM A COMPUTED EVERY 1m AS SELECT ?x FROM STREAM <http://cpps.example/stream/B> [RANGE 1m STEP 1m]\n"
        "REGISTER STREAM B COMPUTED EVERY 1m AS SELECT ?x FROM STREAM <http://cpps.example/stream/A> [RANGE 1m STEP 1m]\n"
    )
    code, _, err = run(capsys, "explain", str(q))
    assert code == 4
    assert "A -> B -> A" in err


class TestShippedFixtures:
    def test_listings(self):
        assert (DATA / "listings-paper.rq").read_text() == literal_listings_text()

    def test_pipeline(self):
        assert (DATA / "pipeline.rq").read_text() == executable_pipeline_text()

    def test_plant(self):
        assert PlantConfig.load(str(DATA / "plant-default.json")) == default_plant()
        assert parse_turtle((DATA / "plant-default.ttl").read_text()) == build_asset_graph(default_plant())

    @pytest.mark.parametrize("name", sorted(BUILTIN_SCENARIOS))
    def test_scenarios(self, name):
        assert ScenarioConfig.load(str(DATA / "scenarios" / f"{name}.json")) == BUILTIN_SCENARIOS[name]()
