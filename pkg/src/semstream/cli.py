"""Command-line driver.

Exit codes:
  0  success
  1  engine KPIs differ from the oracle (--compare-oracle)
  2  usage error or missing input file
  3  query syntax error
  4  query validation, registration or dependency-cycle error
  5  invalid asset or scenario configuration
  6  runtime error while evaluating
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import re
import sys
from dataclasses import dataclass, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .csparql import DEFAULT_STREAM_BASE, QuerySyntaxError, RegisteredQuery, parse_queries, validate_query
from .csparql.validate import stream_iri
from .dag import CycleError, dependency_graph, raw_inputs, topological_order
from .engine import EngineError, write_emission_log
from .kpi.pipeline import build_engine, kpis_at, load_pipeline, replay
from .report import kpi_records, write_emissions_csv, write_kpi_csv, write_kpi_json
from .simulator import BUILTIN_SCENARIOS, ScenarioConfig, ScenarioError, oracle_kpis, simulate
from .sosa import PlantConfig, PlantConfigError, default_plant

logger = logging.getLogger("semstream")

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_SYNTAX, EXIT_INVALID, EXIT_CONFIG, EXIT_RUNTIME = range(7)


class CliError(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


@dataclass
class RunSpec:
    asset_path: str | None = None
    scenario_path: str | None = None
    queries_path: str | None = None
    output_format: str = "json"
    seed: int | None = None
    mode: str = "run"  # run | parse-only | compare-oracle
    out_dir: str | None = None
    duration: int | None = None
    down: str | None = None
    defect_p: float | None = None
    raw_isolation: bool = False


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise CliError(EXIT_USAGE, f"no such file: {path}")
    return p.read_text(encoding="utf-8")


def _load_queries(path: str) -> list[RegisteredQuery]:
    # bare names of shipped query files resolve to the packaged copy
    if not Path(path).exists() and Path(_builtin(path)).is_file() and Path(path).name == path:
        path = _builtin(path)
    text = _read(path)
    try:
        return parse_queries(text)
    except QuerySyntaxError as exc:
        raise CliError(EXIT_SYNTAX, f"{path}: {exc}") from None


def _load_asset(path: str | None) -> PlantConfig:
    try:
        if path is None or path == "plant-default":
            return default_plant()
        asset = PlantConfig.from_dict(json.loads(_read(path)))
        asset.validate()
        return asset
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_CONFIG, f"{path}: {exc}") from None
    except PlantConfigError as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from None


def _parse_down(value: str, config: ScenarioConfig) -> ScenarioConfig:
    if re.fullmatch(r"\d+-\d+(,\d+-\d+)*", value):
        intervals = [tuple(int(x) for x in part.split("-")) for part in value.split(",")]
        return replace(config, downtime_intervals=intervals, downtime_probability=None)
    try:
        return replace(config, downtime_probability=float(value), downtime_intervals=[])
    except ValueError:
        raise CliError(EXIT_USAGE, f"--down expects a probability or START-END[,START-END...], got {value!r}") from None


def _load_scenario(spec: RunSpec) -> ScenarioConfig:
    name = spec.scenario_path or "reference"
    try:
        if name in BUILTIN_SCENARIOS:
            config = BUILTIN_SCENARIOS[name]()
        else:
            config = ScenarioConfig.from_dict(json.loads(_read(name)))
        if spec.seed is not None:
            config = replace(config, seed=spec.seed)
        if spec.duration is not None:
            config = replace(config, duration_minutes=spec.duration)
        if spec.down is not None:
            config = _parse_down(spec.down, config)
        if spec.defect_p is not None:
            config = replace(config, defect_probability=spec.defect_p, defect_products=None)
        config.validate()
        return config
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_CONFIG, f"{name}: {exc}") from None
    except (ScenarioError, TypeError) as exc:
        raise CliError(EXIT_CONFIG, f"invalid scenario: {exc}") from None


def _check(queries: list[RegisteredQuery], base: str = DEFAULT_STREAM_BASE) -> list[str]:
    """Validate a query file as a whole: each query sees its raw inputs and every produced stream."""
    deps = dependency_graph(queries, base)
    try:
        topological_order(deps)
    except CycleError as exc:
        raise CliError(EXIT_INVALID, str(exc)) from None
    catalog: dict[str, frozenset | None] = {iri: None for iri in raw_inputs(queries, base)}
    for q in queries:
        if q.is_stream:
            catalog[stream_iri(q.name, base)] = frozenset(q.output_vars())
    problems = []
    for q in queries:
        problems += [f"{q.name}: {d}" for d in validate_query(q, catalog, base)]
    return problems


def _summary(q: RegisteredQuery) -> str:
    sources = ", ".join(f"{s.stream_iri} [RANGE {s.range} STEP {s.step}]" for s in q.sources)
    return (
        f"{q.kind} {q.name} every {q.compute_every}: select {' '.join('?' + v for v in q.output_vars())}; "
        f"from {sources}; {len(q.where)} patterns, {len(q.aggregates)} aggregates"
    )


def cmd_parse_only(spec: RunSpec, out: io.TextIOBase) -> int:
    if spec.queries_path is None:
        raise CliError(EXIT_USAGE, "--parse-only requires --queries")
    queries = _load_queries(spec.queries_path)
    problems = _check(queries)
    for q in queries:
        print(_summary(q), file=out)
    print(f"{len(queries)} queries parsed", file=out)
    if problems:
        raise CliError(EXIT_INVALID, "\n".join(problems))
    return EXIT_OK


def cmd_run(spec: RunSpec, out: io.TextIOBase) -> int:
    if spec.mode == "parse-only":
        return cmd_parse_only(spec, out)
    asset = _load_asset(spec.asset_path)
    scenario = _load_scenario(spec)
    if spec.queries_path is not None:
        queries = _load_queries(spec.queries_path)
    else:
        queries = load_pipeline(
            "executable",
            plant=asset,
            total_time=scenario.duration_minutes,
            cycle_time=scenario.cycle_time_minutes,
            threshold=scenario.voltage_threshold,
        )
    problems = _check(queries)
    if problems:
        raise CliError(EXIT_INVALID, "\n".join(problems))

    try:
        engine = build_engine(asset, queries, raw_isolation=spec.raw_isolation)
        for iri in raw_inputs(queries):
            if iri not in engine.raw_inputs:
                engine.declare_input(iri)
        streams, truth = simulate(scenario, asset)
        end = scenario.duration_minutes * 60_000
        emissions = replay(engine, streams, end)
    except EngineError as exc:
        raise CliError(EXIT_RUNTIME, str(exc)) from None

    records = kpi_records(emissions)
    oracle = match = None
    if spec.mode == "compare-oracle":
        oracle = oracle_kpis(truth, scenario)
        match = kpis_at(emissions, end).close_to(oracle, 1e-9)

    files: dict[str, str] = {}
    buf = io.StringIO()
    if spec.output_format == "csv":
        write_emissions_csv(emissions, buf)
        files["emissions.csv"] = buf.getvalue()
        buf = io.StringIO()
        write_kpi_csv(records, buf)
        files["kpi.csv"] = buf.getvalue()
        if oracle is not None:
            buf = io.StringIO()
            write_kpi_csv([(end, oracle)], buf)
            files["oracle.csv"] = buf.getvalue()
    else:
        write_emission_log(emissions, buf)
        files["emissions.jsonl"] = buf.getvalue()
        buf = io.StringIO()
        write_kpi_json(records, buf, oracle, match)
        files["kpi.json"] = buf.getvalue()
    files["ground_truth.json"] = truth.to_json() + "\n"

    if spec.out_dir is not None:
        target = Path(spec.out_dir)
        target.mkdir(parents=True, exist_ok=True)
        for name, content in files.items():
            (target / name).write_text(content, encoding="utf-8")

    print(f"scenario {scenario.name}: {len(emissions)} emissions", file=out)
    for t, k in records:
        values = " ".join(f"{n}={'flagged' if v is None else format(float(v), '.10g')}" for n, v in k.factors().items())
        flags = f" flags={','.join(k.flags)}" if k.flags else ""
        print(f"t={t}ms {values}{flags}", file=out)
    if oracle is not None:
        values = " ".join(f"{n}={'flagged' if v is None else format(float(v), '.10g')}" for n, v in oracle.factors().items())
        print(f"oracle {values}", file=out)
        print("engine matches oracle" if match else "ENGINE DIFFERS FROM ORACLE", file=out)
        if not match:
            return EXIT_MISMATCH
    return EXIT_OK


def cmd_explain(queries_path: str, out: io.TextIOBase, base: str = DEFAULT_STREAM_BASE) -> int:
    queries = _load_queries(queries_path)
    deps = dependency_graph(queries, base)
    try:
        order = topological_order(deps)
    except CycleError as exc:
        raise CliError(EXIT_INVALID, str(exc)) from None
    by_name = {q.name: q for q in queries}
    consumers: dict[str, list[str]] = {n: [] for n in deps}
    for name, ds in deps.items():
        for d in ds:
            consumers[d].append(name)
    print("dependency order (producers first):", file=out)
    for name in order:
        q = by_name[name]
        upstream = ", ".join(deps[name]) or "-"
        downstream = ", ".join(consumers[name]) or "-"
        print(f"  {q.kind:6} {name}: reads [{upstream}] feeds [{downstream}]", file=out)
    print("raw inputs:", file=out)
    for iri in raw_inputs(queries, base):
        print(f"  {iri}", file=out)
    print("fire schedule:", file=out)
    for name in order:
        every = by_name[name].compute_every.millis
        print(f"  {name}: every {by_name[name].compute_every} ({every} ms), first at {every} ms", file=out)
    return EXIT_OK


def _builtin(name: str) -> str:
    return str(resources.files("semstream") / "data" / name)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semstream", description="Continuous RDF stream queries and OEE KPIs for a simulated production line.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario and evaluate the query pipeline")
    run.add_argument("--asset", help="plant config JSON (default: built-in plant-default)")
    run.add_argument("--scenario", help="scenario JSON or built-in name: " + ", ".join(BUILTIN_SCENARIOS))
    run.add_argument("--queries", help="query file (default: built-in executable pipeline)")
    run.add_argument("--format", choices=("json", "csv"), default="json")
    run.add_argument("--seed", type=int)
    run.add_argument("--duration", type=int, help="scenario length in minutes")
    run.add_argument("--down", help="downtime probability per minute, or intervals START-END[,START-END]")
    run.add_argument("--defect-p", type=float, dest="defect_p")
    run.add_argument("--out", help="directory for report files")
    run.add_argument("--raw-isolation", action="store_true", help="derived KPI queries may read only upstream result streams")
    mode = run.add_mutually_exclusive_group()
    mode.add_argument("--parse-only", action="store_true")
    mode.add_argument("--compare-oracle", action="store_true")

    explain = sub.add_parser("explain", help="print the stream dependency graph and fire schedule")
    explain.add_argument("queries", nargs="?", default=None, help="query file (default: built-in executable pipeline)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "explain":
            return cmd_explain(args.queries or _builtin("pipeline.rq"), sys.stdout)
        mode = "parse-only" if args.parse_only else "compare-oracle" if args.compare_oracle else "run"
        spec = RunSpec(
            asset_path=args.asset,
            scenario_path=args.scenario,
            queries_path=args.queries,
            output_format=args.format,
            seed=args.seed,
            mode=mode,
            out_dir=args.out,
            duration=args.duration,
            down=args.down,
            defect_p=args.defect_p,
            raw_isolation=args.raw_isolation,
        )
        return cmd_run(spec, sys.stdout)
    except CliError as exc:
        print(f"semstream: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
