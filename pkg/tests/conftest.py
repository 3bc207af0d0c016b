from importlib import resources

import pytest

from semstream.sosa import build_asset_graph, default_plant
from semstream.turtle import parse_turtle


def data_path(name: str) -> str:
    return str(resources.files("semstream") / "data" / name)


@pytest.fixture
def plant():
    return default_plant()


@pytest.fixture
def asset_graph(plant):
    return build_asset_graph(plant)


@pytest.fixture(scope="session")
def shipped_asset_graph():
    with open(data_path("plant-default.ttl"), encoding="utf-8") as fh:
        return parse_turtle(fh.read())


_VERDICTS_KEY = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record and print one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(_VERDICTS_KEY, [])

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_VERDICTS_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
