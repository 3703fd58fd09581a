import pytest

from wsnroute.config import SimConfig, Strategy, TrafficMode
from wsnroute.engine import SimState
from wsnroute.network import place


def make_state(positions, strategy=Strategy.MECRT, **overrides):
    config = SimConfig(node_count=max(len(positions), 1), strategy=strategy, **overrides)
    return SimState(config, place(positions, config))


@pytest.fixture
def table1():
    return SimConfig()


@pytest.fixture
def random_source():
    return SimConfig(traffic_mode=TrafficMode.RANDOM_SOURCE)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the assertion stays in the test."""
    def record(number, name, ok, detail):
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
