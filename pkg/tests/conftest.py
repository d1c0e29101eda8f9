import re

import pytest

from churnforge.ingest import finalize_log
from churnforge.model import ArrivalEvent


def ev(worker, task, ts, win=False):
    return ArrivalEvent(worker, task, ts, win)


@pytest.fixture
def small_log():
    """Five workers, four tasks; hand-enumerated in test_network."""
    events = [
        ev("w1", "t1", 10, True), ev("w2", "t1", 10), ev("w3", "t1", 11),
        ev("w1", "t2", 20), ev("w4", "t2", 21, True),
        ev("w2", "t3", 30, True), ev("w3", "t3", 30), ev("w5", "t3", 31),
        ev("w1", "t4", 40), ev("w5", "t4", 40),
    ]
    return finalize_log(events)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            m = re.search(r"test_acceptance\.py::test_(ac\d+)_(\w+)(\[[^\]]*\])?", nodeid)
            if m and rep.when in ("call", "setup"):
                if outcome == "passed" and rep.when != "call":
                    continue
                name = m.group(2).replace("_", " ") + (" " + m.group(3) if m.group(3) else "")
                lines.append((m.group(1), name, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for ac, name, status in sorted(lines, key=lambda t: int(t[0][2:])):
            terminalreporter.write_line(f"{ac.upper():5s} {status}  {name}")
