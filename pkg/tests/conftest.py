import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def tiny_tsp():
    import numpy as np

    from betrun.tsp import TspInstance

    rng = np.random.default_rng(7)
    return TspInstance("tiny", np.round(rng.uniform(0, 1000, size=(30, 2)), 1))


@pytest.fixture
def tiny_graph():
    import numpy as np

    from betrun.mvc import Graph

    rng = np.random.default_rng(7)
    n = 40
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.12]
    return Graph.from_edges(n, pairs, name="tiny")


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance(capsys):
    """Record one PASS/FAIL line per acceptance criterion."""

    def report(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
