import numpy as np
import pytest

from ibap.fixtures import degenerate_fixtures

ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def degenerate():
    return degenerate_fixtures(0)


@pytest.fixture
def record(request):
    """Store one acceptance line per criterion, printed in the terminal summary."""
    marker = request.node.get_closest_marker("criterion")
    number, name = marker.args

    def _record(ok: bool, detail: str):
        ACCEPTANCE[number] = (name, bool(ok), detail)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        name, ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:2d} {name}: {detail}")
