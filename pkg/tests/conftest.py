import sys

import pytest

from hogpred.law import get_law
from hogpred.syntax import Universe, close_universe

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


def closed_universe(law_name, size_bound, type_bound):
    law = get_law(law_name)
    u = Universe.build(size_bound, type_bound)
    close_universe(u, law.gamma)
    return u.freeze()


@pytest.fixture(scope="session")
def cbn():
    return get_law("xtcl-cbn")


@pytest.fixture(scope="session")
def small_universe():
    """Closed CBN universe at size 4, type 3; quick enough for property tests."""
    return closed_universe("xtcl-cbn", 4, 3)


@pytest.fixture(scope="session")
def closed_54():
    return closed_universe("xtcl-cbn", 5, 4)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
