import datetime as dt

import pytest

from phr_abe import cpabe
from phr_abe.pairing import PairingGroup, seeded_rng
from phr_abe.timeval import ValiditySet

# acceptance verdicts, echoed in the terminal summary so they survive capture
VERDICTS = []

WINDOW = ValiditySet.between("2020-06-20", "2020-06-22")
INSIDE = dt.date(2020, 6, 21)
AFTER = dt.date(2020, 6, 23)


@pytest.fixture(scope="session")
def group():
    return PairingGroup()


@pytest.fixture(scope="session")
def scheme(group):
    """(pk, mk, setup transcript) from a fixed seed."""
    tr = {}
    pk, mk = cpabe.setup(group, seeded_rng(2020), transcript=tr)
    return pk, mk, tr


@pytest.fixture
def rng(request):
    # stable per test, different across tests
    return seeded_rng(request.node.nodeid)


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(VERDICTS):
        terminalreporter.write_line(line[1])
