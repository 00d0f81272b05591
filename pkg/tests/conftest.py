import random

import pytest

from anonchan.groupsig import gs_join, gs_setup
from anonchan.ibe import ibe_setup


@pytest.fixture
def rng():
    return random.Random(20241015)


@pytest.fixture(scope="session")
def group():
    gpk, ik = gs_setup(rng=random.Random(1))
    return gpk, ik


@pytest.fixture(scope="session")
def member(group):
    gpk, ik = group
    return gs_join(gpk, ik, random.Random(2))


@pytest.fixture(scope="session")
def kgc():
    return ibe_setup(rng=random.Random(3))


# one summary line per acceptance criterion, printed at the end of the run
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[2:])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{key} {'PASS' if ok else 'FAIL'} {detail}")
