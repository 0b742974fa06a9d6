import pytest
from hypothesis import HealthCheck, settings

from flatreach.corpus import db_corpus, oct_corpus, octagon_set_corpus

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# fixed seeds shared by the acceptance suite and the unit tests
DB_SEED = 20240
OCT_SEED = 20241
OCT_SET_SEED = 20242

CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def db_relations():
    return db_corpus(DB_SEED, 200, max_vars=4, lo=-3, hi=3)


@pytest.fixture(scope="session")
def oct_relations():
    return oct_corpus(OCT_SEED, 100, max_vars=3, lo=-5, hi=5)


@pytest.fixture(scope="session")
def octagon_sets():
    return octagon_set_corpus(OCT_SET_SEED, 100, max_vars=3, lo=-5, hi=5)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        ok, detail = CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
