import os

import pytest
from hypothesis import HealthCheck, settings

from latledger.commit import expand_keys, keygen
from latledger.ledger import pp_seed
from latledger.params import desk_params
from latledger.ring import get_ring
from latledger.sampling import Rng

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.register_profile("thorough", deadline=None, max_examples=400,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CRITERIA = {}


@pytest.fixture(scope="session")
def params():
    return desk_params()


@pytest.fixture(scope="session")
def ring(params):
    return get_ring(params)


@pytest.fixture(scope="session")
def keys(params):
    return expand_keys(params, pp_seed(b"tests"))


@pytest.fixture
def rng(request):
    return Rng(request.node.nodeid)


@pytest.fixture(scope="session")
def keypair(keys):
    return keygen(keys, Rng(b"fixture-key-1"))


@pytest.fixture(scope="session")
def other_keypair(keys):
    return keygen(keys, Rng(b"fixture-key-2"))


@pytest.fixture(scope="session")
def criterion():
    """record(number, ok, detail) stores one acceptance line for the summary."""
    def record(number: int, ok: bool, detail: str):
        CRITERIA[number] = (ok, detail)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
