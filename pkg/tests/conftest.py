import numpy as np
import pytest

from spde_moments import _backend


@pytest.fixture(params=_backend.available())
def backend(request):
    """Every kernel backend importable in this environment."""
    return request.param


@pytest.fixture
def gen():
    return np.random.default_rng(20240611)


_ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def record_criterion(request):
    """Store one pass/fail line per acceptance criterion for the terminal summary."""
    store = request.config.stash.setdefault(_ACCEPTANCE_KEY, {})

    def record(number: int, passed: bool, detail: str):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        store[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_ACCEPTANCE_KEY, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        terminalreporter.write_line(store[number])
