import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

K0 = 2 * np.pi


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


# one line per acceptance criterion, collected by tests/test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_sessionstart(session):
    import time
    session.config._fibersim_t0 = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    import time
    if not ACCEPTANCE_LINES:
        return
    elapsed = time.perf_counter() - config._fibersim_t0
    tr = terminalreporter
    tr.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        tr.write_line(line)
    tr.write_line(f"suite runtime {elapsed:.1f} s (budget 60 s): {'PASS' if elapsed < 60 else 'FAIL'}")
