import sys

import pytest

from complag import kernels
from complag.systems import load_builtin


@pytest.fixture(scope="session")
def central_force():
    return load_builtin("central-force")


@pytest.fixture(scope="session")
def hinged_rod():
    return load_builtin("hinged-rod")


@pytest.fixture(scope="session")
def oscillator():
    return load_builtin("harmonic-oscillator")


@pytest.fixture(scope="session")
def free_particle():
    return load_builtin("free-particle")


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request):
    return kernels.BACKENDS[request.param]


_started = {}


def pytest_sessionstart(session):
    import time

    _started["t"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    import time

    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    elapsed = time.perf_counter() - _started.get("t", time.perf_counter())
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        passed, detail = results[number]
        if number == 8:
            passed = passed and elapsed < 60
            detail += f"; full suite {elapsed:.1f} s (< 60 s)"
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
