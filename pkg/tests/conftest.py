import functools

import pytest

from kramers_hs import KramersProblem, KramersSolution, ModelParameters

ACCEPTANCE = {}


@functools.lru_cache(maxsize=None)
def solution(gamma, omega, G_v=1.0):
    return KramersSolution(KramersProblem(ModelParameters(gamma, omega), G_v))


@pytest.fixture(scope="session")
def base_params():
    return ModelParameters(4 / 15, 0.0)


@pytest.fixture(scope="session")
def base_solution():
    return solution(4 / 15, 0.0)


@pytest.fixture(scope="session", params=[(4 / 15, 0.0), (0.3, 0.5), (0.4, 1.0)],
                ids=["g4/15-w0", "g0.3-w0.5", "g0.4-w1"])
def grid_solution(request):
    return solution(*request.param)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split()[0]), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
