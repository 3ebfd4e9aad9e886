import pytest

from momentsteer.densities import DensitySpec


@pytest.fixture(scope="session")
def examples():
    """The six worked setups: (initial, terminal, horizon, constraint)."""
    g01 = DensitySpec.gaussian(0.0, 1.0)
    glm = DensitySpec.generalized_logistic_mixture([0.4, 0.6], [1.0, -2.0], [2.0, 3.0])
    return {
        "ex1": (g01, DensitySpec.gaussian(1.0, 2.0), 4, None),
        "ex2": (g01, glm, 3, None),
        "ex3": (g01, DensitySpec.laplace_mixture([0.7, 0.3], [1.0, -3.0], [1.0, 1.0]), 4, None),
        "ex4": (DensitySpec.gaussian_mixture([0.5, 0.5], [0.0, -1.0], [2.0, 2.0]),
                DensitySpec.gaussian_mixture([0.4, 0.6], [1.0, -1.0], [1.0, 1.0]), 5, (-2.0, 2.0)),
        "ex5": (g01, DensitySpec.gaussian(1.0, 2.0), 4, None),
        "ex6": (g01, glm, 4, None),
    }


_ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's outcome for the end-of-run summary."""

    def record(number, ok, detail):
        _ACCEPTANCE[number] = (bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
