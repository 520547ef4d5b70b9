import numpy as np
import pytest

from nlsobolev.assembly import assemble_stiffness
from nlsobolev.grid import square
from nlsobolev.kernels import Fractional


@pytest.fixture(scope="session")
def frac05():
    return Fractional(s=0.5)


@pytest.fixture(scope="session")
def grid17():
    return square(1.0, 17)


@pytest.fixture(scope="session")
def A17(grid17, frac05):
    return assemble_stiffness(grid17, frac05)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture(scope="session")
def nehari17(A17, grid17):
    from nlsobolev.solver import SolveConfig, nehari_ground_state

    return nehari_ground_state(A17, grid17, 3.0, SolveConfig(p=3.0))


@pytest.fixture(scope="session")
def mp17(A17, grid17):
    from nlsobolev.solver import SolveConfig, mountain_pass_solve

    return mountain_pass_solve(A17, grid17, 3.0, SolveConfig(p=3.0, method="mountain_pass", grad_tol=1e-6))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
