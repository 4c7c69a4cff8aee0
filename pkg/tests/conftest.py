import numpy as np
import pytest
from hypothesis import settings

from levymem import kernel as kn
from levymem.grid import Grid
from levymem.nonlocal_op import assemble

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def frac_half():
    return kn.fractional(0.5)


@pytest.fixture(scope="session")
def op64(frac_half):
    return assemble(frac_half, Grid(-1.0, 1.0, 64))


@pytest.fixture(scope="session")
def op128(frac_half):
    return assemble(frac_half, Grid(-1.0, 1.0, 128))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
