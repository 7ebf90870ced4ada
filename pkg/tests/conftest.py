import sys

import numpy as np
import pytest
from hypothesis import settings

from intertwining.instances import make_rng
from intertwining.linalg import Tolerances

settings.register_profile("default", max_examples=25, deadline=None, derandomize=True)
settings.load_profile("default")


@pytest.fixture
def tol():
    return Tolerances()


@pytest.fixture
def rng():
    return make_rng(20240601)


def ladder_by_loops(d):
    """Lowering matrix built entry by entry from a e_n = sqrt(n) e_{n-1}."""
    a = np.zeros((d, d), dtype=complex)
    for n in range(1, d):
        a[n - 1, n] = np.sqrt(n)
    return a


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
