import numpy as np
import pytest

from xnetsim.channel import make_rng


@pytest.fixture
def rng():
    return make_rng(20240601)


def random_cmat(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line; call as ``criterion(n, passed, detail)``."""

    def record(n, passed, detail):
        line = f"CRITERION {n:>2}: {'PASS' if passed else 'FAIL'} | {detail}"
        _CRITERIA.append((n, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_CRITERIA):
            terminalreporter.write_line(line)
