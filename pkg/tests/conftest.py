import numpy as np
import pytest

from cglmp.qstate import DensityOperator, PairState, werner_from_fidelity


def random_density(dim, rng, rank=None):
    """Ginibre-distributed random mixed state."""
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_pair(rng):
    return PairState(random_density(4, rng))


def random_bipartite(d, rng):
    return DensityOperator(random_density(d * d, rng), (d, d))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def ideal_pair():
    return werner_from_fidelity(1.0)


@pytest.fixture
def noisy_pair():
    return werner_from_fidelity(0.982)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
