import numpy as np
import pytest

from qgames.qcore import Channel, DensityMatrix, StateVector

_ACCEPTANCE = []


def random_state(rng, dim=2):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector(v, normalize=True)


def random_density(rng, dim=2, rank=None):
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho))


def random_channel(rng, dim=2, n_kraus=3):
    # Kraus operators are the blocks of a random isometry dim -> n_kraus * dim
    g = rng.normal(size=(n_kraus * dim, dim)) + 1j * rng.normal(size=(n_kraus * dim, dim))
    q, _ = np.linalg.qr(g)
    return Channel([q[k * dim:(k + 1) * dim, :] for k in range(n_kraus)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def record_criterion(line):
    _ACCEPTANCE.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
