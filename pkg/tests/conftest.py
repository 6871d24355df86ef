import numpy as np
import pytest

from singtrace.triples import build_circle, build_diagonal_toy, build_nc_torus


@pytest.fixture(scope="session")
def circle64():
    return build_circle(64)


@pytest.fixture(scope="session")
def circle256():
    return build_circle(256)


@pytest.fixture(scope="session")
def torus12():
    return build_nc_torus(12)


@pytest.fixture(scope="session")
def torus16():
    return build_nc_torus(16)


@pytest.fixture(scope="session")
def toy1000():
    return build_diagonal_toy(1000, decay_exponent=1)


def random_unitary(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
