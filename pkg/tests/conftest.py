import pytest

from sctrace.model import DoubleWell, build_potential, harmonic


@pytest.fixture(scope="session")
def shallow():
    return build_potential(DoubleWell(0.15, 5.0))


@pytest.fixture(scope="session")
def deep():
    return build_potential(DoubleWell(3.0, 5.0))


@pytest.fixture(scope="session")
def oscillator():
    return build_potential(harmonic(1.0))
