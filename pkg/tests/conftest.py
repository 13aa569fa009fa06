"""Shared fixtures."""
import pytest

from lackwalk.lattice import CoinSpec, build_lattice
from lackwalk.operators import MarkedSet


@pytest.fixture
def ring():
    return build_lattice(1, 7)


@pytest.fixture
def torus():
    return build_lattice(2, 4)


@pytest.fixture
def g_coin():
    return CoinSpec("g", 0.3)


@pytest.fixture
def single_marked():
    return MarkedSet.of([0])
