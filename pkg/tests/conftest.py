"""Shared fixtures."""
import numpy as np
import pytest

from services import scenario, states


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def observables():
    return scenario.su4_observables()


@pytest.fixture
def psi_e():
    return states.maximally_entangled_state(4)
