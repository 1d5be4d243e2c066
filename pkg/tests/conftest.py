import math

import numpy as np
import pytest

from isacwave import Scenario


@pytest.fixture
def paper_scenario():
    return Scenario()


@pytest.fixture
def desk_scenario():
    """Small instance for fast solver-level tests."""
    return Scenario(tx_antennas=8, rx_antennas=8, symbols=8, users=2,
                    max_inner=120, max_outer=12)


@pytest.fixture
def tiny_scenario():
    """T=2, N=1, M=1, K=1 instance used by the exhaustive oracle."""
    return Scenario(tx_antennas=2, rx_antennas=2, symbols=1, users=1,
                    interferers=((math.radians(-50.0), 1000.0),),
                    max_inner=300)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_cm_waveform(rng, scenario):
    n = scenario.tx_antennas * scenario.symbols
    phases = rng.uniform(0, 2 * np.pi, n)
    return scenario.cm_amplitude * np.exp(1j * phases)
