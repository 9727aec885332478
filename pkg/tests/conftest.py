import numpy as np
import pytest

from iasim import NetworkConfig

# Mixed-user-class benchmark: BS i sends i streams to its own user and one
# to the next cell's user; receivers carry 3, 4 and 5 antennas.
BENCHMARK_DEMAND = ((1, 1, 0), (0, 2, 1), (1, 0, 3))


def benchmark_config(m_tx: int = 10) -> NetworkConfig:
    return NetworkConfig(cells=3, overlap=2, m_tx=(m_tx,) * 3,
                         n_rx=(3, 4, 5), demand=BENCHMARK_DEMAND)


@pytest.fixture
def benchmark() -> NetworkConfig:
    return benchmark_config()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0xA11CE)
