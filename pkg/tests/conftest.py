import numpy as np
import pytest

from softcover import Channel, Distribution


@pytest.fixture(scope="session")
def zchannel():
    return Channel([[1.0, 0.0], [0.45, 0.55]])


@pytest.fixture(scope="session")
def bsc():
    return Channel([[0.9, 0.1], [0.1, 0.9]])


@pytest.fixture(scope="session")
def uniform2():
    return Distribution([0.5, 0.5])


@pytest.fixture(scope="session")
def random_2x3_channels():
    rng = np.random.default_rng(20240817)
    channels = []
    for _ in range(4):
        rows = rng.dirichlet([2.0, 2.0, 2.0], size=2)
        rows = np.clip(rows, 0.02, None)
        rows = rows / rows.sum(axis=1, keepdims=True)
        channels.append(Channel(rows))
    return channels
