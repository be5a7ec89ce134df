import numpy as np
import pytest

from graftlab import settings
from graftlab.presets import REGISTRY


@pytest.fixture(autouse=True)
def _fresh_tolerances():
    settings.reset()
    yield
    settings.reset()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def genus2_track():
    return REGISTRY.track("genus2-track-A")


@pytest.fixture
def genus2_L():
    return REGISTRY.weights("genus2-track-A/L")[1]


@pytest.fixture
def genus2_M():
    return REGISTRY.weights("genus2-track-A/M")[1]


@pytest.fixture
def bolza():
    return REGISTRY.surface("bolza")
