import os

import pytest
from hypothesis import HealthCheck, settings

from zsl.spectral import Grid2D

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def g64():
    return Grid2D(64, 64)


@pytest.fixture(scope="session")
def g32():
    return Grid2D(32, 32)
