import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=30,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

TWO_PI = 2.0 * math.pi


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
