import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# First calls into the jitted kernels pay compilation; wall-clock deadlines
# would turn that into spurious failures.
settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
