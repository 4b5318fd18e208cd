import os

import pytest
from hypothesis import HealthCheck, settings

from spinadder.spin_model import ChainSpec

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def chain5():
    return ChainSpec.for_spins(5)


@pytest.fixture
def chain9():
    return ChainSpec(L=4)
