from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from ltstore.parties import System, SystemConfig

settings.register_profile("ltstore", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ltstore")

TINY = SystemConfig(N=4, block_size_L=64, horizon_years=30)


@pytest.fixture
def tiny_cfg() -> SystemConfig:
    return TINY


@pytest.fixture
def tiny_system() -> System:
    return System.create(TINY)
