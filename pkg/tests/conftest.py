import pytest
from hypothesis import HealthCheck, settings

from levy_mmm import models

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

POWER_SPECS = models.power_specs()


@pytest.fixture
def golden():
    return models.two_asset_triplet(), models.two_asset_divergence()


@pytest.fixture
def brownian():
    return models.pure_diffusion(0.0, 1.0)


@pytest.fixture
def two_atom():
    return models.two_atom()


def acceptance_cases():
    """``(label, triplet, spec)`` for every model the acceptance suite runs on."""
    return models.catalogue()
