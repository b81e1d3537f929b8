from __future__ import annotations

import pytest
from hypothesis import settings

from lcscore.io import default_taxonomy, fixture_leaderboard
from lcscore.synthetic import synthetic_surface

# first calls warm caches (exact-permutation tables), so wall-clock deadlines are noise
settings.register_profile("lcscore", deadline=None)
settings.load_profile("lcscore")


@pytest.fixture(scope="session")
def config():
    return default_taxonomy()


@pytest.fixture(scope="session")
def surface(config):
    return synthetic_surface(config, n_models=10, seed=7)


@pytest.fixture(scope="session")
def board_128k():
    return fixture_leaderboard("128k")


@pytest.fixture(scope="session")
def board_1m():
    return fixture_leaderboard("1m")
