import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from spincm.algebra import build_representation, build_root_system

settings.register_profile(
    "default", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ALGEBRAS = [("A", 1), ("A", 2), ("A", 3), ("B", 2), ("B", 3), ("C", 2), ("C", 3), ("D", 3), ("D", 4)]


def rep_of(family, rank):
    return build_representation(build_root_system(family, rank))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def sl2():
    return rep_of("A", 1)


@pytest.fixture(scope="session")
def sl3():
    return rep_of("A", 2)


@pytest.fixture(scope="session")
def so5():
    return rep_of("B", 2)
