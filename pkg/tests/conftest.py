import random

import pytest

from fescore.pairing import setup


@pytest.fixture(scope="session")
def ctx():
    return setup()


@pytest.fixture()
def rng():
    return random.Random(0xFE5C04E)


@pytest.fixture()
def rng_factory():
    return lambda seed: random.Random(seed)
