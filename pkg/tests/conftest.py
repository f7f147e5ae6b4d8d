import random

import pytest

from epay import ecash


@pytest.fixture
def rng():
    return random.Random(0xE9A7)


@pytest.fixture(scope="session")
def bank64():
    """One 64-bit-prime bank key pair shared by protocol tests."""
    return ecash.bank_keygen(64, random.Random(11))


@pytest.fixture
def toy_keys():
    return ecash.bank_keys_from_primes(5, 11)
