"""
Shared fixtures for the ACE test suite.
"""

import os
import sys

import pytest

# Add the parent directory to the path so we can import modules
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.crypto_suite import SeededRandomSource, perm_keygen  # noqa: E402
from src.protocol import setup  # noqa: E402

# ID1 {w1, w2}, ID2 {w1, w3}, ID3 {w1, w3}
EXAMPLE_RECORDS = [
    (b"ID1", ["w1", "w2"]),
    (b"ID2", ["w1", "w3"]),
    (b"ID3", ["w1", "w3"]),
]


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run acceptance-scale tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale run, enabled with --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def perm_keys():
    """One RSA key pair for the whole session; key generation dominates setup time."""
    return perm_keygen(rng=SeededRandomSource(2024, label=b"ace/test-perm"), modulus_bits=1024)


@pytest.fixture
def system(perm_keys):
    return setup(rng=SeededRandomSource(11), perm_keys=perm_keys)


@pytest.fixture
def example_db(system):
    """System after the three-record batch has been added and synchronized."""
    trustee, vetter, server = system
    batch, w_delta = trustee.add_batch(EXAMPLE_RECORDS)
    server.apply_add(batch)
    vetter.sync(w_delta)
    return system
