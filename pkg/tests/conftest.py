import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from util import FIXTURES  # noqa: E402

from gridshield.network import parse_network  # noqa: E402


@pytest.fixture(scope="session")
def ieee15():
    return parse_network(FIXTURES / "ieee15.json")


@pytest.fixture()
def tiny2():
    return parse_network(FIXTURES / "tiny2.json")


@pytest.fixture()
def tiny3():
    return parse_network(FIXTURES / "tiny3.json")


@pytest.fixture()
def tiny2b():
    return parse_network(FIXTURES / "tiny2b.json")
