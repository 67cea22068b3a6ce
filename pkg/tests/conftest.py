import pytest

from roomaudit.fixtures import golden_ground_truth, golden_scene
from roomaudit.rules import builtin_rule_pack


@pytest.fixture(scope="session")
def golden():
    return golden_scene()


@pytest.fixture(scope="session")
def ground_truth():
    return golden_ground_truth()


@pytest.fixture(scope="session")
def pack():
    return builtin_rule_pack()
