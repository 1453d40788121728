import sys

import pytest

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: pipeline-scale checks")


@pytest.fixture
def small_config():
    from ilp_workbench.config import Config
    return Config(budget=50_000, max_size=2, vars=("p",), max_worlds=2)
