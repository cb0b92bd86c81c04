import numpy as np
import pytest

from src.turbo import CodeConfig


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run Monte Carlo checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=[40, 96], ids=lambda k: f"k{k}")
def code(request):
    return CodeConfig.for_size(request.param)


@pytest.fixture
def code40():
    return CodeConfig.for_size(40)
