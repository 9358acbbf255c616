import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def pytest_addoption(parser):
    parser.addoption(
        "--runtime-report", action="store_true", default=False,
        help="print acceptance runtimes")
