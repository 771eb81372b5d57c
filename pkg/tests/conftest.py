import numpy as np
import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--seed",
        type=int,
        default=12345,
        help="seed for the randomized property tests",
    )


@pytest.fixture
def rng(request):
    return np.random.default_rng(request.config.getoption("--seed"))
