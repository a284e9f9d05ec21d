# ## @DOC
# ### Conftest
# Adds a --seed option for the randomized oracle tests and shared fixtures for repo paths and default parameters.



"""Pytest configuration for the MRR simulator tests."""

import random
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.append(str(Path(__file__).parent.parent / "bin"))

ROOT = Path(__file__).resolve().parent.parent


def pytest_addoption(parser):
    """Add --seed option to reproduce a randomized run."""
    parser.addoption(
        "--seed",
        action="store",
        type=int,
        default=20240601,
        help="Seed for the randomized mapping oracle tests",
    )


@pytest.fixture
def seed(request):
    return request.config.getoption("--seed")


@pytest.fixture
def rng(seed):
    random.seed(seed)
    return np.random.default_rng(seed)


@pytest.fixture
def workloads_dir():
    return ROOT / "config" / "workloads"


@pytest.fixture
def arch_dir():
    return ROOT / "config" / "arch"


@pytest.fixture
def peripherals():
    from MRR_archmodel import default_peripherals

    return default_peripherals()
