import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from timescale_lift.reference_models import example1_model, example2_coarse, example2_fine  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


@pytest.fixture(scope="session")
def ex1():
    return example1_model()


@pytest.fixture(scope="session")
def ex2_fine():
    return example2_fine()


@pytest.fixture(scope="session")
def ex2_coarse():
    return example2_coarse()


@pytest.fixture
def fixtures_dir():
    return FIXTURES
