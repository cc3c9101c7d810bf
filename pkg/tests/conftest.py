import json
import pathlib

import numpy as np
import pytest

ORACLES = json.loads(
    (pathlib.Path(__file__).parent / "oracles" / "frozen.json").read_text())


@pytest.fixture(scope="session")
def oracles():
    return ORACLES


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
