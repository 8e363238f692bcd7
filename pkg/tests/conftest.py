import os

import hypothesis
import numpy as np
import pytest

from hartree_lab.grid import GridSpec

np.seterr(all="warn", under="ignore")

hypothesis.settings.register_profile("default", max_examples=20, deadline=None, derandomize=True)
hypothesis.settings.register_profile("thorough", max_examples=200, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None, derandomize=True)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def grid1():
    return GridSpec(1, 16.0, 1024)


@pytest.fixture(scope="session")
def grid2():
    return GridSpec(2, 10.0, 128)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
