import numpy as np
import pytest

from lightray.catalog import make_einstein_static, make_minkowski, make_perturbed_minkowski


@pytest.fixture(scope="session")
def mink3():
    return make_minkowski(3).metric


@pytest.fixture(scope="session")
def mink4():
    return make_minkowski(4).metric


@pytest.fixture(scope="session")
def geps():
    return make_perturbed_minkowski(0.5).metric


@pytest.fixture(scope="session")
def einstein():
    return make_einstein_static().metric


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
