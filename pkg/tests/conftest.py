import pytest

from decaysurge import ParamFamily, make_family, make_model
from decaysurge.validation import (
    chains_model,
    explosive_model,
    hawkes_model,
    linear_model,
    release_model,
)


@pytest.fixture(scope="session")
def linear():
    # alpha = x, beta = 0.5, k = e^{-x}: positive recurrent, Gamma(0.5, 1) law
    return linear_model()


@pytest.fixture(scope="session")
def release():
    # alpha = 1, beta = 0.5, k = e^{-x}: 0 is regular, extinction time 2x
    return release_model()


@pytest.fixture(scope="session")
def explosive():
    # alpha = x^2, beta = 1 + x^2, k = e^{-x/2}: finite scale limit
    return explosive_model()


@pytest.fixture(scope="session")
def hawkes_sub():
    return hawkes_model(0.8)


@pytest.fixture(scope="session")
def hawkes_super():
    return hawkes_model(1.2)


@pytest.fixture(scope="session")
def chainsm():
    # alpha = x, beta = 1, k = e^{-x}
    return chains_model()


@pytest.fixture()
def exp_survival():
    return make_family(ParamFamily("exponential-survival", {"theta": 1.0}))
