import pytest

from divvar.sieve import sieve_dk
from divvar.weights import Normalization, make_bump


@pytest.fixture(scope="session")
def table_k2():
    return sieve_dk(2, 50000)


@pytest.fixture(scope="session")
def table_k3():
    return sieve_dk(3, 50000)


@pytest.fixture(scope="session")
def psi():
    return make_bump(1, 2, Normalization.INTEGRAL_OF_SQUARE_ONE)


@pytest.fixture(scope="session")
def phi():
    return make_bump(1, 2, Normalization.INTEGRAL_ONE)
