import pytest

from prolate_sampling.pswf import solve_pswf
from prolate_sampling.quadrature import lgl_rule


@pytest.fixture(scope="session")
def basis_c10():
    return solve_pswf(10.0, 40)


@pytest.fixture(scope="session")
def basis_c20():
    return solve_pswf(20.0, 60)


@pytest.fixture(scope="session")
def basis_c40():
    return solve_pswf(40.0, 80)


@pytest.fixture(scope="session")
def rule100():
    return lgl_rule(100)


@pytest.fixture(scope="session")
def rule200():
    return lgl_rule(200)
