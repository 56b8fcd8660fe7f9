import numpy as np
import pytest

from biot.discretization import BiotDiscretization
from biot.problem import BiotParameters, ConstantCase, ManufacturedCase, WellCase

PARAMS = BiotParameters(lam=1e2, mu=1e2, alpha=1.0, c0=1e-2, k_p=1e-2)


def pytest_configure(config):
    np.seterr(over="raise", invalid="raise")


@pytest.fixture(scope="session")
def small_manufactured():
    """Manufactured case on a 4x4 mesh with (P2, P1, P2)."""
    return BiotDiscretization(ManufacturedCase(), 4, degree_u=2, degree_p=2)


@pytest.fixture(scope="session")
def small_well():
    return BiotDiscretization(WellCase(), 4, degree_u=2, degree_p=2)


@pytest.fixture(scope="session")
def zero_case():
    return BiotDiscretization(ConstantCase(PARAMS), 3, degree_u=2, degree_p=1)
