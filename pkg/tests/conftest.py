import pytest

from bchsim.energy import EnergyPeriodTable
from bchsim.evans import build_eig_table
from bchsim.waves import Params


@pytest.fixture(scope="session")
def params():
    return Params()


@pytest.fixture(scope="session")
def energy_table(params):
    return EnergyPeriodTable.build(params)


@pytest.fixture(scope="session")
def eig_table(params):
    return build_eig_table(params)
