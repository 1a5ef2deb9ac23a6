import pytest

import sincount as sc


@pytest.fixture(scope="session")
def scen_m4():
    return sc.standard_scenario(-4.0)


@pytest.fixture(scope="session")
def scen_0():
    return sc.standard_scenario(0.0)


@pytest.fixture(scope="session")
def dists_m4(scen_m4):
    return sc.component_dists(scen_m4)
