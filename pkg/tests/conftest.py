"""
Shared fixtures: a test container and the services it wires
"""
from fractions import Fraction
import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from src.application.container.dependency_injection import ContainerFactory
from src.application.services.equilibrium_service import IEquilibriumService
from src.application.services.error_handling_service import IErrorHandlingService
from src.application.services.gadget_service import IGadgetService
from src.application.services.instance_io_service import IInstanceIOService
from src.application.services.property_check_service import IPropertyCheckService
from src.application.services.scheduling_service import ISchedulingService
from src.application.services.valuation_service import IValuationService
from src.domain.entities.game import NormalFormGame
from src.domain.entities.instances import CnfFormula
from src.domain.value_objects.valuation_spec import ValuationSpec


@pytest.fixture(scope="session")
def container():
    container = ContainerFactory.create_test_container()
    container.initialize()
    yield container
    container.shutdown()


@pytest.fixture(scope="session")
def valuations(container):
    return container.get_service(IValuationService)


@pytest.fixture(scope="session")
def scheduling(container):
    return container.get_service(ISchedulingService)


@pytest.fixture(scope="session")
def equilibria(container):
    return container.get_service(IEquilibriumService)


@pytest.fixture(scope="session")
def gadgets(container):
    return container.get_service(IGadgetService)


@pytest.fixture(scope="session")
def properties(container):
    return container.get_service(IPropertyCheckService)


@pytest.fixture(scope="session")
def io_service(container):
    return container.get_service(IInstanceIOService)


@pytest.fixture(scope="session")
def error_service(container):
    return container.get_service(IErrorHandlingService)


@pytest.fixture
def var1():
    return ValuationSpec.var_risk(1)


@pytest.fixture
def crawford_quarter(gadgets):
    return gadgets.crawford(Fraction(1, 4))


@pytest.fixture
def matching_pennies():
    costs = {
        (0, 0): (0, 1),
        (0, 1): (1, 0),
        (1, 0): (1, 0),
        (1, 1): (0, 1),
    }
    return NormalFormGame([["H", "T"], ["H", "T"]], costs, name="matching-pennies")


@pytest.fixture
def phi_or():
    """(v1 or v2)"""
    return CnfFormula.of([[1, 2]])


@pytest.fixture
def phi_unsat():
    """(v1) and (not v1)"""
    return CnfFormula.of([[1], [-1]])
