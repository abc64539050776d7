import pytest
from hypothesis import settings

from scripts.sullivan import minimal_model
from utils.operad_core import builtin

settings.register_profile("operadiq", derandomize=True, deadline=None, max_examples=40)
settings.load_profile("operadiq")


# OPERADS
@pytest.fixture(scope="session")
def ass():
    return builtin("Ass", 4)


@pytest.fixture(scope="session")
def ass_plus():
    return builtin("Ass+", 4)


@pytest.fixture(scope="session")
def com():
    return builtin("Com", 4)


@pytest.fixture(scope="session")
def com_plus():
    return builtin("Com+", 4)


# MODELS (computed once per session)
@pytest.fixture(scope="session")
def ass_model(ass):
    return minimal_model(ass, 4)


@pytest.fixture(scope="session")
def ass_plus_model(ass_plus):
    return minimal_model(ass_plus, 4, "unitary")


@pytest.fixture(scope="session")
def com_model(com):
    return minimal_model(com, 4)


@pytest.fixture(scope="session")
def com_plus_model(com_plus):
    return minimal_model(com_plus, 4, "unitary")
