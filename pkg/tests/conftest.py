import pytest

from config import Caps
from core_groups import alternating_group, cyclic_group, dihedral, symmetric_group


@pytest.fixture
def sym3():
    return symmetric_group(3)


@pytest.fixture
def alt5():
    return alternating_group(5)


@pytest.fixture
def z_infinite():
    return cyclic_group(0)


@pytest.fixture
def d_infinite():
    return dihedral("inf")


@pytest.fixture
def caps():
    return Caps()
