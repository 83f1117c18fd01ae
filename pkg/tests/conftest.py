import pytest

from gaugelab.graph import make_graph
from gaugelab.group import U1Truncated, make_cyclic, make_dihedral, make_quaternion


@pytest.fixture
def single_edge():
    return make_graph([0, 1], [(0, 0, 1)])


@pytest.fixture
def chain2():
    return make_graph([0, 1, 2], [(0, 0, 1), (1, 1, 2)])


@pytest.fixture
def triangle():
    return make_graph([0, 1, 2], [(0, 0, 1), (1, 1, 2), (2, 2, 0)])


@pytest.fixture
def star():
    return make_graph([0, 1, 2, 3], [(0, 0, 1), (1, 0, 2), (2, 0, 3)])


@pytest.fixture
def z2():
    return make_cyclic(2)


@pytest.fixture
def z3():
    return make_cyclic(3)


@pytest.fixture
def z4():
    return make_cyclic(4)


@pytest.fixture
def d3():
    return make_dihedral(3)


@pytest.fixture
def q8():
    return make_quaternion()


@pytest.fixture
def u1_2():
    return U1Truncated(2)


@pytest.fixture(params=["z2", "z3", "d3", "q8"])
def finite_group(request, z2, z3, d3, q8):
    return {"z2": z2, "z3": z3, "d3": d3, "q8": q8}[request.param]
