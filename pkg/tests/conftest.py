import pytest

import coarsemedian as cm


@pytest.fixture(scope="session")
def cube3():
    return cm.gen_hypercube(3)


@pytest.fixture(scope="session")
def grid44():
    return cm.gen_grid([4, 4])


@pytest.fixture(scope="session")
def grid44_metric(grid44):
    return cm.induced_metric(grid44)


@pytest.fixture(scope="session")
def tree20():
    return cm.gen_tree_random(20, 7)


@pytest.fixture(scope="session")
def tree20_metric(tree20):
    return cm.induced_metric(tree20)


@pytest.fixture(scope="session")
def perturbed44(grid44, grid44_metric):
    return cm.perturb(grid44, grid44_metric, cm.PerturbationSpec(1, 3))
