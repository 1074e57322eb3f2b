import numpy as np
import pytest

from gclkit.hexmesh import build_box_mesh

PAPER_MESH = (10, 10, 10, 3.2, 2.8, 2.4)


@pytest.fixture(scope="session")
def paper_mesh():
    return build_box_mesh(*PAPER_MESH)


@pytest.fixture(scope="session")
def small_mesh():
    # same box, coarser: cheap stand-in where cell count is irrelevant
    return build_box_mesh(5, 5, 5, 3.2, 2.8, 2.4)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
