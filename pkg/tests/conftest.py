import numpy as np
import pytest

from polyproj import template_polygons

TEMPLATE_NAMES = sorted(template_polygons())


@pytest.fixture(scope="session")
def templates():
    return template_polygons()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
