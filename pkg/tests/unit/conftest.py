import pytest

from anisodiff import conf
from anisodiff.config import Config
from anisodiff.grid import make_grid_2d


@pytest.fixture(scope='module', autouse=True)
def tight_cg_tolerance(request):
    """ Solve tightly when running tests in this module. """
    tmp = conf.CG_RTOL
    conf.CG_RTOL = 1e-12

    def fin():
        conf.CG_RTOL = tmp

    request.addfinalizer(fin)


@pytest.fixture
def config():
    return Config()


@pytest.fixture
def periodic_grid():
    """ Unit square with 11 x 11 points. """
    return make_grid_2d(0., 1., 11, 0., 1., 11)


@pytest.fixture
def small_grid():
    """ Rectangle with different number of points in x and y. """
    return make_grid_2d(0., 2., 9, -1., 1., 7)
