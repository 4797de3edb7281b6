import numpy as np
import pytest

from fixgen import kernels
from fixgen.bodies import Tube
from fixgen.geometry import Subspace


def warm_up_kernels():
    """Call each compiled kernel once so timings exclude compilation."""
    rng = np.random.default_rng(0)
    C = rng.standard_normal((5, 3))
    kernels.minmax_ball_center(C, np.full(5, 3.0), C[0].copy(), 1e-9)
    kernels.nearest_in_hull(C, np.ones(3), 1e-14)
    kernels.dykstra_halfspaces(np.ones(3), np.eye(3), np.zeros(3), 100, 1e-10)
    kernels.pairwise_ratio_max(C, C, 0.0)
    kernels.ball_slacks(C, np.ones(5), np.zeros(3))


@pytest.fixture(scope="session", autouse=True)
def _compiled():
    warm_up_kernels()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def tube6():
    """Radius-1 tube around span{e1, e2} in R^6."""
    return Tube(Subspace(np.eye(6)[:2]), 1.0)
