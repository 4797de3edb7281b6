"""Both kernel backends against each other and against scipy oracles."""
import numpy as np
import pytest
from scipy.optimize import minimize

from fixgen import _kernels_numba as nb
from fixgen import _kernels_numpy as npk

BACKENDS = [nb, npk]


def slsqp_minmax(C, rad, y0):
    """min_y max_i ||y - c_i|| - r_i as an epigraph problem."""
    d = C.shape[1]
    cons = [{"type": "ineq", "fun": lambda z, c=c, r=r: z[-1] + r - np.linalg.norm(z[:-1] - c)} for c, r in zip(C, rad)]
    z0 = np.r_[y0, (np.linalg.norm(C - y0, axis=1) - rad).max() + 1.0]
    res = minimize(lambda z: z[-1], z0, constraints=cons, method="SLSQP", options={"ftol": 1e-14, "maxiter": 1000})
    return res.x[:d], res.x[-1]


@pytest.mark.parametrize("mod", BACKENDS, ids=["numba", "numpy"])
def test_minmax_against_slsqp(mod):
    rng = np.random.default_rng(1)
    for _ in range(20):
        m, d = rng.integers(2, 12), rng.integers(2, 5)
        C = rng.standard_normal((m, d))
        rad = rng.uniform(0.5, 2.0, m)
        y, val, _ = mod.minmax_ball_center(C, rad, C[0].copy(), 1e-10)
        _, ref = slsqp_minmax(C, rad, C.mean(axis=0))
        assert val == pytest.approx((np.linalg.norm(C - y, axis=1) - rad).max(), abs=1e-12)
        assert val <= ref + 1e-7


def test_backends_agree_on_minmax():
    rng = np.random.default_rng(2)
    for _ in range(20):
        C = rng.standard_normal((30, 6))
        rad = rng.uniform(1.0, 3.0, 30)
        a = nb.minmax_ball_center(C, rad, C[0].copy(), 1e-10)[1]
        b = npk.minmax_ball_center(C, rad, C[0].copy(), 1e-10)[1]
        assert abs(a - b) <= 1e-7


@pytest.mark.parametrize("mod", BACKENDS, ids=["numba", "numpy"])
def test_nearest_in_hull_against_slsqp(mod):
    rng = np.random.default_rng(3)
    for _ in range(20):
        V = rng.standard_normal((7, 4))
        x = 2.0 * rng.standard_normal(4)
        y, w = mod.nearest_in_hull(V, x, 1e-14)
        assert w.min() >= -1e-12 and abs(w.sum() - 1) <= 1e-12
        assert np.allclose(w @ V, y, atol=1e-12)
        res = minimize(lambda u: np.sum((u @ V - x) ** 2), np.full(7, 1 / 7), method="SLSQP",
                       bounds=[(0, 1)] * 7, constraints=[{"type": "eq", "fun": lambda u: u.sum() - 1}],
                       options={"ftol": 1e-15, "maxiter": 500})
        assert np.linalg.norm(y - x) <= np.linalg.norm(res.x @ V - x) + 1e-7


@pytest.mark.parametrize("mod", BACKENDS, ids=["numba", "numpy"])
def test_dykstra_feasible_and_optimal(mod):
    rng = np.random.default_rng(4)
    for _ in range(20):
        A = rng.standard_normal((5, 4))
        b = rng.uniform(0.1, 1.0, 5)
        x = 3.0 * rng.standard_normal(4)
        y, _, resid = mod.dykstra_halfspaces(x, A, b, 100_000, 1e-10)
        assert resid <= 1e-10 and (A @ y - b).max() <= 1e-8
        # variational inequality <x - y, z - y> <= 0 for feasible z
        Z = y + 0.5 * rng.standard_normal((200, 4))
        Z = Z[(Z @ A.T <= b).all(axis=1)]
        assert ((Z - y) @ (x - y)).max(initial=0.0) <= 1e-7


@pytest.mark.parametrize("mod", BACKENDS, ids=["numba", "numpy"])
def test_pairwise_ratio(mod):
    rng = np.random.default_rng(5)
    X = rng.standard_normal((50, 3))
    Y = 0.5 * X
    Y[7] += 2.0
    ratio, i, j = mod.pairwise_ratio_max(X, Y, 0.0)
    DX = np.linalg.norm(X[:, None] - X[None], axis=2)
    DY = np.linalg.norm(Y[:, None] - Y[None], axis=2)
    np.fill_diagonal(DX, np.inf)
    assert ratio == pytest.approx((DY / DX).max(), rel=1e-12)
    assert 7 in (i, j)


@pytest.mark.parametrize("mod", BACKENDS, ids=["numba", "numpy"])
def test_ball_slacks(mod):
    C = np.array([[0.0, 0.0], [3.0, 4.0]])
    s = mod.ball_slacks(C, np.array([1.0, 2.0]), np.zeros(2))
    assert np.allclose(s, [-1.0, 3.0])
