import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fixgen import kernels
from fixgen.bodies import Ball, FullSpace, Hull, Tube
from fixgen.errors import CertificateError, CompositionError, ConstructionError
from fixgen.geometry import Subspace, unit
from fixgen.maps import (Affine, Composition, Constant, Identity, OrthogonalShift, Power, Projection, SampledMap,
                         certify_lipschitz, compose, is_self_map, kirszbraun_extend, map_from_json, random_composed_map,
                         random_orthogonal, translation)


def grid_minmax(Y, rad, lo=-2.0, hi=3.0, n=1001):
    """Brute-force minimizer of max_i ||y - y_i|| - rad_i over a planar grid."""
    g = np.linspace(lo, hi, n)
    P = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    val = (np.linalg.norm(P[:, None, :] - Y[None], axis=2) - rad).max(axis=1)
    k = int(np.argmin(val))
    return P[k], val[k]


def test_single_anchor_gives_constant_value():
    f = SampledMap([[0.0, 0.0]], [[0.0, 0.0]])
    assert np.allclose(kirszbraun_extend(f, [1.3, -0.4]), 0.0, atol=1e-9)


def test_identity_data_extension():
    X = np.array([[0.0, 0.0], [2.0, 0.0]])
    f = SampledMap(X, X)
    y, val = f.extend([1.0, 0.0])
    ref, _ = grid_minmax(X, np.array([1.0, 1.0]))
    assert np.allclose(ref, [1.0, 0.0], atol=5e-3)
    assert np.allclose(y, [1.0, 0.0], atol=1e-6)
    assert val <= 1e-8


def test_halving_data_extension():
    X = np.array([[0.0, 0.0], [2.0, 0.0]])
    Y = np.array([[0.0, 0.0], [1.0, 0.0]])
    f = SampledMap(X, Y)
    y, val = f.extend([1.0, 0.0])
    ref, ref_val = grid_minmax(Y, np.array([1.0, 1.0]))
    assert np.allclose(y, [0.5, 0.0], atol=1e-7)
    assert val == pytest.approx(-0.5, abs=1e-7)
    assert np.allclose(ref, y, atol=5e-3) and ref_val == pytest.approx(-0.5, abs=1e-3)


def test_queries_are_appended_and_duplicates_reuse_values():
    X = np.array([[0.0, 0.0], [2.0, 0.0]])
    f = SampledMap(X, X)
    y1 = f.evaluate([0.3, 0.7])
    assert len(f) == 3
    assert np.array_equal(f.evaluate([0.3, 0.7]), y1)
    assert len(f) == 3


def test_non_lipschitz_data_rejected():
    with pytest.raises(CertificateError):
        SampledMap([[0.0], [1.0]], [[0.0], [2.0]])


def test_extended_anchor_log_stays_nonexpansive(rng):
    d = 4
    Q = random_orthogonal(rng, d)
    X = rng.standard_normal((15, d))
    f = SampledMap(X, 0.8 * X @ Q.T + 1.0)
    for q in 2.0 * rng.standard_normal((200, d)):
        _, val = f.extend(q)
        assert val <= 1e-8
    ratio, _, _ = kernels.pairwise_ratio_max(f.anchors_x.copy(), f.anchors_y.copy(), 0.0)
    assert ratio <= 1 + 1e-8


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 12), st.integers(2, 5))
def test_extension_consistency_property(seed, m, d):
    rng = np.random.default_rng(seed)
    g = random_composed_map(rng, Ball(np.zeros(d), 2.0))
    X = 2.0 * rng.standard_normal((m, d))
    f = SampledMap(X, g.evaluate_many(X))
    for q in 3.0 * rng.standard_normal((10, d)):
        f.evaluate(q)
    ratio, _, _ = kernels.pairwise_ratio_max(f.anchors_x.copy(), f.anchors_y.copy(), 0.0)
    assert ratio <= 1 + 1e-7


def test_certify_identity_and_constant():
    B = Ball(np.zeros(3), 1.0)
    assert certify_lipschitz(Identity(B), 500).ratio == pytest.approx(1.0, abs=1e-12)
    assert certify_lipschitz(Constant([0.1, 0.0, 0.0], B), 500).ratio == 0.0


def test_projected_rotation_on_ball():
    B = Ball(np.zeros(4), 1.0)
    R = random_orthogonal(np.random.default_rng(0), 4)
    f = compose(Projection(B), Affine(R, np.zeros(4), B), check=False)
    rep = certify_lipschitz(f, 10_000, 1)
    assert rep.passed and rep.ratio <= 1 + 1e-9


def test_compose_single_node_and_projections_vanish_inside():
    B = Ball(np.zeros(3), 1.0)
    idm = Identity(B)
    assert compose(idm) is idm
    D = Hull(np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [0.0, 0.5, 0.0]]))
    f = Affine(np.eye(3)[[1, 0, 2]], np.zeros(3), FullSpace(3))
    g = compose(Projection(D), f, Projection(D), check=False)
    x = np.array([0.1, 0.2, 0.0])
    assert np.allclose(g.evaluate(x), f.evaluate(x), atol=1e-12)


def test_compose_order_is_mathematical():
    S = FullSpace(2)
    f = translation([1.0, 0.0], S)
    g = Affine(np.diag([0.5, 0.5]), np.zeros(2), S)
    assert np.allclose(compose(f, g).evaluate([2.0, 2.0]), [2.0, 1.0])


def test_compose_domain_mismatch():
    with pytest.raises(CompositionError):
        compose(Identity(Ball(np.zeros(2), 1.0)), Identity(FullSpace(2)))
    with pytest.raises(CompositionError):
        compose(Identity(FullSpace(2)), Identity(FullSpace(3)))


def test_random_compositions_certified(rng):
    body = Tube(Subspace(np.eye(5)[:2]), 1.0)
    for _ in range(10):
        f = random_composed_map(rng, body, depth=4)
        assert certify_lipschitz(f, 2000, int(rng.integers(1 << 30))).passed
        assert is_self_map(f)


def test_affine_norm_checked():
    with pytest.raises(CertificateError):
        Affine(2.0 * np.eye(2), np.zeros(2), FullSpace(2))


def test_orthogonal_shift_examples():
    d = 4
    y0 = unit(3, d)
    S = FullSpace(d)
    g = Affine(np.diag([1.0, 1.0, 1.0, 0.0]), np.zeros(d), S)
    h = OrthogonalShift(g, y0, 0.0, S)
    x = np.array([0.3, -0.2, 0.1, 0.0])
    assert np.allclose(h.evaluate(x), g.evaluate(x))
    # zero map plus the line component drifts along y0 forever
    drift = OrthogonalShift(Constant(np.zeros(d), S), y0, 0.5, S)
    z = np.zeros(d)
    for k in range(1, 6):
        z = drift.evaluate(z)
        assert z[3] == pytest.approx(0.5 * k)


def test_orthogonal_shift_on_tube_certified():
    d = 5
    T = Tube(Subspace(np.eye(d)[:2]), 1.0)
    y0 = unit(4, d)
    P = Affine(np.diag([1.0, 1.0, 1.0, 1.0, 0.0]), np.zeros(d), FullSpace(d))
    R = np.eye(d)
    R[:2, :2] = [[0.0, -1.0], [1.0, 0.0]]
    g = compose(Affine(R, np.zeros(d), FullSpace(d)), P, check=False)
    h = OrthogonalShift(g, y0, 0.3, T)
    assert certify_lipschitz(h, 10_000, 0).passed


def test_orthogonal_shift_rejects_leaking_g():
    S = FullSpace(3)
    h = OrthogonalShift(Identity(S), unit(2, 3), 0.1, S)
    with pytest.raises(ConstructionError):
        h.evaluate([0.0, 0.0, 1.0])


def test_map_json_round_trip(rng):
    body = Ball(np.zeros(3), 2.0)
    f = random_composed_map(rng, body)
    h = Power(OrthogonalShift(Constant(np.zeros(3), FullSpace(3)), unit(2, 3), 0.5, FullSpace(3)), 2)
    s = SampledMap(rng.standard_normal((3, 3)), np.zeros((3, 3)))
    for m in (f, h, s):
        again = map_from_json(m.to_json())
        X = rng.standard_normal((5, 3))
        assert np.allclose(again.evaluate_many(X), m.evaluate_many(X), atol=1e-12)
