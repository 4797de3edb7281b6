import numpy as np
import pytest

from fixgen.bodies import Ball, FullSpace, Tube
from fixgen.errors import DomainError
from fixgen.geometry import Subspace, unit
from fixgen.maps import Identity, compose, random_composed_map, translation
from fixgen.metric import ThetaSequence, d_theta, in_U, in_V, orbit_gap


def test_first_terms_and_levels():
    th = ThetaSequence(FullSpace(2))
    T = th.lattice(10)
    # level 0 is the origin, level 1 starts again at the origin and walks the
    # unit shell of the half-integer lattice in order of norm
    assert np.array_equal(T[0], [0.0, 0.0]) and np.array_equal(T[1], [0.0, 0.0])
    assert np.allclose(np.abs(T[2:6]).sum(axis=1), 0.5)
    assert np.array_equal(th[1], th.terms(1)[0])
    with pytest.raises(IndexError):
        th[0]


def test_terms_lie_in_the_body_and_cache_is_stable():
    body = Tube(Subspace(np.eye(3)[:1]), 0.5)
    th = ThetaSequence(body)
    T = th.terms(3000)
    assert body.contains_many(T, tol=1e-12).all()
    assert np.array_equal(th.terms(100), T[:100])


def test_density_surrogate():
    # 10^4 lattice terms are only this dense in the plane; finer levels in
    # higher dimensions need far more terms
    dim = 2
    th = ThetaSequence(FullSpace(dim))
    T = th.terms(10_000)
    rng = np.random.default_rng(0)
    X = rng.uniform(-3, 3, (1000, dim))
    near = np.min(np.linalg.norm(X[:, None, :] - T[None], axis=2), axis=1)
    assert np.all(near < 0.1 * (1 + np.linalg.norm(X, axis=1)))


def test_equal_maps_at_distance_zero():
    S = FullSpace(3)
    f = translation([1.0, 0.0, 0.0], S)
    assert d_theta(f, f, ThetaSequence(S)).value == 0.0


def test_identity_against_unit_shift():
    S = FullSpace(8)
    m = d_theta(Identity(S), translation(unit(0, 8), S), ThetaSequence(S), 40)
    assert abs(m.value - 0.5) <= 2.0 ** -40
    assert m.tail == 2.0 ** -40 and m.n == 40
    assert m.value <= 0.5 <= m.upper


def test_truncation_bounds():
    S = FullSpace(3)
    th = ThetaSequence(S)
    rng = np.random.default_rng(1)
    for _ in range(30):
        f, g = random_composed_map(rng, S), random_composed_map(rng, S)
        n, m = sorted(rng.integers(0, 50, 2))
        a, b = d_theta(f, g, th, n), d_theta(f, g, th, m)
        assert abs(a.value - b.value) <= 2.0 ** -min(n, m)
        assert b.value <= a.upper + 1e-15


def test_zero_distance_means_agreement_on_terms():
    B = Ball(np.zeros(2), 1.0)
    th = ThetaSequence(B)
    f = Identity(B)
    # a map equal to the identity near the centre
    g = compose(Identity(B), Identity(B))
    assert d_theta(f, g, th, 20).value == 0.0
    T = th.terms(20)
    assert np.array_equal(f.evaluate_many(T), g.evaluate_many(T))


def test_negative_terms_rejected():
    S = FullSpace(2)
    with pytest.raises(DomainError):
        d_theta(Identity(S), Identity(S), ThetaSequence(S), -1)


def test_neighborhood_examples():
    S = FullSpace(3)
    f, g = Identity(S), translation(unit(0, 3), S)
    x = np.zeros(3)
    assert in_U(f, f, x, 1e-12)
    assert not in_U(g, f, x, 0.5)
    assert in_V(f, f, x, 1e-12, 7)
    assert not in_V(g, f, x, 2.5, 3)
    assert orbit_gap(g, f, x, 3) == pytest.approx(3.0)
    with pytest.raises(DomainError):
        in_V(g, f, x, 1.0, 0)


def test_k1_matches_in_U():
    S = FullSpace(4)
    rng = np.random.default_rng(2)
    for _ in range(1000):
        f, g = random_composed_map(rng, S, depth=2), random_composed_map(rng, S, depth=2)
        x = rng.standard_normal(4)
        eps = float(rng.uniform(0.1, 5.0))
        direct = np.linalg.norm(g.evaluate(x) - f.evaluate(x)) < eps
        assert in_V(g, f, x, eps, 1) == in_U(g, f, x, eps) == direct


def test_neighborhoods_are_open_along_orbits():
    """A map within s/(2k) of g after every step stays in the k-step
    neighborhood when g has slack s."""
    S = FullSpace(4)
    rng = np.random.default_rng(3)
    checked = 0
    for _ in range(200):
        f, g = random_composed_map(rng, S), random_composed_map(rng, S)
        x = rng.standard_normal(4)
        k = int(rng.integers(1, 6))
        gap = orbit_gap(g, f, x, k)
        eps = gap + float(rng.uniform(0.01, 1.0))
        s = eps - gap
        c = rng.standard_normal(4)
        c *= 0.99 * s / (2 * k) / np.linalg.norm(c)
        h = compose(translation(c, S), g)
        # the chain: ||h^k x - g^k x|| <= k ||c|| < s / 2
        assert orbit_gap(h, g, x, k) <= k * np.linalg.norm(c) + 1e-12
        assert in_V(h, f, x, eps, k)
        checked += 1
    assert checked == 200


def test_metric_axioms_on_samples():
    S = FullSpace(3)
    th = ThetaSequence(S)
    rng = np.random.default_rng(4)
    for _ in range(50):
        f, g, h = (random_composed_map(rng, S) for _ in range(3))
        fg, gf = d_theta(f, g, th).value, d_theta(g, f, th).value
        assert fg == gf
        assert fg <= d_theta(f, h, th).value + d_theta(h, g, th).value + 1e-12
