import numpy as np
import pytest

from fixgen.bodies import Ball, FullSpace, Tube
from fixgen.dynamics import exclusion_ball, km_fixed_point, km_orbit, picard_orbit
from fixgen.errors import DomainError
from fixgen.geometry import Subspace, unit
from fixgen.maps import Affine, Constant, compose, Projection, random_composed_map, translation


def rotation(d, angle=np.pi / 2):
    R = np.eye(d)
    R[:2, :2] = [[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]]
    return R


def test_picard_constant_map():
    B = Ball(np.zeros(3), 1.0)
    c = np.array([0.2, 0.0, 0.1])
    tr = picard_orbit(Constant(c, B), unit(1, 3), 4)
    assert len(tr) == 5 and np.array_equal(tr.points[0], unit(1, 3))
    assert all(np.array_equal(p, c) for p in tr.points[1:])
    assert tr.residuals[0] > 0 and np.all(tr.residuals[1:] == 0)


def test_picard_halving():
    B = Ball(np.zeros(3), 1.0)
    tr = picard_orbit(Affine(0.5 * np.eye(3), np.zeros(3), B), unit(0, 3), 10)
    for k, p, res, bd in tr.rows():
        assert np.array_equal(p, 2.0 ** -k * unit(0, 3))
        assert bd == pytest.approx(1 - 2.0 ** -k)
    with pytest.raises(DomainError):
        picard_orbit(Constant(np.zeros(3), B), np.zeros(3), -1)


def test_picard_residuals_do_not_grow(rng):
    body = Tube(Subspace(np.eye(4)[:2]), 1.0)
    for _ in range(50):
        f = random_composed_map(rng, body)
        tr = picard_orbit(f, body.sample(rng, 1, 3.0)[0], 30, boundary=False)
        assert np.all(np.diff(tr.residuals) <= 1e-9)


def test_km_constant_map():
    B = Ball(np.zeros(2), 1.0)
    c = np.array([0.3, 0.4])
    res = km_fixed_point(Constant(c, B), np.zeros(2), tol=1e-8)
    assert res.found and np.linalg.norm(res.point - c) <= 1e-8


def test_km_rotation_reaches_the_centre():
    B = Ball(np.zeros(2), 1.0)
    f = compose(Projection(B), Affine(rotation(2), np.zeros(2), B), check=False)
    res = km_fixed_point(f, unit(0, 2), tol=1e-8)
    assert res.found and np.linalg.norm(res.point) <= 1e-8


def test_km_translation_has_no_fixed_point():
    S = FullSpace(3)
    res = km_fixed_point(translation(unit(0, 3), S), np.zeros(3), max_iter=2000)
    assert not res.found and res.residual == pytest.approx(1.0)


def test_km_residuals_non_increasing_and_returned_point_valid(rng):
    body = Ball(np.zeros(4), 2.0)
    for _ in range(30):
        f = random_composed_map(rng, body)
        res = km_fixed_point(f, body.sample(rng, 1, 2.0)[0], tol=1e-8, max_iter=20_000, record=True)
        assert np.all(np.diff(res.residuals) <= 1e-10)
        if res.found:
            assert body.contains(res.point)
            assert np.linalg.norm(f.evaluate(res.point) - res.point) <= 1e-8
    tr = km_orbit(f, np.zeros(4), 10)
    assert tr.scheme == "km" and len(tr) == 11


def test_exclusion_examples():
    S = FullSpace(2)
    cert = exclusion_ball(translation([5.0, 0.0], S), np.zeros(2), 2.0)
    assert cert is not None and cert.residual == 5.0 and cert.margin == 1.0
    half = Affine(0.5 * np.eye(2), np.zeros(2), S)
    cert = exclusion_ball(half, [10.0, 0.0], 2.0)
    assert cert is not None and cert.residual == 5.0
    # the true fixed point 0 is outside the ball, and the chain confirms it
    chk = cert.chain(half, np.zeros(2))
    assert chk["chain_holds"] and chk["excluded"] and chk["distance"] == 10.0
    assert exclusion_ball(half, [1.0, 0.0], 2.0) is None
    with pytest.raises(DomainError):
        exclusion_ball(half, [1.0, 0.0], 0.0)


def test_exclusion_agrees_with_km(rng):
    body = Ball(np.zeros(3), 3.0)
    issued = 0
    for _ in range(200):
        f = random_composed_map(rng, body)
        x = body.sample(rng, 1, 3.0)[0]
        res = np.linalg.norm(f.evaluate(x) - x)
        if res == 0:
            continue
        r = 0.49 * res
        cert = exclusion_ball(f, x, r)
        assert cert is not None
        issued += 1
        start = x + r * rng.uniform(0, 1) * unit(0, 3)
        km = km_fixed_point(f, start, max_iter=5000)
        if km.found:
            chk = cert.chain(f, km.point)
            assert chk["chain_holds"] and chk["excluded"]
    assert issued > 150
