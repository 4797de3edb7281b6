import math

import numpy as np
import pytest

from fixgen.bodies import Ball, FullSpace, Tube
from fixgen.errors import CertificateError, SearchFailure
from fixgen.geometry import Subspace, unit
from fixgen.somewhat_bounded import (SBCertificate, check_covering, covering_parameters, in_blunt_cone,
                                     verify_certificate)

F2 = Subspace(np.eye(6)[:2])


def test_blunt_cone_membership_examples():
    F = Subspace(np.eye(4)[:2])
    assert in_blunt_cone(np.zeros(4), F, 1.0, 1.0)
    assert in_blunt_cone(unit(2, 4), F, 1.0, 1.0)
    x = np.array([2.0, 0.0, 3.5, 0.0])
    assert not in_blunt_cone(x, F, 1.0, 1.0)


def test_covering_parameters_reference_values():
    p = covering_parameters(1.0, 1.0, 1.0)
    # t = (sqrt2 + 1) / (sqrt2 - 1); r and r' from their definitions, frozen from a 30-digit evaluation
    assert abs(p.t - (3 + 2 * math.sqrt(2))) <= 1e-9
    assert abs(p.r - 13.509613909800608) <= 1e-9
    assert abs(p.r_prime - 14.713267167436172) <= 1e-9


def test_covering_parameters_monotone():
    prev = None
    for lam in (0.5, 1.0, 2.0, 4.0, 8.0):
        for a, b in ((1.0, 1.0), (0.3, 2.0), (5.0, 0.1)):
            p = covering_parameters(a, b, lam)
            assert p.t >= lam and p.r_prime > p.r
            # the defining inequality holds with equality
            assert p.t - b * (a + p.t) / math.hypot(a, b) == pytest.approx(lam, rel=1e-12)
        q = covering_parameters(1.0, 1.0, lam)
        if prev is not None:
            assert q.t > prev.t
        prev = q


def test_tube_certificate_passes(tube6):
    v = verify_certificate(tube6, SBCertificate(np.zeros(6), F2, 1.0, 1.0), 2000, 0)
    assert v.passed and v.worst_slack <= 1e-9


def test_full_space_certificate_fails():
    v = verify_certificate(FullSpace(6), SBCertificate(np.zeros(6), F2, 1.0, 1.0), 2000, 0)
    assert not v.passed
    w = np.asarray(v.counterexample)
    assert np.linalg.norm(F2.complement_project(w)) > 1.0 + (1.0 / 1.0) * np.linalg.norm(F2.project(w))


def test_ball_certificate_passes():
    B = Ball(np.zeros(6), 1.0)
    v = verify_certificate(B, SBCertificate(np.zeros(6), Subspace(unit(0, 6)), 0.5, 1.5), 2000, 0)
    assert v.passed


def test_inner_ball_violation_detected(tube6):
    v = verify_certificate(tube6, SBCertificate(np.zeros(6), F2.complement(), 2.0, 1.0), 500, 0)
    assert not v.passed


def test_zero_dimensional_subspace_rejected():
    with pytest.raises(CertificateError):
        SBCertificate(np.zeros(6), Subspace([], dim=6), 1.0, 1.0)


@pytest.mark.parametrize("lam", [1.0, 10.0])
def test_covering_tube(tube6, lam):
    v = check_covering(tube6, SBCertificate(np.zeros(6), F2, 1.0, 1.0), lam, 10_000, 0)
    assert v.passed
    assert v.details["worst_distance_slack"] <= 1e-7
    assert v.details["worst_membership_slack"] <= 0
    assert v.details["worst_chain_slack"] <= 1e-9
    assert v.details["v_projection_norm"] >= v.details["v_projection_bound"] - 1e-12


def test_covering_witness_at_radius_t(tube6):
    cert = SBCertificate(np.zeros(6), F2, 1.0, 1.0)
    p = covering_parameters(1.0, 1.0, 1.0)
    x = p.t * unit(0, 6) + 0.5 * unit(3, 6)
    v = check_covering(tube6, cert, 1.0, 0, 0)
    # the radial witness of x is its own F-sphere point
    w = p.t * unit(0, 6)
    assert np.linalg.norm(x - w) <= p.r
    assert v.passed


def test_covering_on_bounded_body_fails_search():
    with pytest.raises(SearchFailure):
        check_covering(Ball(np.zeros(6), 1.0), SBCertificate(np.zeros(6), F2, 0.5, 1.0), 1.0, 100, 0)


def test_certificate_json_round_trip():
    cert = SBCertificate(np.zeros(6), F2, 1.0, 2.0)
    again = SBCertificate.from_json(cert.to_json())
    assert np.array_equal(again.F.basis, cert.F.basis) and again.beta == 2.0
