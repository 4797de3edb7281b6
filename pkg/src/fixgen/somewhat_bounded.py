"""Certificates of somewhat boundedness and the explicit covering of
``C intersected with a large ball`` by translates of a small ball centred on
an F-sphere.

A certificate ``(x0, F, alpha, beta)`` asserts

    alpha * B_F  is contained in  C - x0  is contained in  D_F(alpha, beta),

where ``D_F(alpha, beta) = {x : ||pi_perp x|| - beta <= (beta/alpha) ||pi_F x||}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import BluntCone, ConvexBody, TranslatedBody
from .errors import CertificateError, DomainError, SearchFailure
from .geometry import Subspace, as_vector, sphere_directions

BLUNT_TOL = 1e-12


@dataclass(frozen=True)
class SBCertificate:
    x0: np.ndarray
    F: Subspace
    alpha: float
    beta: float

    def __post_init__(self):
        if self.F.dim == 0:
            raise CertificateError("certificate subspace must be nonzero")
        if not (self.alpha > 0 and self.beta > 0):
            raise CertificateError("alpha and beta must be positive")
        if self.F.ambient != np.asarray(self.x0).shape[0]:
            raise CertificateError("base point and subspace live in different dimensions")

    def to_json(self):
        return {"x0": np.asarray(self.x0).tolist(), "subspace": self.F.to_json(),
                "alpha": self.alpha, "beta": self.beta}

    @classmethod
    def from_json(cls, data, dim=None):
        x0 = as_vector(data["x0"], dim)
        return cls(x0, Subspace.from_json(data["subspace"], dim=x0.shape[0]),
                   float(data["alpha"]), float(data["beta"]))


@dataclass
class Verdict:
    """Outcome of a sampled check.  ``worst_slack <= 0`` means no violation;
    ``counterexample`` is the point realizing the worst slack when it fails."""

    passed: bool
    worst_slack: float
    counterexample: list | None = None
    details: dict = field(default_factory=dict)

    def to_json(self):
        return {"pass": self.passed, "worst_slack": self.worst_slack,
                "counterexample": self.counterexample, **self.details}


def in_blunt_cone(x, F: Subspace, alpha: float, beta: float) -> bool:
    """``||pi_perp x|| - beta <= (beta/alpha) ||pi_F x||`` with slack
    tolerance 1e-12."""
    return blunt_cone_slack(x, F, alpha, beta) <= BLUNT_TOL


def blunt_cone_slack(x, F: Subspace, alpha: float, beta: float):
    """Left minus right side of the blunt-cone inequality (row-wise)."""
    if not (alpha > 0 and beta > 0):
        raise DomainError("alpha and beta must be positive")
    X = np.asarray(x, dtype=float)
    a = X @ F.basis.T
    pf = np.linalg.norm(a, axis=-1)
    pp = np.linalg.norm(X - a @ F.basis, axis=-1)
    return pp - beta - (beta / alpha) * pf


def verify_certificate(body: ConvexBody, cert: SBCertificate, sample_count=2000, rng_seed=0,
                       probe_radius=None) -> Verdict:
    """Sampled check of both inclusions of a certificate.

    * ``x0 + alpha*u`` must lie in the body for ``u`` on the unit sphere of
      F (slack: distance to the body);
    * body points must satisfy the blunt-cone inequality after recentring
      (slack: the inequality's left minus right side).  Points come from
      uniform samples of the body within ``probe_radius`` and from the ends
      of rays from ``x0`` in random directions of F-perp.
    """
    rng = np.random.default_rng(rng_seed)
    x0 = as_vector(cert.x0, body.dim)
    F, alpha, beta = cert.F, cert.alpha, cert.beta
    R = probe_radius if probe_radius is not None else 10.0 * (alpha + beta + 1.0) + float(np.linalg.norm(x0))
    worst, worst_pt, worst_kind = -math.inf, None, None

    # inner ball: the F-sphere of radius alpha (convexity covers the ball)
    U = sphere_directions(F, rng, max(16, sample_count // 4))
    if F.dim == 1:
        U = np.vstack([F.basis, -F.basis])
    for u in U:
        p = x0 + alpha * u
        s = body.distance(p)
        if s > worst:
            worst, worst_pt, worst_kind = s, p, "inner_ball"

    # outer cone: rays in F-perp, then uniform body samples
    comp = F.complement()
    cap = 1e3 * (1.0 + beta)
    if comp.dim:
        for u in sphere_directions(comp, rng, max(16, sample_count // 8)):
            ext = min(body.ray_max(x0, u), cap)
            p = x0 + ext * u
            s = float(blunt_cone_slack(p - x0, F, alpha, beta))
            if s > worst:
                worst, worst_pt, worst_kind = s, p, "outer_cone"
    X = body.sample(rng, sample_count, R)
    S = blunt_cone_slack(X - x0, F, alpha, beta)
    j = int(np.argmax(S))
    if S[j] > worst:
        worst, worst_pt, worst_kind = float(S[j]), X[j], "outer_cone"

    passed = worst <= 1e-9
    return Verdict(passed, float(worst), None if passed else np.asarray(worst_pt).tolist(),
                   {"violated_inclusion": None if passed else worst_kind})


@dataclass(frozen=True)
class CoveringParameters:
    lam: float
    t: float
    r: float
    r_prime: float

    def to_json(self):
        return {"lambda": self.lam, "t": self.t, "r": self.r, "r_prime": self.r_prime}


def covering_parameters(alpha: float, beta: float, lam: float) -> CoveringParameters:
    """Radii of the covering.

    ``t`` makes ``t - beta (alpha + t) / sqrt(alpha^2 + beta^2) >= lam`` an
    equality, ``r = sqrt((2t)^2 + (beta + beta t / alpha)^2)`` and
    ``r' = sqrt(r^2 + t^2)``.

    Examples
    --------
    >>> p = covering_parameters(1.0, 1.0, 1.0)
    >>> round(p.t, 6), round(p.r, 4), round(p.r_prime, 4)
    (5.828427, 13.5096, 14.7133)
    """
    if not (alpha > 0 and beta > 0 and lam > 0):
        raise DomainError("alpha, beta and lambda must be positive")
    h = math.hypot(alpha, beta)
    t = (lam * h + alpha * beta) / (h - beta)
    r = math.hypot(2.0 * t, beta + beta * t / alpha)
    return CoveringParameters(float(lam), t, r, math.hypot(r, t))


def find_far_point(body: ConvexBody, F: Subspace, t: float, rng=None, n_dirs=64):
    """A point ``p`` of ``body`` with ``||pi_F p|| >= t`` (body recentred so
    that 0 lies in it), found along rays from 0 in directions of F."""
    rng = np.random.default_rng(0) if rng is None else rng
    dirs = np.vstack([F.basis, -F.basis, sphere_directions(F, rng, n_dirs)])
    for u in dirs:
        ext = body.ray_max(np.zeros(body.dim), u)
        if ext >= t:
            return t * u
    raise SearchFailure(f"no point with F-component of norm >= {t:.6g} along F rays (body may be bounded)")


@dataclass
class CoveringVerdict(Verdict):
    params: CoveringParameters | None = None
    table: dict | None = None


def check_covering(body: ConvexBody, cert: SBCertificate, lam: float, sample_count=10_000,
                   rng_seed=0, dist_tol=1e-7) -> CoveringVerdict:
    """Monte-Carlo check of the covering with the explicit witnesses.

    Works in the recentred body ``C - x0``.  For a sample ``x`` with
    ``||pi_F x|| >= t`` the witness is ``t pi_F x / ||pi_F x||``; otherwise it
    is the fixed point ``v = t pi_F p / ||pi_F p||`` built from a far point
    ``p``.  A witness passes when ``||pi_C w|| >= lam`` and
    ``||x - w|| <= r + dist_tol``.

    The returned table holds per-sample witnesses, distances, projection
    norms and the case taken.
    """
    params = covering_parameters(cert.alpha, cert.beta, lam)
    t, r, rp = params.t, params.r, params.r_prime
    F = cert.F
    C = TranslatedBody(body, -as_vector(cert.x0, body.dim))
    rng = np.random.default_rng(rng_seed)

    p = find_far_point(C, F, t, rng)
    pf = F.project(p)
    v = t * pf / np.linalg.norm(pf)
    v_proj_norm = float(np.linalg.norm(C.project(v)))
    v_bound = t - cert.beta * (cert.alpha + t) / math.hypot(cert.alpha, cert.beta)

    X = C.sample(rng, sample_count, rp)
    A = X @ F.basis.T
    PF = A @ F.basis
    nf = np.linalg.norm(A, axis=1)
    radial = nf >= t
    W = np.where(radial[:, None], t * PF / np.maximum(nf, 1e-300)[:, None], v)
    dist = np.linalg.norm(X - W, axis=1)
    proj_norm = np.linalg.norm(C.project_many(W), axis=1)

    # the proof's chain for radial witnesses: ||x||^2 + t^2 - 2t||pi_F x|| <= r^2
    chain = np.where(radial, (X * X).sum(axis=1) + t * t - 2 * t * nf - r * r, -math.inf)

    dist_slack = dist - r
    memb_slack = lam - proj_norm
    slack = np.maximum(dist_slack - dist_tol, memb_slack)
    worst = float(slack.max(initial=-math.inf))
    worst_chain = float(chain.max(initial=-math.inf))
    passed = bool(worst <= 0 and v_proj_norm >= lam and worst_chain <= 1e-9)
    return CoveringVerdict(
        passed,
        max(worst, lam - v_proj_norm),
        None if passed or not len(slack) else X[int(np.argmax(slack))].tolist(),
        {
            "worst_distance_slack": float(dist_slack.max(initial=-math.inf)),
            "worst_membership_slack": float(memb_slack.max(initial=-math.inf)),
            "worst_chain_slack": worst_chain,
            "radial_fraction": float(radial.mean()) if len(radial) else 0.0,
            "v_projection_norm": v_proj_norm,
            "v_projection_bound": v_bound,
        },
        params,
        {"samples": X, "witnesses": W, "distance": dist, "projection_norm": proj_norm, "radial": radial},
    )
