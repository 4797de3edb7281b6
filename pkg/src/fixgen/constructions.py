"""Explicit perturbations of a nonexpansive map.

* ``build_fixed_point_perturbation``: on a somewhat bounded body, a nearby
  map whose values on a finite net pin a large ball into itself, so it has
  a fixed point (and so does everything close to it on the net).
* ``build_boundary_drift``: a nearby map whose orbit of one Theta point
  climbs along a direction orthogonal to the data until it meets the
  boundary.
* ``build_drift_perturbation``: on a body with an unbounded direction, a
  nearby map whose k-th iterate moves the origin by at least ``3r``, which
  rules out fixed points in ``B(0, r)``.

Each returns a ``PerturbationReport`` whose checks carry measured values
and the bounds they were compared against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .bodies import ConvexBody, Hull
from .dynamics import km_fixed_point, exclusion_ball
from .errors import (CertificateError, ConstructionError, CoveringError, DimensionError, DomainError,
                     UnboundednessError)
from .geometry import Subspace, orthonormalize
from .maps import OrthogonalShift, Power, Projection, SampledMap, certify_lipschitz, compose
from .metric import DEFAULT_TERMS, ThetaSequence, d_theta
from .somewhat_bounded import SBCertificate, covering_parameters

INVARIANCE_TOL = 1e-7
IDENTITY_TOL = 1e-9
PYTHAGORAS_TOL = 1e-6
MAX_NET_DIM = 3


@dataclass
class Check:
    """One postcondition: ``measured <relation> bound``."""

    name: str
    measured: float
    bound: float
    relation: str = "<="

    @property
    def passed(self) -> bool:
        m, b = self.measured, self.bound
        if self.relation == "<":
            return m < b
        if self.relation == ">=":
            return m >= b
        if self.relation == ">":
            return m > b
        if self.relation == "==":
            return m == b
        return m <= b

    def to_json(self):
        return {"name": self.name, "measured": self.measured, "bound": self.bound,
                "relation": self.relation, "pass": self.passed}


@dataclass
class PerturbationReport:
    perturbed: object
    distance: object
    params: dict
    checks: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self):
        return {"pass": self.passed, "distance": self.distance.to_json(), "params": _jsonable(self.params),
                "checks": [c.to_json() for c in self.checks]}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def tail_terms(budget: float) -> int:
    """Smallest ``n >= 1`` with ``sum_{j > n} 2^-j = 2^-n < budget``."""
    if not budget > 0:
        raise DomainError("budget must be positive")
    n = 1
    while 0.5 ** n >= budget:
        n += 1
    return n


def _distinct_rows(X, tol=1e-12):
    keep = []
    for i, x in enumerate(X):
        if all(np.linalg.norm(x - X[j]) > tol for j in keep):
            keep.append(i)
    return np.asarray(keep, dtype=int)


# ---------------------------------------------------------------------------
# nets on spheres of F


def sphere_grid(F: Subspace, radius: float, spacing: float) -> np.ndarray:
    """Points of the sphere of ``radius`` in F such that every sphere point
    lies within ``spacing`` of one of them.  ``dim F <= 3``."""
    k = F.dim
    if k == 0 or k > MAX_NET_DIM:
        raise DimensionError(f"net construction needs 1 <= dim F <= {MAX_NET_DIM}, got {k}")
    if k == 1:
        C = np.array([[1.0], [-1.0]])
    elif k == 2:
        n = max(8, int(math.ceil(2.0 * math.pi * radius / spacing)) + 1)
        a = 2.0 * math.pi * np.arange(n) / n
        C = np.c_[np.cos(a), np.sin(a)]
    else:
        # Fibonacci lattice; its covering radius is below 2 sqrt(4 pi / n) on the unit sphere
        n = max(32, int(math.ceil(16.0 * math.pi * (2.0 * radius / spacing) ** 2)))
        i = np.arange(n) + 0.5
        z = 1.0 - 2.0 * i / n
        phi = math.pi * (1.0 + 5 ** 0.5) * i
        s = np.sqrt(1.0 - z * z)
        C = np.c_[s * np.cos(phi), s * np.sin(phi), z]
    return radius * C @ F.basis


def greedy_net(points: np.ndarray, spacing: float) -> np.ndarray:
    """Greedy subset with every input point within ``spacing`` of it."""
    chosen = []
    covered = np.zeros(len(points), dtype=bool)
    for i in range(len(points)):
        if covered[i]:
            continue
        chosen.append(i)
        covered |= np.linalg.norm(points - points[i], axis=1) <= spacing
    return points[chosen]


def covering_net(body: ConvexBody, F: Subspace, lam: float, t: float, delta: float) -> np.ndarray:
    """A ``delta``-net of ``{x in t S_F : ||pi_C x|| >= lam}``.

    The sphere grid is ``delta/2``-dense and the greedy pass keeps every grid
    point within ``delta/2`` of the net.
    """
    G = sphere_grid(F, t, 0.5 * delta)
    G = G[np.linalg.norm(body.project_many(G), axis=1) >= lam]
    if len(G) == 0:
        raise CoveringError(f"no point of the F-sphere of radius {t:.6g} projects to norm >= {lam:.6g}")
    return greedy_net(G, 0.5 * delta)


# ---------------------------------------------------------------------------
# fixed points on somewhat bounded bodies


def build_fixed_point_perturbation(f, eps: float, cert: SBCertificate, theta: ThetaSequence,
                                   body: ConvexBody | None = None, rng_seed=0, invariance_samples=1000,
                                   km_tol=1e-8, km_max_iter=100_000, theta_terms=DEFAULT_TERMS,
                                   lipschitz_pairs=0) -> PerturbationReport:
    """Nearby map with a fixed point, following the covering argument.

    The body must already be recentred (certificate base point at 0).
    Bounded bodies are returned unchanged with a KM run on ``f``.

    Parameters
    ----------
    f : NonexpansiveMap
        Self-map of the body.
    eps : float
        Budget for ``d_Theta(f, g)`` (tail included).
    cert : SBCertificate
        Somewhat-boundedness certificate with ``x0 = 0``.
    theta : ThetaSequence
        Dense sequence of the body.
    lipschitz_pairs : int
        When positive, also run ``certify_lipschitz`` on the result.
    """
    body = f.domain if body is None else body
    if np.linalg.norm(cert.x0) > 1e-12:
        raise DomainError("recentre the body so that the certificate base point is 0")
    rng = np.random.default_rng(rng_seed)

    if body.is_bounded:
        g = f
        metric = d_theta(f, g, theta, theta_terms)
        rep = PerturbationReport(g, metric, {"bounded": True})
        km = km_fixed_point(g, body.project(np.zeros(body.dim)), km_tol, km_max_iter)
        rep.checks.append(Check("km_residual", km.residual if km.found else math.inf, km_tol))
        return rep

    n = tail_terms(eps)
    T = theta.terms(n)
    FT = f.evaluate_many(T)
    M = float(max(np.linalg.norm(T, axis=1).max(), np.linalg.norm(FT, axis=1).max()))
    lam = 2.0 * M if M > 0 else 1.0
    cov = covering_parameters(cert.alpha, cert.beta, lam)
    delta = eta = (cov.r_prime - cov.r) / 3.0

    N = body.project_many(covering_net(body, cert.F, lam, cov.t, delta))
    keep = _distinct_rows(T)
    X = np.vstack([T[keep], N])
    Y = np.vstack([FT[keep], np.zeros_like(N)])
    ratio, i, j = kernels.pairwise_ratio_max(X, Y, 0.0)
    if i >= 0 and ratio > 1.0 + 1e-12:
        raise CertificateError(f"anchor data is not nonexpansive (ratio {ratio:.12g}); certificate and lambda disagree")
    g1 = SampledMap(X, Y, body, validate=False)
    g = compose(Projection(body), g1, check=False)

    metric = d_theta(f, g, theta, theta_terms)
    net_values = np.array([np.linalg.norm(g.evaluate(x)) for x in N])
    sep = float(np.linalg.norm(N[:, None, :] - T[keep][None], axis=2).min())

    rp = cov.r_prime
    S = body.sample(rng, invariance_samples, rp)
    GS = np.array([g.evaluate(x) for x in S])
    norms = np.linalg.norm(GS, axis=1)
    escapes = int((norms > rp + INVARIANCE_TOL).sum())
    near_net = np.linalg.norm(S[:, None, :] - N[None], axis=2).min(axis=1)

    km = km_fixed_point(g, np.zeros(body.dim), km_tol, km_max_iter)
    fixed = km.point
    checks = [
        Check("distance_upper", metric.upper, eps, "<"),
        Check("anchor_separation", sep, M, ">="),
        Check("net_values", float(net_values.max()), eta, "<"),
        Check("net_cover", float(near_net.max()), cov.r + delta),
        Check("invariance_escapes", escapes, 0, "=="),
        Check("km_residual", km.residual if km.found else math.inf, km_tol),
        Check("fixed_point_norm", float(np.linalg.norm(fixed)) if km.found else math.inf, rp),
    ]
    if lipschitz_pairs:
        lip = certify_lipschitz(g, lipschitz_pairs, rng_seed, radius=rp)
        checks.append(Check("lipschitz_ratio", lip.ratio, 1.0 + 1e-7))
    params = {"n": n, "M": M, "lambda": lam, "t": cov.t, "r": cov.r, "r_prime": rp, "delta": delta,
              "eta": eta, "net_size": len(N), "anchors": len(X), "km_iterations": km.iterations,
              "invariance_samples": invariance_samples, "worst_image_norm": float(norms.max()) if len(norms) else 0.0}
    return PerturbationReport(g, metric, params, checks,
                              {"net": N, "fixed_point": fixed, "sampled_map": g1, "anchors_x": X, "anchors_y": Y})


# ---------------------------------------------------------------------------
# drift constructions


def _segment_ascent(phi, V, start_w, rounds=4, iters=40):
    """Maximize a concave ``phi`` over the hull of the rows of ``V`` by
    golden-section searches along segments towards each vertex."""
    w = start_w.copy()
    best = phi(w @ V)
    g = (5 ** 0.5 - 1) / 2
    for _ in range(rounds):
        improved = False
        for i in range(len(V)):
            e = np.zeros(len(V))
            e[i] = 1.0
            lo, hi = 0.0, 1.0
            a, b = hi - g * (hi - lo), lo + g * (hi - lo)
            fa, fb = phi(((1 - a) * w + a * e) @ V), phi(((1 - b) * w + b * e) @ V)
            for _ in range(iters):
                if fa < fb:
                    lo, a, fa = a, b, fb
                    b = lo + g * (hi - lo)
                    fb = phi(((1 - b) * w + b * e) @ V)
                else:
                    hi, b, fb = b, a, fa
                    a = hi - g * (hi - lo)
                    fa = phi(((1 - a) * w + a * e) @ V)
            s = 0.5 * (lo + hi)
            val = phi(((1 - s) * w + s * e) @ V)
            if val > best + 1e-12:
                best, w, improved = val, (1 - s) * w + s * e, True
        if not improved:
            break
    return best, w


def max_climb(body: ConvexBody, V: np.ndarray, y0: np.ndarray, rng, samples=256) -> float:
    """``max_{z in conv V} max{s >= 0 : z + s y0 in C}`` (a concave
    maximization): best of vertices and random convex combinations, refined
    by segment ascent."""
    phi = lambda z: body.ray_max(z, y0)
    W = np.vstack([np.eye(len(V)), np.full(len(V), 1.0 / len(V)), rng.dirichlet(np.ones(len(V)), samples)])
    vals = np.array([phi(w @ V) for w in W])
    k = int(np.argmax(vals))
    if not math.isfinite(vals[k]):
        return math.inf
    best, _ = _segment_ascent(phi, V, W[k])
    return float(max(best, vals[k]))


def build_boundary_drift(f, delta: float, p: int, theta: ThetaSequence, body: ConvexBody, cert: SBCertificate,
                         boundary_tol=1e-3, theta_terms=DEFAULT_TERMS, rng_seed=0,
                         lipschitz_pairs=0) -> PerturbationReport:
    """Nearby map whose orbit of ``theta_p`` reaches the boundary.

    ``h(x) = pi_C(g(x) + <x, y0> y0 + (delta/2) y0)`` with
    ``g = pi_D o f o pi_D``, ``D`` the hull of the first ``m`` Theta points
    and their images, and ``y0`` a unit vector orthogonal to ``F`` and to
    those points.
    """
    if p < 1:
        raise DomainError("p must be a positive integer")
    if not body.contains(np.zeros(body.dim)):
        raise DomainError("the body must contain 0")
    rng = np.random.default_rng(rng_seed)
    n = tail_terms(0.5 * delta)
    m = max(n, p)
    T = theta.terms(m)
    FT = f.evaluate_many(T)
    G = orthonormalize(list(cert.F.basis) + list(T) + list(FT), dim=body.dim)
    if G.dim >= body.dim:
        raise DimensionError(f"the data spans all {body.dim} dimensions; use a larger ambient dimension")
    y0 = G.complement().basis[0].copy()

    V = np.vstack([T, FT])
    V = V[_distinct_rows(V)]
    D = Hull(V)
    g = compose(Projection(D), f, Projection(D), check=False)
    h = OrthogonalShift(g, y0, 0.5 * delta, body)

    climb = max_climb(body, V, y0, rng)
    k_bound = int(math.ceil(2.0 * climb / delta)) + 1 if math.isfinite(climb) else None

    # orbit of theta_p, with the interior-phase identity monitored
    x = T[p - 1].copy()
    gx = x.copy()
    start = float(x @ y0)
    hit = 0 if body.boundary_distance(x) < boundary_tol else None
    identity_err = 0.0
    first_active = None
    horizon = k_bound if k_bound is not None else 10_000
    k = 0
    while hit is None and k < horizon + 1:
        k += 1
        inner = h.inner(x)
        x = body.project(inner)
        gx = g.evaluate(gx)
        if first_active is None and np.linalg.norm(inner - x) > 0.0:
            first_active = k
        if first_active is None:
            pred = gx + (start + 0.5 * k * delta) * y0
            identity_err = max(identity_err, float(np.linalg.norm(x - pred)))
        if body.boundary_distance(x) < boundary_tol:
            hit = k

    metric = d_theta(f, h, theta, theta_terms)
    anchor_dev = float(max(np.linalg.norm(h.evaluate(t) - ft) for t, ft in zip(T, FT)))
    checks = [
        Check("distance_upper", metric.upper, delta, "<"),
        Check("anchor_deviation", anchor_dev, 0.5 * delta + 1e-12),
        Check("interior_identity", identity_err, IDENTITY_TOL),
        Check("boundary_hit_step", hit if hit is not None else math.inf,
              k_bound if k_bound is not None else math.inf),
    ]
    if lipschitz_pairs:
        lip = certify_lipschitz(h, lipschitz_pairs, rng_seed)
        checks.append(Check("lipschitz_ratio", lip.ratio, 1.0 + 1e-7))
    params = {"n": n, "m": m, "p": p, "delta": delta, "y0": y0, "G_dim": G.dim, "max_climb": climb,
              "step_bound": k_bound, "boundary_step": hit, "first_active_projection": first_active,
              "boundary_distance": float(body.boundary_distance(x))}
    return PerturbationReport(h, metric, params, checks, {"g": g, "hull": D, "endpoint": x})


def relative_center(body: ConvexBody, F: Subspace, V: np.ndarray, rng, samples=256):
    """A point of ``conv V`` (inside F) far from the relative boundary of
    ``C`` within F, and the radius ``alpha`` of an F-ball around it inside
    ``C``.

    Candidates are the centroid and random convex combinations; each is
    scored by its smallest ray length along ``+-`` basis vectors of F and
    random F-directions, capped at 1 so that ties go to the centroid.
    """
    centroid = V.mean(axis=0)
    if F.dim == 0:
        return centroid, math.inf
    dirs = np.vstack([F.basis, -F.basis, (rng.standard_normal((32, F.dim)) @ F.basis)])
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)

    def score(z):
        if not body.contains(z):
            return -math.inf
        return min(body.ray_max(z, u) for u in dirs)

    best, best_s = centroid, score(centroid)
    if best_s >= 1.0:
        return best, best_s
    for w in rng.dirichlet(np.ones(len(V)), samples):
        z = w @ V
        s = score(z)
        if s > best_s:
            best, best_s = z, s
            if s >= 1.0:
                break
    return best, best_s


def build_drift_perturbation(f, eps: float, r: float, theta: ThetaSequence, body: ConvexBody,
                             delta_fraction=0.5, theta_terms=DEFAULT_TERMS, rng_seed=0,
                             lipschitz_pairs=0) -> PerturbationReport:
    """Nearby map with no fixed point in ``B(0, r)``.

    ``h(x) = pi_C(g(x) + <x, y0> y0 + (3r/k) y0)`` with
    ``g = pi_D o f o pi_D``, ``D = delta x0 + (1 - delta) conv(anchors)``,
    ``k = floor(12 r / eps) + 1`` and ``y0`` an unbounded direction of the
    body orthogonal to the anchors.  ``delta`` is ``delta_fraction`` times
    ``min(1, eps / (8 rho))``.
    """
    if not r > 0:
        raise DomainError("r must be positive")
    if not 0 < delta_fraction < 1:
        raise DomainError("delta_fraction must lie in (0, 1)")
    dim = body.dim
    if not body.contains(np.zeros(dim)):
        raise DomainError("the body must contain 0")
    rng = np.random.default_rng(rng_seed)
    n = tail_terms(0.5 * eps)
    T = theta.terms(n)
    FT = f.evaluate_many(T)
    V = np.vstack([T, FT])
    V = V[_distinct_rows(V)]
    F = orthonormalize(list(V), dim=dim)

    x0, alpha = relative_center(body, F, V, rng)
    if not alpha > 0:
        raise ConstructionError("no relative-interior point found in the anchor hull")
    rho = float(np.linalg.norm(V - x0, axis=1).max())
    cap = 1.0 if rho == 0 else min(1.0, eps / (8.0 * rho))
    delta = delta_fraction * cap

    y0 = body.unbounded_direction(F)
    if y0 is None:
        raise UnboundednessError("the body offers no unbounded direction orthogonal to the anchor span")
    y0 = np.asarray(y0, dtype=float)
    far = x0 + 3.0 * r / delta * y0
    if not body.contains(far):
        raise UnboundednessError("x0 + 3 r y0 / delta is not in the body")

    k = int(math.floor(12.0 * r / eps)) + 1
    D = Hull(delta * x0 + (1.0 - delta) * V)
    g = compose(Projection(D), f, Projection(D), check=False)
    h = OrthogonalShift(g, y0, 3.0 * r / k, body)

    origin = np.zeros(dim)
    hx, gx = origin.copy(), origin.copy()
    identity_err = 0.0
    for j in range(1, k + 1):
        hx = h.evaluate(hx)
        gx = g.evaluate(gx)
        identity_err = max(identity_err, float(np.linalg.norm(hx - gx - 3.0 * r * j / k * y0)))
    hk2, gk2 = float(hx @ hx), float(gx @ gx)
    cert = exclusion_ball(Power(h, k), origin, r)

    metric = d_theta(f, h, theta, theta_terms)
    anchor_dev = float(max(np.linalg.norm(h.evaluate(t) - ft) for t, ft in zip(T, FT)))
    checks = [
        Check("distance_upper", metric.upper, eps, "<"),
        Check("anchor_deviation", anchor_dev, 0.5 * eps, "<"),
        Check("drift_identity", identity_err, IDENTITY_TOL),
        Check("pythagoras_gap", abs(hk2 - gk2 - 9.0 * r * r), PYTHAGORAS_TOL),
        Check("orbit_norm", math.sqrt(hk2), 3.0 * r - PYTHAGORAS_TOL, ">="),
        Check("exclusion_margin", cert.margin if cert is not None else -math.inf, 0.0, ">"),
    ]
    if lipschitz_pairs:
        lip = certify_lipschitz(h, lipschitz_pairs, rng_seed)
        checks.append(Check("lipschitz_ratio", lip.ratio, 1.0 + 1e-7))
    params = {"n": n, "F_dim": F.dim, "x0": x0, "alpha": alpha, "rho": rho, "delta": delta, "k": k,
              "step": 3.0 * r / k, "y0": y0, "orbit_norm": math.sqrt(hk2), "g_orbit_norm": math.sqrt(gk2)}
    return PerturbationReport(h, metric, params, checks,
                              {"g": g, "hull": D, "certificate": cert, "endpoint": hx})


def boundary_fixed_point_perturbation(f, eps: float, delta: float, cert: SBCertificate, theta: ThetaSequence,
                                      body: ConvexBody, p=1, rng_seed=0, **kw):
    """Fixed-point perturbation followed by a boundary drift of the result.

    The drift pushes every interior point along its direction, so fixed
    points of the final map can only sit on the boundary.  Returns both
    reports; the map of interest is ``drift.perturbed``.
    """
    fix = build_fixed_point_perturbation(f, eps, cert, theta, body, rng_seed=rng_seed, **kw)
    drift = build_boundary_drift(fix.perturbed, delta, p, theta, body, cert, rng_seed=rng_seed)
    return fix, drift
