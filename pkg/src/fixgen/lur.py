"""Moduli of convexity, the angle bound at boundary points and the
milestone contraction of Picard orbits towards a boundary fixed point."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import Ball, ConvexBody, RAY_HORIZON
from .dynamics import OrbitTrace
from .errors import BudgetError, DomainError, NotLURError
from .geometry import as_vector

BOUNDARY_TOL = 1e-6
ANGLE_TOL = 1e-9
MONOTONE_TOL = 1e-10
FIXED_TOL = 1e-8
SAMPLED_SAFETY = 0.5


# ---------------------------------------------------------------------------
# moduli


def ball_modulus(a: float, R: float, eps: float) -> float:
    """Modulus of a ball of radius ``R`` at a point at distance ``a`` from
    its centre.

    The farthest midpoint from the boundary is reached with ``||y - c|| = R``
    and ``<x - c, y - c> = min(aR, (a^2 + R^2 - eps^2)/2)``; the value is
    ``R - ||x + y - 2c|| / 2``, written without cancellation.

    Examples
    --------
    >>> ball_modulus(0.0, 2.0, 1.0)
    1.0
    >>> round(ball_modulus(1.0, 1.0, 1.0), 12) == round(1 - math.sqrt(1 - 0.25), 12)
    True
    """
    # aR <= (a^2 + R^2 - eps^2)/2 exactly when eps <= R - a
    if eps <= R - a:
        num = (R - a) * (3.0 * R + a)
        m = a * R
    else:
        num = 2.0 * (R - a) * (R + a) + eps * eps
        m = 0.5 * (a * a + R * R - eps * eps)
    s = math.sqrt(max(a * a + R * R + 2.0 * m, 0.0))
    return max(num, 0.0) / (2.0 * (2.0 * R + s))


class ConvexityModulus:
    """``delta(x, eps)`` and ``sup_radius(x)`` for one body.  ``method`` is
    ``"closed_form"`` or ``"sampled"``."""

    method = "closed_form"

    def __init__(self, body: ConvexBody):
        self.body = body

    def sup_radius(self, x) -> float:
        raise NotImplementedError

    def _value(self, x, eps) -> float:
        raise NotImplementedError

    def __call__(self, x, eps) -> float:
        x = as_vector(x, self.body.dim)
        if not self.body.contains(x, tol=BOUNDARY_TOL):
            raise DomainError("the modulus is defined at points of the body")
        if not 0 < eps < self.sup_radius(x):
            raise DomainError(f"eps={eps:.6g} outside (0, {self.sup_radius(x):.6g})")
        return self._value(x, eps)


class BallModulus(ConvexityModulus):
    def __init__(self, body: Ball):
        super().__init__(body)
        self.center = body.center
        self.radius = body.radius

    def sup_radius(self, x):
        return float(np.linalg.norm(np.asarray(x) - self.center)) + self.radius

    def _value(self, x, eps):
        return ball_modulus(min(float(np.linalg.norm(x - self.center)), self.radius), self.radius, eps)


class SampledModulus(ConvexityModulus):
    """Direction search for the modulus of a general body.

    For ``y = x + s u`` the midpoint distance to the boundary is concave in
    ``s``, so along each direction the infimum over ``s in [eps, s_max]``
    sits at an end point.  The minimum over 512 seeded directions (plus the
    coordinate axes), refined around the best ones, is multiplied by
    ``safety`` so the returned value errs low.
    """

    method = "sampled"

    def __init__(self, body: ConvexBody, n_dirs=512, seed=0, safety=SAMPLED_SAFETY, refine=8):
        super().__init__(body)
        rng = np.random.default_rng(seed)
        d = body.dim
        U = np.vstack([np.eye(d), -np.eye(d), rng.standard_normal((n_dirs, d))])
        self.dirs = U / np.linalg.norm(U, axis=1, keepdims=True)
        self.safety = safety
        self.refine = refine
        self._rng = rng

    def _reach(self, x, u):
        s = self.body.ray_max(x, u)
        return math.inf if s >= 0.5 * RAY_HORIZON else s

    def sup_radius(self, x):
        x = np.asarray(x, dtype=float)
        return max(self._reach(x, u) for u in self.dirs)

    def _along(self, x, u, eps):
        s_max = self._reach(x, u)
        if s_max < eps:
            return math.inf
        bd = self.body.boundary_distance
        val = bd(x + 0.5 * eps * u)
        if math.isfinite(s_max):
            val = min(val, bd(x + 0.5 * s_max * u))
        return val

    def raw(self, x, eps) -> float:
        """The sampled infimum before the safety factor."""
        vals = np.array([self._along(x, u, eps) for u in self.dirs])
        order = np.argsort(vals)[: self.refine]
        best = float(vals[order[0]])
        d = self.body.dim
        for i in order:
            u = self.dirs[i]
            step = 0.25
            for _ in range(30):
                w = u + step * self._rng.standard_normal(d) / math.sqrt(d)
                w /= np.linalg.norm(w)
                v = self._along(x, w, eps)
                if v < best:
                    best, u = v, w
                else:
                    step *= 0.8
        return best

    def _value(self, x, eps):
        return self.safety * self.raw(x, eps)


def convexity_modulus(body: ConvexBody, **kw) -> ConvexityModulus:
    """Closed form for balls, direction search otherwise."""
    if isinstance(body, Ball):
        return BallModulus(body)
    return SampledModulus(body, **kw)


def delta_C(body: ConvexBody, x, eps, **kw):
    """``(value, method)`` for the modulus of ``body`` at ``x``."""
    mod = convexity_modulus(body, **kw)
    return mod(x, eps), mod.method


# ---------------------------------------------------------------------------
# angle bound


@dataclass(frozen=True)
class AngleCheck:
    passed: bool
    slack: float
    inner: float
    bound: float


def angle_bound(s: float, delta_val: float) -> float:
    """``-s / sqrt(s^2 + 4 delta^2)``."""
    return -s / math.sqrt(s * s + 4.0 * delta_val * delta_val)


def angle_bound_check(x, y, z, r, s, delta_val, body: ConvexBody | None = None, tol=ANGLE_TOL) -> AngleCheck:
    """Compare ``<(z-y)/|z-y|, (x-y)/|x-y|>`` with ``-s / sqrt(s^2 + 4 delta^2)``.

    ``y`` must be a boundary point (checked when ``body`` is given) and
    ``r <= ||x - y|| <= s``.
    """
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    dxy = float(np.linalg.norm(x - y))
    dzy = float(np.linalg.norm(z - y))
    if dzy == 0.0 or dxy == 0.0:
        raise DomainError("x and z must differ from y")
    if not (r <= dxy * (1 + 1e-12) and dxy <= s * (1 + 1e-12)):
        raise DomainError(f"need r <= ||x - y|| <= s, got r={r:.6g}, ||x-y||={dxy:.6g}, s={s:.6g}")
    if body is not None:
        if body.distance(y) > BOUNDARY_TOL or body.boundary_distance(y) > BOUNDARY_TOL:
            raise DomainError("y is not a boundary point")
    inner = float((z - y) @ (x - y)) / (dzy * dxy)
    b = angle_bound(s, delta_val)
    return AngleCheck(inner >= b - tol, inner - b, inner, b)


# ---------------------------------------------------------------------------
# contraction profile


class ContractionProfile:
    """``beta(r)``, ``eps(r)`` and ``alpha(r)`` built from the modulus at the
    fixed point ``x0``."""

    def __init__(self, modulus: ConvexityModulus, x0):
        self.modulus = modulus
        self.x0 = as_vector(x0, modulus.body.dim)
        self.sup_radius = modulus.sup_radius(self.x0)
        self._cache = {}

    def delta(self, r):
        if r not in self._cache:
            self._cache[r] = self.modulus(self.x0, r / 8.0)
        return self._cache[r]

    def beta(self, r):
        return 1.0 - self.beta_gap(r)

    def beta_gap(self, r):
        """``1 - beta(r)``, computed without cancellation."""
        # r reaches the diameter for antipodal starts; the modulus itself
        # is only evaluated at r/8
        if not 0 < r <= self.sup_radius:
            raise DomainError(f"r={r:.6g} outside (0, {self.sup_radius:.6g}]")
        dv = self.delta(r)
        if dv <= 0:
            raise NotLURError(f"modulus vanishes at r/8 = {r / 8:.6g}")
        s = math.sqrt(25.0 * r * r + 256.0 * dv * dv)
        return 256.0 * dv * dv / (s * (s + 5.0 * r))

    def _q(self, r):
        # q = sqrt((1 + beta)/2) and 1 - q
        b = self.beta_gap(r)
        q = math.sqrt(1.0 - 0.5 * b)
        return q, 0.5 * b / (1.0 + q)

    def eps(self, r):
        q, one_minus_q = self._q(r)
        return min(0.125, 0.5 * one_minus_q / q)

    def alpha(self, r):
        return max(0.75, self.product(r))

    def product(self, r):
        """``sqrt((1 + beta)/2) (1 + eps)``, which must stay below 1."""
        q, _ = self._q(r)
        return q * (1.0 + self.eps(r))

    def product_gap(self, r):
        """``1 - product(r)``; positive even where ``product`` rounds to 1."""
        q, one_minus_q = self._q(r)
        if 0.5 * one_minus_q / q >= 0.125:
            return 1.0 - 1.125 * q
        return 0.5 * one_minus_q

    def alpha_gap(self, r):
        """``1 - alpha(r)``."""
        return min(0.25, self.product_gap(r))


def contraction_profile(modulus: ConvexityModulus, x0) -> ContractionProfile:
    return ContractionProfile(modulus, x0)


# ---------------------------------------------------------------------------
# milestones


@dataclass
class Milestone:
    """``k`` steps took the distance to the fixed point from ``r`` to
    ``r_k <= alpha r``; ``k`` is ``None`` when the budget ran out."""

    k: int | None
    r: float
    r_k: float
    alpha: float
    alpha_gap: float
    monotone: bool
    distances: np.ndarray = field(repr=False)
    endpoint: np.ndarray = field(repr=False)

    @property
    def factor(self) -> float:
        return self.r_k / self.r if self.r > 0 else 0.0


def _check_fixed(f, x_fix):
    res = float(np.linalg.norm(f.evaluate(x_fix) - x_fix))
    if res > FIXED_TOL:
        raise DomainError(f"x_fix is not a fixed point (residual {res:.3e})")


def _milestone(f, x_fix, x, profile, k_budget, stop_at=0.0):
    r = float(np.linalg.norm(x - x_fix))
    if r == 0.0:
        raise DomainError("x coincides with the fixed point")
    a = profile.alpha(r)
    gap = profile.alpha_gap(r)
    dist = [r]
    y = x
    hit = None
    for k in range(1, k_budget + 1):
        y = f.evaluate(y)
        dist.append(float(np.linalg.norm(y - x_fix)))
        if dist[-1] <= a * r or dist[-1] <= stop_at:
            hit = k
            break
    D = np.array(dist)
    mono = bool(np.all(np.diff(D) <= MONOTONE_TOL))
    return Milestone(hit, r, dist[-1], a, gap, mono, D, y)


def verify_milestone(f, x_fix, x, profile: ContractionProfile, k_budget=10_000) -> Milestone:
    """First ``k <= k_budget`` with ``||f^k(x) - x_fix|| <= alpha(r) r``."""
    x_fix = as_vector(x_fix, f.dim)
    _check_fixed(f, x_fix)
    return _milestone(f, x_fix, as_vector(x, f.dim), profile, k_budget)


@dataclass
class ChainResult:
    trace: OrbitTrace
    chain: list

    @property
    def radii(self):
        return [m.r for m in self.chain] + ([self.chain[-1].r_k] if self.chain else [])

    def to_rows(self):
        return [(i, m.k, m.r, m.r_k, m.alpha, m.factor) for i, m in enumerate(self.chain)]


def iterate_to_fixed_point(f, x, x_fix, profile: ContractionProfile, tol=1e-6, k_budget=10_000,
                           max_milestones=10_000) -> ChainResult:
    """Chain of milestones from ``x`` until ``||f^k(x) - x_fix|| <= tol``.

    Raises
    ------
    BudgetError
        When a milestone is not reached within ``k_budget`` steps; the
        diagnostics hold the chain so far and the last distances.
    """
    x_fix = as_vector(x_fix, f.dim)
    _check_fixed(f, x_fix)
    y = as_vector(x, f.dim)
    chain, pts = [], [y]
    while float(np.linalg.norm(y - x_fix)) > tol:
        if len(chain) >= max_milestones:
            raise BudgetError("too many milestones", {"chain": [m.r for m in chain]})
        m = _milestone(f, x_fix, y, profile, k_budget, stop_at=tol)
        if m.k is None:
            raise BudgetError(
                f"no milestone within {k_budget} steps from distance {m.r:.6g} (alpha={m.alpha:.6g})",
                {"chain": [c.r for c in chain], "last_distances": m.distances[-5:].tolist(), "alpha": m.alpha},
            )
        chain.append(m)
        y = m.endpoint
        pts.append(y)
    P = np.array(pts)
    res = np.linalg.norm(f.evaluate_many(P) - P, axis=1)
    body = profile.modulus.body
    bd = np.array([body.boundary_distance(p) for p in P])
    return ChainResult(OrbitTrace(P, res, bd, "picard"), chain)
