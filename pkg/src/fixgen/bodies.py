"""Closed convex bodies and their oracles.

Every body answers membership, nearest-point projection, distance to the
boundary, extent along a ray, and a recession query (a unit direction
orthogonal to a given subspace along which the body is unbounded).  Closed
forms are used wherever they exist; the base class supplies generic
fallbacks built from ``contains`` and ``project``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import linprog

from . import kernels
from .errors import ConvergenceError, DimensionError, DomainError
from .geometry import Subspace, as_vector

RAY_HORIZON = 1e6
RAY_TOL = 1e-9
DYKSTRA_SWEEPS = 100_000
DYKSTRA_TOL = 1e-10


class ConvexBody:
    """Common interface.  Subclasses set ``dim`` and ``is_bounded``."""

    dim: int
    is_bounded: bool
    is_convex = True
    kind = "abstract"

    # membership -------------------------------------------------------
    def contains(self, x, tol=1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.linalg.norm(x - self.project(x)) <= tol)

    def contains_many(self, X, tol=1e-9) -> np.ndarray:
        return np.array([self.contains(x, tol) for x in X], dtype=bool)

    # projection -------------------------------------------------------
    def project(self, x) -> np.ndarray:
        raise NotImplementedError

    def project_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.array([self.project(x) for x in X]).reshape(X.shape)

    def distance(self, x) -> float:
        """Distance from ``x`` to the body."""
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - self.project(x)))

    # boundary ---------------------------------------------------------
    def boundary_distance(self, x) -> float:
        """Radius of the largest ball around ``x`` inside the body.

        The generic version minimizes ``ray_max`` over 256 directions and
        refines the best one locally; it is an upper estimate.
        """
        x = self._inside(x)
        return directional_boundary_distance(self, x, n_dirs=256, rng=np.random.default_rng(0))

    def ray_max(self, x, u, horizon=RAY_HORIZON, tol=RAY_TOL) -> float:
        """Largest ``t >= 0`` with ``x + t u`` in the body (``inf`` past
        ``horizon``).  Exponential search followed by bisection."""
        x = self._inside(x)
        u = _unit(u)
        return generic_ray_max(self, x, u, horizon, tol)

    def unbounded_direction(self, F: Subspace):
        """A unit vector ``y`` orthogonal to ``F`` such that ``x + s y`` stays
        in the body for all ``s >= 0`` and some (hence every) ``x`` in it, or
        ``None``."""
        return None

    def interior_point(self) -> np.ndarray:
        raise NotImplementedError

    # sampling ---------------------------------------------------------
    def sample(self, rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
        """``n`` points uniform on the body intersected with ``radius * B``.

        Default proposal: uniform on the ball, rejection by membership.
        """
        return _rejection(rng, n, lambda m: uniform_ball(rng, m, self.dim, radius),
                          lambda X: self.contains_many(X, tol=0.0))

    # helpers ----------------------------------------------------------
    def _inside(self, x, tol=1e-9):
        x = as_vector(x, self.dim)
        if not self.contains(x, tol):
            raise DomainError(f"point at distance {self.distance(x):.3e} outside the {self.kind}")
        return x

    def to_json(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


# ---------------------------------------------------------------------------
# generic helpers


def _unit(u):
    u = np.asarray(u, dtype=float)
    nu = np.linalg.norm(u)
    if not abs(nu - 1.0) <= 1e-9:
        raise DomainError(f"direction must be a unit vector (norm {nu:.6g})")
    return u


def uniform_ball(rng, n, dim, radius, center=None):
    """``n`` points uniform in the ball of the given radius."""
    g = rng.standard_normal((n, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    pts = g * (radius * rng.random(n) ** (1.0 / dim))[:, None]
    return pts if center is None else pts + center


def _rejection(rng, n, propose, accept, max_rounds=64):
    if n <= 0:
        return propose(1)[:0]
    out = []
    got = 0
    batch = max(64, 2 * n)
    for _ in range(max_rounds):
        if got >= n:
            break
        X = propose(batch)
        X = X[accept(X)]
        out.append(X)
        got += X.shape[0]
        if got == 0:
            batch = min(batch * 4, 1 << 20)
    if got < n:
        raise ConvergenceError("rejection sampler starved", iterations=max_rounds)
    return np.concatenate(out)[:n]


def generic_ray_max(body, x, u, horizon=RAY_HORIZON, tol=RAY_TOL):
    """Exponential search + bisection for ``sup{t >= 0 : x + t u in body}``.

    Assumes ``{t : x + t u in body}`` is an interval containing 0, which
    holds for convex bodies.
    """
    if not body.contains(x + tol * u, tol=0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while body.contains(x + hi * u, tol=0.0):
        lo = hi
        hi *= 2.0
        if hi > horizon:
            return math.inf
    while hi - lo > tol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if body.contains(x + mid * u, tol=0.0):
            lo = mid
        else:
            hi = mid
    return lo


def directional_boundary_distance(body, x, n_dirs=256, rng=None, refine=60):
    """Upper estimate of the boundary distance: the smallest ``ray_max`` over
    random directions, followed by a random local search on the sphere."""
    rng = np.random.default_rng(0) if rng is None else rng
    d = body.dim
    U = rng.standard_normal((n_dirs, d))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    U = np.vstack([U, np.eye(d), -np.eye(d)])
    vals = np.array([body.ray_max(x, u) for u in U])
    j = int(np.argmin(vals))
    best, u = vals[j], U[j]
    step = 0.5
    for _ in range(refine):
        improved = False
        for _ in range(8):
            v = u + step * rng.standard_normal(d)
            v /= np.linalg.norm(v)
            val = body.ray_max(x, v)
            if val < best:
                best, u, improved = val, v, True
        if not improved:
            step *= 0.5
    return float(best)


def recession_in_subspace(M, P):
    """Unit vector ``u = P.T z`` with ``M u <= 0`` and ``z != 0``, or None.

    ``P`` holds an orthonormal basis (rows) of the search space.  Solves one
    small LP per signed coordinate of ``z``; any nonzero cone element makes
    one of them positive.
    """
    k = P.shape[0]
    if k == 0:
        return None
    A = M @ P.T
    for i in range(k):
        for sign in (1.0, -1.0):
            c = np.zeros(k)
            c[i] = -sign
            res = linprog(c, A_ub=A, b_ub=np.zeros(A.shape[0]), bounds=[(-1, 1)] * k, method="highs")
            if res.status == 0 and -res.fun > 1e-9:
                u = res.x @ P
                return u / np.linalg.norm(u)
    return None


def _subspace_direction_in(F_rec: Subspace, G: Subspace):
    """Unit vector of ``F_rec`` orthogonal to ``G`` (None if there is none)."""
    if F_rec.dim == 0:
        return None
    if G.dim == 0:
        return F_rec.basis[0].copy()
    M = G.basis @ F_rec.basis.T
    _, s, vt = np.linalg.svd(M, full_matrices=True)
    rank = int((s > 1e-10).sum())
    if rank >= F_rec.dim:
        return None
    a = vt[rank]
    u = a @ F_rec.basis
    return u / np.linalg.norm(u)


# ---------------------------------------------------------------------------
# concrete bodies


class FullSpace(ConvexBody):
    """The whole ambient space."""

    kind = "full"
    is_bounded = False

    def __init__(self, dim: int):
        self.dim = int(dim)

    def contains(self, x, tol=1e-9):
        return True

    def contains_many(self, X, tol=1e-9):
        return np.ones(len(X), dtype=bool)

    def project(self, x):
        return np.array(x, dtype=float)

    def project_many(self, X):
        return np.array(X, dtype=float)

    def boundary_distance(self, x):
        return math.inf

    def ray_max(self, x, u, horizon=RAY_HORIZON, tol=RAY_TOL):
        _unit(u)
        return math.inf

    def unbounded_direction(self, F):
        if F.dim >= self.dim:
            return None
        return F.complement().basis[0].copy()

    def interior_point(self):
        return np.zeros(self.dim)

    def sample(self, rng, n, radius):
        return uniform_ball(rng, n, self.dim, radius)

    def to_json(self):
        return {"kind": "full", "dim": self.dim}


class Ball(ConvexBody):
    """Closed ball ``B(center, radius)``."""

    kind = "ball"
    is_bounded = True

    def __init__(self, center, radius: float):
        self.center = as_vector(center)
        self.radius = float(radius)
        if not self.radius > 0:
            raise DomainError("ball radius must be positive")
        self.dim = self.center.shape[0]

    def contains(self, x, tol=1e-9):
        return bool(np.linalg.norm(np.asarray(x) - self.center) <= self.radius + tol)

    def contains_many(self, X, tol=1e-9):
        return np.linalg.norm(np.asarray(X) - self.center, axis=1) <= self.radius + tol

    def project(self, x):
        return self.project_many(np.asarray(x, dtype=float)[None, :])[0]

    def project_many(self, X):
        Z = np.asarray(X, dtype=float) - self.center
        nz = np.linalg.norm(Z, axis=1, keepdims=True)
        scale = np.where(nz > self.radius, self.radius / np.maximum(nz, 1e-300), 1.0)
        return self.center + Z * scale

    def boundary_distance(self, x):
        x = self._inside(x)
        return max(0.0, self.radius - float(np.linalg.norm(x - self.center)))

    def ray_max(self, x, u, horizon=RAY_HORIZON, tol=RAY_TOL):
        x = self._inside(x)
        u = _unit(u)
        z = x - self.center
        b = float(u @ z)
        c = float(z @ z) - self.radius ** 2
        disc = b * b - c
        return max(0.0, -b + math.sqrt(max(disc, 0.0)))

    def interior_point(self):
        return self.center.copy()

    def sample(self, rng, n, radius):
        own = self.radius
        # propose from whichever ball is smaller
        if radius <= own:
            return _rejection(rng, n, lambda m: uniform_ball(rng, m, self.dim, radius),
                              lambda X: self.contains_many(X, tol=0.0))
        return _rejection(rng, n, lambda m: uniform_ball(rng, m, self.dim, own, self.center),
                          lambda X: np.linalg.norm(X, axis=1) <= radius)

    def to_json(self):
        return {"kind": "ball", "center": self.center.tolist(), "radius": self.radius}


class Tube(ConvexBody):
    """``{x : dist(x, F) <= radius}`` for a subspace ``F``."""

    kind = "tube"

    def __init__(self, F: Subspace, radius: float):
        self.F = F
        self.radius = float(radius)
        if not self.radius > 0:
            raise DomainError("tube radius must be positive")
        self.dim = F.ambient
        self.is_bounded = F.dim == 0

    def _perp(self, X):
        return X - (X @ self.F.basis.T) @ self.F.basis

    def contains(self, x, tol=1e-9):
        return bool(np.linalg.norm(self._perp(np.asarray(x, dtype=float))) <= self.radius + tol)

    def contains_many(self, X, tol=1e-9):
        return np.linalg.norm(self._perp(np.asarray(X, dtype=float)), axis=1) <= self.radius + tol

    def project(self, x):
        return self.project_many(np.asarray(x, dtype=float)[None, :])[0]

    def project_many(self, X):
        X = np.asarray(X, dtype=float)
        P = self._perp(X)
        npp = np.linalg.norm(P, axis=1, keepdims=True)
        scale = np.where(npp > self.radius, self.radius / np.maximum(npp, 1e-300), 1.0)
        return X - P + P * scale

    def boundary_distance(self, x):
        x = self._inside(x)
        return max(0.0, self.radius - float(np.linalg.norm(self._perp(x))))

    def ray_max(self, x, u, horizon=RAY_HORIZON, tol=RAY_TOL):
        x = self._inside(x)
        u = _unit(u)
        p = self._perp(x)
        v = self._perp(u)
        a = float(v @ v)
        if a <= 1e-24:
            return math.inf
        b = float(p @ v)
        c = float(p @ p) - self.radius ** 2
        disc = b * b - a * c
        return max(0.0, (-b + math.sqrt(max(disc, 0.0))) / a)

    def unbounded_direction(self, G):
        return _subspace_direction_in(self.F, G)

    def interior_point(self):
        return np.zeros(self.dim)

    def sample(self, rng, n, radius):
        # the body inside radius*B sits in (radius*B_F) x (r*B_{F-perp});
        # propose uniformly from that product and keep points of norm <= radius
        k = self.F.dim
        comp = self.F.complement()
        r = min(self.radius, radius)

        def propose(m):
            a = uniform_ball(rng, m, k, radius) @ self.F.basis if k else np.zeros((m, self.dim))
            b = uniform_ball(rng, m, comp.dim, r) @ comp.basis if comp.dim else np.zeros((m, self.dim))
            return a + b

        return _rejection(rng, n, propose, lambda X: np.linalg.norm(X, axis=1) <= radius)

    def to_json(self):
        return {"kind": "tube", "subspace": self.F.to_json(), "radius": self.radius}


class BluntCone(ConvexBody):
    """``{x : ||pi_{F-perp} x|| - beta <= (beta/alpha) ||pi_F x||}``.

    The set is star-shaped about 0 but *not* convex once ``0 < dim F <
    d``: with ``F = span{e1}`` and ``alpha = beta = 1`` both ``(1, 2)`` and
    ``(-1, 2)`` belong to it while their midpoint ``(0, 2)`` does not.  It is
    used as a membership test for certificates.  ``project`` returns an exact
    nearest point (membership depends only on the pair of norms
    ``(||pi_F x||, ||pi_{F-perp} x||)``, which reduces the problem to a convex
    planar one), but that map is not nonexpansive.
    """

    kind = "blunt_cone"
    is_convex = False

    def __init__(self, F: Subspace, alpha: float, beta: float):
        if not (alpha > 0 and beta > 0):
            raise DomainError("alpha and beta must be positive")
        self.F = F
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.slope = self.beta / self.alpha
        self.dim = F.ambient
        self._comp = F.complement()
        self.is_bounded = F.dim == 0 and self._comp.dim > 0

    def _norms(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        a = X @ self.F.basis.T
        return np.linalg.norm(a, axis=1), np.linalg.norm(X - a @ self.F.basis, axis=1)

    def slack(self, x) -> float:
        """``||pi_perp x|| - beta - (beta/alpha)||pi_F x||`` (<= 0 inside)."""
        p, q = self._norms(x)
        return float(q[0] - self.beta - self.slope * p[0])

    def contains(self, x, tol=1e-9):
        return self.slack(x) <= tol

    def contains_many(self, X, tol=1e-9):
        p, q = self._norms(X)
        return q - self.beta - self.slope * p <= tol

    def _planar_nearest(self, p, q):
        # nearest point of {(p', q') : p', q' >= 0, q' <= beta + c p'} in the
        # quadrant; p' is pinned to 0 when F is trivial
        beta, c = self.beta, self.slope
        if self.F.dim == 0:
            return 0.0, min(q, beta)
        if q <= beta + c * p:
            return p, q
        # foot on the line q' = beta + c p', clamped to p' >= 0
        s = (p + c * (q - beta)) / (1.0 + c * c)
        s = max(s, 0.0)
        return s, beta + c * s

    def project(self, x):
        x = as_vector(x, self.dim)
        if self._comp.dim == 0:
            return x.copy()
        a = self.F.project(x)
        b = x - a
        p, q = float(np.linalg.norm(a)), float(np.linalg.norm(b))
        p2, q2 = self._planar_nearest(p, q)
        ua = a / p if p > 0 else (self.F.basis[0] if self.F.dim else np.zeros(self.dim))
        ub = b / q if q > 0 else self._comp.basis[0]
        return p2 * ua + q2 * ub

    def boundary_distance(self, x):
        x = self._inside(x)
        if self._comp.dim == 0:
            return math.inf
        p, q = self._norms(x)
        p, q = float(p[0]), float(q[0])
        beta, c = self.beta, self.slope
        if self.F.dim == 0:
            return max(0.0, beta - q)
        # distance in the norm plane to the closed region q' >= beta + c p'
        s = (p + c * (q - beta)) / (1.0 + c * c)
        if s <= 0:
            return math.hypot(p, q - beta)
        return max(0.0, (beta + c * p - q) / math.sqrt(1.0 + c * c))

    def ray_max(self, x, u, horizon=RAY_HORIZON, tol=RAY_TOL):
        """Supremum of ``{t >= 0 : x + t u in D}``.

        The set of such ``t`` need not be an interval, so the boundary
        crossings are located exactly as real roots of a quartic obtained by
        squaring ``||b + t v|| = beta + c ||a + t w||`` twice.
        """
        x = self._inside(x)
        u = _unit(u)
        a = self.F.project(x)
        b = x - a
        w = self.F.project(u)
        v = u - w
        beta, c = self.beta, self.slope

        def g(t):
            return np.linalg.norm(b + t * v) - beta - c * np.linalg.norm(a + t * w)

        vv, ww = v @ v, w @ w
        if math.sqrt(vv) <= c * math.sqrt(ww) + 1e-15:
            # asymptotic slope is nonpositive; check a far point to confirm
            if g(horizon) <= 0:
                return math.inf
        # ||b+tv||^2 - beta^2 - c^2||a+tw||^2 = 2 beta c ||a+tw||
        P2 = np.array([vv - c * c * ww, 2 * (b @ v) - 2 * c * c * (a @ w), b @ b - beta ** 2 - c * c * (a @ a)])
        Q2 = (2 * beta * c) ** 2 * np.array([ww, 2 * (a @ w), a @ a])
        quartic = np.polysub(np.polymul(P2, P2), Q2)
        roots = np.roots(np.trim_zeros(quartic, "f")) if np.any(quartic) else np.array([])
        cands = sorted(r.real for r in roots if abs(r.imag) < 1e-7 * max(1.0, abs(r)) and r.real > 0)
        # bracket each candidate crossing and polish with bisection on g
        pts = [0.0] + cands
        far = 2.0 * (max(cands) if cands else 1.0) + 1.0
        pts.append(far)
        last = 0.0
        for lo_t, hi_t in zip(pts[:-1], pts[1:]):
            mid = 0.5 * (lo_t + hi_t)
            if g(mid) <= 0:
                last = hi_t
        if last == far:
            return math.inf
        # polish the crossing at ``last``
        lo_t, hi_t = last * (1 - 1e-6) - 1e-12, last * (1 + 1e-6) + 1e-12
        if g(lo_t) <= 0 < g(hi_t):
            while hi_t - lo_t > 1e-3 * tol * max(1.0, lo_t):
                mid = 0.5 * (lo_t + hi_t)
                if g(mid) <= 0:
                    lo_t = mid
                else:
                    hi_t = mid
            return lo_t
        return last

    def unbounded_direction(self, G):
        if self._comp.dim == 0:
            return FullSpace(self.dim).unbounded_direction(G)
        Gp = G.complement()
        if Gp.dim == 0 or self.F.dim == 0:
            return None
        # direction of G-perp with the largest F component
        M = self.F.basis @ Gp.basis.T
        _, s, vt = np.linalg.svd(M)
        sig = float(s[0])
        u = vt[0] @ Gp.basis
        u /= np.linalg.norm(u)
        if math.sqrt(max(0.0, 1 - sig * sig)) < self.slope * sig - 1e-12 or sig > 1 - 1e-12:
            return u
        return None

    def interior_point(self):
        return np.zeros(self.dim)

    def to_json(self):
        return {"kind": "blunt_cone", "subspace": self.F.to_json(), "alpha": self.alpha, "beta": self.beta}


class HalfspaceIntersection(ConvexBody):
    """``{x : normals @ x <= offsets}``."""

    kind = "halfspaces"

    def __init__(self, normals, offsets):
        A = np.atleast_2d(np.asarray(normals, dtype=float))
        b = np.asarray(offsets, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise DimensionError("one offset per normal required")
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms == 0):
            raise DomainError("zero normal")
        self.normals = np.ascontiguousarray(A)
        self.offsets = np.ascontiguousarray(b)
        self._norms = norms
        self.dim = A.shape[1]
        self.is_bounded = recession_in_subspace(self.normals, np.eye(self.dim)) is None
        self._center = None

    def _margins(self, X):
        return (np.atleast_2d(X) @ self.normals.T - self.offsets) / self._norms

    def contains(self, x, tol=1e-9):
        return bool(self._margins(np.asarray(x, dtype=float)).max() <= tol)

    def contains_many(self, X, tol=1e-9):
        return self._margins(np.asarray(X, dtype=float)).max(axis=1) <= tol

    def project(self, x):
        x = as_vector(x, self.dim)
        viol = self._margins(x)[0]
        if viol.max() <= 0:
            return x.copy()
        if self.normals.shape[0] == 1:
            a = self.normals[0]
            return x - (a @ x - self.offsets[0]) / (a @ a) * a
        y, sweeps, resid = kernels.dykstra_halfspaces(
            np.ascontiguousarray(x), self.normals, self.offsets, DYKSTRA_SWEEPS, DYKSTRA_TOL
        )
        if not resid <= DYKSTRA_TOL:
            raise ConvergenceError("Dykstra projection", residual=resid, iterations=sweeps)
        return y

    def boundary_distance(self, x):
        x = self._inside(x)
        return max(0.0, float(-self._margins(x).max()))

    def ray_max(self, x, u, horizon=RAY_HORIZON, tol=RAY_TOL):
        x = self._inside(x)
        u = _unit(u)
        rate = self.normals @ u
        room = self.offsets - self.normals @ x
        hit = rate > 1e-15
        if not np.any(hit):
            return math.inf
        return max(0.0, float((room[hit] / rate[hit]).min()))

    def unbounded_direction(self, G):
        return recession_in_subspace(self.normals, G.complement().basis)

    def interior_point(self):
        """Chebyshev center (radius capped at 1), ties broken toward the
        origin in the l1 norm."""
        if self._center is None:
            d, m = self.dim, self.normals.shape[0]
            A = np.hstack([self.normals, self._norms[:, None]])
            c = np.zeros(d + 1)
            c[-1] = -1.0
            res = linprog(c, A_ub=A, b_ub=self.offsets, bounds=[(None, None)] * d + [(0, 1.0)], method="highs")
            if res.status != 0:
                raise DomainError("half-space intersection appears empty")
            rad = res.x[-1]
            # variables (x, w) with |x_i| <= w_i; minimize sum w at that radius
            c2 = np.concatenate([np.zeros(d), np.ones(d)])
            I = np.eye(d)
            A2 = np.vstack([
                np.hstack([self.normals, np.zeros((m, d))]),
                np.hstack([I, -I]),
                np.hstack([-I, -I]),
            ])
            b2 = np.concatenate([self.offsets - rad * (1 - 1e-9) * self._norms, np.zeros(2 * d)])
            res2 = linprog(c2, A_ub=A2, b_ub=b2, bounds=[(None, None)] * (2 * d), method="highs")
            self._center = res2.x[:d] if res2.status == 0 else res.x[:d]
        return self._center.copy()

    def to_json(self):
        return {"kind": "halfspaces", "normals": self.normals.tolist(), "offsets": self.offsets.tolist()}


class SolidParaboloid(ConvexBody):
    """``{x : x_1 >= sum_{i >= 2} x_i^2}``; strictly convex, unbounded along e_1."""

    kind = "paraboloid"
    is_bounded = False

    def __init__(self, dim: int):
        if dim < 2:
            raise DimensionError("paraboloid needs dimension >= 2")
        self.dim = int(dim)

    def _gap(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return (X[:, 1:] ** 2).sum(axis=1) - X[:, 0]

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        if self._gap(x)[0] <= 0:
            return True
        return bool(np.linalg.norm(x - self.project(x)) <= tol)

    def contains_many(self, X, tol=1e-9):
        g = self._gap(X)
        out = g <= 0
        for i in np.nonzero(~out)[0]:
            out[i] = self.contains(X[i], tol)
        return out

    def project(self, x):
        """Nearest point for exterior ``x``: ``y' = x'/(1+2m)``,
        ``y_1 = x_1 + m`` where ``m >= 0`` solves
        ``phi(m) = ||x'||^2/(1+2m)^2 - x_1 - m = 0`` (safeguarded Newton)."""
        x = as_vector(x, self.dim)
        xp2 = float(x[1:] @ x[1:])
        x1 = float(x[0])
        if xp2 <= x1:
            return x.copy()
        lo, hi = 0.0, max(0.0, xp2 - x1) + 1.0
        m = 0.5 * (lo + hi)
        for _ in range(200):
            den = 1.0 + 2.0 * m
            phi = xp2 / den ** 2 - x1 - m
            if abs(phi) < 1e-15 * max(1.0, xp2):
                break
            if phi > 0:
                lo = m
            else:
                hi = m
            if hi - lo < 1e-16 * max(1.0, hi):
                break
            dphi = -4.0 * xp2 / den ** 3 - 1.0
            step = m - phi / dphi
            m = step if lo <= step <= hi else 0.5 * (lo + hi)
        y = x / (1.0 + 2.0 * m)
        y[0] = x1 + m
        return y

    def boundary_distance(self, x):
        """Distance to the surface via the planar reduction: with ``a = x_1``
        and ``b = ||x'||`` minimize ``(s^2 - a)^2 + (s - b)^2`` over real
        ``s``, whose critical points solve ``2 s^3 + (1 - 2a) s - b = 0``."""
        x = self._inside(x)
        return self._surface_distance(float(x[0]), float(np.linalg.norm(x[1:])))

    @staticmethod
    def _surface_distance(a, b):
        roots = np.roots([2.0, 0.0, 1.0 - 2.0 * a, -b])
        best = math.inf
        for r in roots:
            if abs(r.imag) > 1e-6 * max(1.0, abs(r)):
                continue
            s = r.real
            for _ in range(3):
                fp = 6 * s * s + 1 - 2 * a
                if fp == 0:
                    break
                s -= (2 * s ** 3 + (1 - 2 * a) * s - b) / fp
            best = min(best, math.hypot(s * s - a, s - b))
        return best

    def ray_max(self, x, u, horizon=RAY_HORIZON, tol=RAY_TOL):
        x = self._inside(x)
        u = _unit(u)
        A = float(u[1:] @ u[1:])
        B = 2.0 * float(x[1:] @ u[1:]) - float(u[0])
        Cc = float(x[1:] @ x[1:]) - float(x[0])
        if A <= 1e-24:
            if u[0] >= 0:
                return math.inf
            return max(0.0, -Cc / -u[0])
        disc = B * B - 4 * A * Cc
        return max(0.0, (-B + math.sqrt(max(disc, 0.0))) / (2 * A))

    def unbounded_direction(self, G):
        e1 = np.zeros(self.dim)
        e1[0] = 1.0
        if np.linalg.norm(G.project(e1)) <= 1e-12:
            return e1
        return None

    def interior_point(self):
        e1 = np.zeros(self.dim)
        e1[0] = 1.0
        return e1

    def sample(self, rng, n, radius):
        # exact uniform sampling of {x_1 <= radius}: x_1 has density
        # proportional to x_1^((d-1)/2), then x' uniform in a ball of radius
        # sqrt(x_1); reject points of norm > radius
        d = self.dim

        def propose(m):
            x1 = radius * rng.random(m) ** (2.0 / (d + 1))
            xp = uniform_ball(rng, m, d - 1, 1.0) * np.sqrt(x1)[:, None]
            return np.column_stack([x1, xp])

        return _rejection(rng, n, propose, lambda X: np.linalg.norm(X, axis=1) <= radius)

    def to_json(self):
        return {"kind": "paraboloid", "dim": self.dim}


class TranslatedBody(ConvexBody):
    """``base + shift``."""

    kind = "translated"

    def __init__(self, base: ConvexBody, shift):
        self.base = base
        self.shift = as_vector(shift, base.dim)
        self.dim = base.dim
        self.is_bounded = base.is_bounded
        self.is_convex = base.is_convex

    def contains(self, x, tol=1e-9):
        return self.base.contains(np.asarray(x, dtype=float) - self.shift, tol)

    def contains_many(self, X, tol=1e-9):
        return self.base.contains_many(np.asarray(X, dtype=float) - self.shift, tol)

    def project(self, x):
        return self.base.project(np.asarray(x, dtype=float) - self.shift) + self.shift

    def project_many(self, X):
        return self.base.project_many(np.asarray(X, dtype=float) - self.shift) + self.shift

    def boundary_distance(self, x):
        return self.base.boundary_distance(np.asarray(x, dtype=float) - self.shift)

    def ray_max(self, x, u, horizon=RAY_HORIZON, tol=RAY_TOL):
        return self.base.ray_max(np.asarray(x, dtype=float) - self.shift, u, horizon, tol)

    def unbounded_direction(self, F):
        return self.base.unbounded_direction(F)

    def interior_point(self):
        return self.base.interior_point() + self.shift

    def sample(self, rng, n, radius):
        # uniform on (base + shift) within radius*B: sample the base within a
        # ball that covers the shifted ball, then keep the right points
        R = radius + float(np.linalg.norm(self.shift))
        out = [np.zeros((0, self.dim))]
        got = 0
        while got < n:
            X = self.base.sample(rng, max(64, 2 * n), R) + self.shift
            X = X[np.linalg.norm(X, axis=1) <= radius]
            out.append(X)
            got += X.shape[0]
        return np.concatenate(out)[:n]

    def to_json(self):
        return {"kind": "translated", "base": self.base.to_json(), "shift": self.shift.tolist()}


class Hull(ConvexBody):
    """Convex hull of finitely many points (rows of ``vertices``)."""

    kind = "hull"
    is_bounded = True

    def __init__(self, vertices):
        V = np.atleast_2d(np.asarray(vertices, dtype=float))
        if V.shape[0] == 0:
            raise DomainError("hull of no points")
        self.vertices = np.ascontiguousarray(V)
        self.dim = V.shape[1]

    def project(self, x):
        x = as_vector(x, self.dim)
        if self.vertices.shape[0] == 1:
            return self.vertices[0].copy()
        y, _ = kernels.nearest_in_hull(self.vertices, np.ascontiguousarray(x), 1e-14)
        return y

    def barycentric(self, x):
        """Weights of the nearest hull point."""
        _, w = kernels.nearest_in_hull(self.vertices, np.ascontiguousarray(as_vector(x, self.dim)), 1e-14)
        return w

    def interior_point(self):
        return self.vertices.mean(axis=0)

    def sample(self, rng, n, radius):
        """Random convex combinations (flat Dirichlet weights) of the
        vertices inside ``radius * B``; not uniform in volume."""
        V = self.vertices
        return _rejection(rng, n, lambda m: rng.dirichlet(np.ones(len(V)), m) @ V,
                          lambda X: np.linalg.norm(X, axis=1) <= radius)

    def to_json(self):
        return {"kind": "hull", "vertices": self.vertices.tolist()}


# ---------------------------------------------------------------------------
# JSON catalog

BODY_KINDS = ("ball", "tube", "blunt_cone", "halfspaces", "paraboloid", "full", "translated", "hull")


def body_from_json(spec: dict, dim: int | None = None) -> ConvexBody:
    """Build a body from its catalog entry, e.g.
    ``{"kind": "tube", "subspace": [[1, 0, 0], [0, 1, 0]], "radius": 1.0}``."""
    kind = spec.get("kind")
    if kind == "ball":
        return Ball(spec["center"], spec["radius"])
    if kind == "tube":
        return Tube(Subspace.from_json(spec["subspace"], dim=dim), spec["radius"])
    if kind == "blunt_cone":
        return BluntCone(Subspace.from_json(spec["subspace"], dim=dim), spec["alpha"], spec["beta"])
    if kind == "halfspaces":
        return HalfspaceIntersection(spec["normals"], spec["offsets"])
    if kind == "paraboloid":
        return SolidParaboloid(spec.get("dim", dim))
    if kind == "full":
        return FullSpace(spec.get("dim", dim))
    if kind == "translated":
        return TranslatedBody(body_from_json(spec["base"], dim), spec["shift"])
    if kind == "hull":
        return Hull(spec["vertices"])
    raise DomainError(f"unknown body kind {kind!r}")
