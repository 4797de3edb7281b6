"""Orbits, the averaged fixed-point search and exclusion certificates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .geometry import as_vector

KM_TOL = 1e-8
KM_MAX_ITER = 100_000


@dataclass
class OrbitTrace:
    """Iterates with their residuals ``||f(x_k) - x_k||`` and distances to
    the boundary of the map's domain.  ``scheme`` is ``"picard"`` or ``"km"``."""

    points: np.ndarray
    residuals: np.ndarray
    boundary_distances: np.ndarray
    scheme: str = "picard"

    def __len__(self):
        return self.points.shape[0]

    def rows(self):
        """``(k, coords, residual, boundary_distance)`` per iterate."""
        for k, (p, r, b) in enumerate(zip(self.points, self.residuals, self.boundary_distances)):
            yield k, p, float(r), float(b)


def _boundary_distance(body, x):
    try:
        return body.boundary_distance(x)
    except NotImplementedError:
        return math.nan


def picard_orbit(f, x0, k: int, boundary=True) -> OrbitTrace:
    """``x0, f(x0), ..., f^k(x0)``.

    Each point is evaluated once; the residual of the last point costs one
    extra evaluation.  Set ``boundary=False`` to skip the boundary distances
    (they are then NaN).
    """
    if k < 0:
        raise DomainError("orbit length must be nonnegative")
    x = as_vector(x0, f.dim)
    pts = [x]
    for _ in range(k + 1):
        x = f.evaluate(x)
        pts.append(x)
    P = np.array(pts)
    res = np.linalg.norm(P[1:] - P[:-1], axis=1)
    P = P[:-1]
    if boundary:
        bd = np.array([_boundary_distance(f.domain, p) for p in P])
    else:
        bd = np.full(P.shape[0], math.nan)
    return OrbitTrace(P, res, bd, "picard")


def km_orbit(f, x0, k: int, boundary=True) -> OrbitTrace:
    """The first ``k + 1`` points of the averaged iteration."""
    if k < 0:
        raise DomainError("orbit length must be nonnegative")
    x = as_vector(x0, f.dim)
    pts, res = [], []
    for _ in range(k + 1):
        fx = f.evaluate(x)
        pts.append(x)
        res.append(float(np.linalg.norm(fx - x)))
        x = 0.5 * (x + fx)
    P = np.array(pts)
    if boundary:
        bd = np.array([_boundary_distance(f.domain, p) for p in P])
    else:
        bd = np.full(P.shape[0], math.nan)
    return OrbitTrace(P, np.array(res), bd, "km")


@dataclass
class KMResult:
    """Outcome of the averaged iteration.  ``point`` is ``None`` when no
    point with residual at most ``tol`` was met within the budget."""

    point: np.ndarray | None
    residual: float
    iterations: int
    residuals: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))

    @property
    def found(self) -> bool:
        return self.point is not None


def km_fixed_point(f, x0, tol=KM_TOL, max_iter=KM_MAX_ITER, record=False) -> KMResult:
    """Krasnoselskii-Mann iteration ``x <- (x + f(x)) / 2``.

    Returns the first iterate ``x`` with ``||f(x) - x|| <= tol`` exactly as
    evaluated, and inside the domain of ``f``.  With ``record=True`` the
    residual history is kept (it is non-increasing for nonexpansive ``f``).
    """
    x = as_vector(x0, f.dim)
    hist = [] if record else None
    res = math.inf
    for it in range(max_iter + 1):
        fx = f.evaluate(x)
        res = float(np.linalg.norm(fx - x))
        if record:
            hist.append(res)
        if res <= tol and f.domain.contains(x):
            return KMResult(x, res, it, np.array(hist) if record else np.empty(0))
        if it == max_iter:
            break
        x = 0.5 * (x + fx)
    return KMResult(None, res, max_iter, np.array(hist) if record else np.empty(0))


@dataclass(frozen=True)
class ExclusionCertificate:
    """No fixed point of the map lies in the closed ball ``B(center, radius)``
    because ``||f(center) - center|| = residual > 2 radius``."""

    center: np.ndarray
    radius: float
    residual: float

    @property
    def margin(self) -> float:
        return self.residual - 2.0 * self.radius

    def chain(self, f, y, tol=KM_TOL) -> dict:
        """Check the triangle chain at a candidate point ``y`` whose residual
        is at most ``tol``:
        ``||x - y|| >= ||x - f(x)|| - ||f(x) - f(y)|| - ||f(y) - y||``.

        Returns the measured quantities; ``excluded`` says whether ``y`` is
        provably outside the ball.
        """
        x = self.center
        fx, fy = f.evaluate(x), f.evaluate(y)
        dist = float(np.linalg.norm(x - y))
        y_res = float(np.linalg.norm(fy - y))
        lower = self.residual - float(np.linalg.norm(fx - fy)) - y_res
        return {
            "distance": dist,
            "lower_bound": lower,
            "chain_holds": dist >= lower - 1e-12,
            "candidate_residual": y_res,
            "excluded": y_res <= tol and dist > self.radius,
        }

    def to_json(self):
        return {"center": self.center.tolist(), "radius": self.radius, "residual": self.residual,
                "margin": self.margin}


def exclusion_ball(f, x, r: float):
    """Certificate that ``f`` has no fixed point in ``B(x, r)``, or ``None``
    when ``||f(x) - x|| <= 2r`` (no information).

    Examples
    --------
    >>> from fixgen.bodies import FullSpace
    >>> from fixgen.maps import translation
    >>> cert = exclusion_ball(translation([5.0, 0.0], FullSpace(2)), [0.0, 0.0], 2.0)
    >>> cert.residual
    5.0
    """
    if not r > 0:
        raise DomainError("radius must be positive")
    x = as_vector(x, f.dim)
    res = float(np.linalg.norm(f.evaluate(x) - x))
    if res > 2.0 * r:
        return ExclusionCertificate(x, float(r), res)
    return None
