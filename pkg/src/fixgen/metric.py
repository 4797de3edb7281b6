"""The dense sequence Theta, the metric d_Theta and the basic neighborhoods
of the topology of pointwise convergence."""
from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .bodies import ConvexBody
from .errors import DomainError

DEFAULT_TERMS = 40
MAX_SHELL_POINTS = 5_000_000


def _shell(d: int, s: int) -> np.ndarray:
    """Integer vectors with sup-norm exactly ``s``, sorted by squared norm
    and then lexicographically."""
    if s == 0:
        return np.zeros((1, d), dtype=np.int64)
    count = (2 * s + 1) ** d
    if count > MAX_SHELL_POINTS:
        raise DomainError(f"lattice shell of {count} points in dimension {d}; request fewer Theta terms")
    axes = np.arange(-s, s + 1)
    Z = np.stack(np.meshgrid(*([axes] * d), indexing="ij"), axis=-1).reshape(-1, d)
    Z = Z[np.abs(Z).max(axis=1) == s]
    keys = [Z[:, i] for i in range(d - 1, -1, -1)] + [(Z * Z).sum(axis=1)]
    return Z[np.lexsort(keys)]


class ThetaSequence:
    """Deterministic dense sequence of a body: lattice points at dyadic
    scales, each mapped through the projection onto the body.

    Level ``m`` holds the points ``z / 2^m`` with ``||z||_inf <= m 2^m``
    (the box of half-width ``m``), listed shell by shell in ``||z||_inf``.
    Points of coarser levels reappear at finer ones; the repeats are kept.
    Terms are computed on demand and cached; the cache only grows.
    """

    def __init__(self, body: ConvexBody):
        self.body = body
        self.dim = body.dim
        self._terms = np.empty((0, self.dim))
        self._raw = np.empty((0, self.dim))
        self._level = 0
        self._shell = 0
        self._lock = threading.Lock()

    def _advance(self):
        # append the next shell (of the current level) to the cache
        m, s = self._level, self._shell
        Z = _shell(self.dim, s).astype(float) / (2.0 ** m)
        self._raw = np.vstack([self._raw, Z])
        self._terms = np.vstack([self._terms, self.body.project_many(Z)])
        if s >= m * 2 ** m:
            self._level += 1
            self._shell = 0
        else:
            self._shell += 1

    def terms(self, n: int) -> np.ndarray:
        """The first ``n`` terms (rows)."""
        with self._lock:
            while self._terms.shape[0] < n:
                self._advance()
            return self._terms[:n].copy()

    def lattice(self, n: int) -> np.ndarray:
        """The lattice points behind the first ``n`` terms."""
        self.terms(n)
        return self._raw[:n].copy()

    def __getitem__(self, j: int) -> np.ndarray:
        """``theta_j`` with one-based ``j``."""
        if j < 1:
            raise IndexError("Theta is indexed from 1")
        return self.terms(j)[j - 1]


@dataclass(frozen=True)
class MetricValue:
    """Partial sum over the first ``n`` terms; the true distance lies in
    ``[value, value + tail]``."""

    value: float
    n: int
    tail: float

    @property
    def upper(self) -> float:
        return self.value + self.tail

    def to_json(self):
        return {"value": self.value, "n": self.n, "tail_bound": self.tail}


def pointwise_terms(f, g, theta: ThetaSequence, n: int) -> np.ndarray:
    """``rho_j / (1 + rho_j)`` with ``rho_j = ||f(theta_j) - g(theta_j)||``."""
    T = theta.terms(n)
    FX = np.array([f.evaluate(t) for t in T])
    GX = np.array([g.evaluate(t) for t in T])
    rho = np.linalg.norm(FX - GX, axis=1)
    return rho / (1.0 + rho)


def d_theta(f, g, theta: ThetaSequence, n: int = DEFAULT_TERMS) -> MetricValue:
    """``sum_{j <= n} 2^-j rho_j / (1 + rho_j)`` with tail bound ``2^-n``."""
    if n < 0:
        raise DomainError("number of terms must be nonnegative")
    if n == 0:
        return MetricValue(0.0, 0, 1.0)
    w = 0.5 ** np.arange(1, n + 1)
    return MetricValue(float(w @ pointwise_terms(f, g, theta, n)), n, 0.5 ** n)


def in_U(g, f, x, eps: float) -> bool:
    """``||g(x) - f(x)|| < eps``."""
    return bool(np.linalg.norm(g.evaluate(x) - f.evaluate(x)) < eps)


def in_V(g, f, x, eps: float, k: int) -> bool:
    """``||g^k(x) - f^k(x)|| < eps`` for ``k >= 1``."""
    if k < 1:
        raise DomainError("k must be at least 1")
    return bool(np.linalg.norm(g.iterate(x, k) - f.iterate(x, k)) < eps)


def orbit_gap(g, f, x, k: int) -> float:
    """``||g^k(x) - f^k(x)||``, the quantity tested by ``in_V``."""
    return float(np.linalg.norm(g.iterate(x, k) - f.iterate(x, k)))
