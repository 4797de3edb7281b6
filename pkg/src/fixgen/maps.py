"""Nonexpansive maps as composition trees.

Leaves are identities, constants, affine maps with operator norm at most 1,
nearest-point projections, and sampled maps extended by the Kirszbraun
min-max rule.  ``Composition`` applies its nodes right to left, so
``compose(f, g)(x) == f(g(x))``.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from . import kernels
from .bodies import Ball, ConvexBody, FullSpace, Hull, body_from_json, uniform_ball
from .errors import CertificateError, CompositionError, ConstructionError, InfeasibleExtensionError
from .geometry import as_vector

FEASIBILITY_TOL = 1e-8
DUPLICATE_TOL = 1e-10
LIPSCHITZ_TOL = 1e-7
GAP_TOL = 1e-9


class NonexpansiveMap:
    """Base node.  ``domain`` is the set the map is defined on; ``codomain``
    is a body known to contain every value (``None`` when unknown)."""

    domain: ConvexBody
    codomain: ConvexBody | None = None

    @property
    def dim(self) -> int:
        return self.domain.dim

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x) -> np.ndarray:
        raise NotImplementedError

    def evaluate_many(self, X) -> np.ndarray:
        return np.array([self.evaluate(x) for x in np.asarray(X, dtype=float)])

    def iterate(self, x, k: int) -> np.ndarray:
        """``f^k(x)``."""
        y = np.asarray(x, dtype=float)
        for _ in range(k):
            y = self.evaluate(y)
        return y

    def to_json(self) -> dict:
        raise NotImplementedError


class Identity(NonexpansiveMap):
    def __init__(self, domain: ConvexBody):
        self.domain = domain
        self.codomain = domain

    def evaluate(self, x):
        return np.array(x, dtype=float)

    def evaluate_many(self, X):
        return np.array(X, dtype=float)

    def to_json(self):
        return {"kind": "identity", "domain": self.domain.to_json()}


class Constant(NonexpansiveMap):
    def __init__(self, value, domain: ConvexBody):
        self.value = as_vector(value, domain.dim)
        self.domain = domain
        self.codomain = Hull(self.value[None, :])

    def evaluate(self, x):
        return self.value.copy()

    def evaluate_many(self, X):
        return np.tile(self.value, (len(X), 1))

    def to_json(self):
        return {"kind": "constant", "value": self.value.tolist(), "domain": self.domain.to_json()}


class Affine(NonexpansiveMap):
    """``x -> A x + b`` with spectral norm of ``A`` at most 1."""

    def __init__(self, matrix, offset, domain: ConvexBody):
        A = np.asarray(matrix, dtype=float)
        d = domain.dim
        if A.shape != (d, d):
            raise CompositionError(f"matrix shape {A.shape} does not match dimension {d}")
        norm = float(np.linalg.norm(A, 2))
        if norm > 1.0 + 1e-12:
            raise CertificateError(f"affine part has operator norm {norm:.12g} > 1")
        self.matrix = A
        self.offset = as_vector(offset, d)
        self.domain = domain
        self.codomain = None

    def evaluate(self, x):
        return self.matrix @ np.asarray(x, dtype=float) + self.offset

    def evaluate_many(self, X):
        return np.asarray(X, dtype=float) @ self.matrix.T + self.offset

    def to_json(self):
        return {"kind": "affine", "matrix": self.matrix.tolist(), "offset": self.offset.tolist(),
                "domain": self.domain.to_json()}


def translation(shift, domain: ConvexBody) -> Affine:
    """``x -> x + shift``."""
    return Affine(np.eye(domain.dim), shift, domain)


class Projection(NonexpansiveMap):
    """Nearest-point map onto a convex body, defined on the whole space."""

    def __init__(self, body: ConvexBody):
        if not body.is_convex:
            raise CertificateError(f"nearest-point map onto a non-convex {body.kind} is not nonexpansive")
        self.body = body
        self.domain = FullSpace(body.dim)
        self.codomain = body

    def evaluate(self, x):
        return self.body.project(x)

    def evaluate_many(self, X):
        return self.body.project_many(X)

    def to_json(self):
        return {"kind": "projection", "body": self.body.to_json()}


def _within(inner: ConvexBody | None, outer: ConvexBody, rng=None) -> bool:
    """Whether ``inner`` is contained in ``outer``: exact for the whole
    space, identical bodies and hulls, sampled otherwise."""
    if isinstance(outer, FullSpace):
        return True
    if inner is None:
        return False
    if inner is outer or inner.to_json() == outer.to_json():
        return True
    if isinstance(inner, Hull):
        return bool(outer.contains_many(inner.vertices, tol=1e-9).all())
    rng = np.random.default_rng(0) if rng is None else rng
    R = 10.0 + float(np.linalg.norm(inner.interior_point()))
    return bool(outer.contains_many(inner.sample(rng, 256, R), tol=1e-9).all())


class Composition(NonexpansiveMap):
    """``nodes[0] o nodes[1] o ... o nodes[-1]``."""

    def __init__(self, nodes, check=True):
        nodes = list(nodes)
        if not nodes:
            raise CompositionError("empty composition")
        d = nodes[0].dim
        for nd in nodes:
            if nd.dim != d:
                raise CompositionError(f"dimension mismatch ({nd.dim} vs {d})")
        if check:
            for outer, inner in zip(nodes[:-1], nodes[1:]):
                if not _within(inner.codomain, outer.domain):
                    raise CompositionError(
                        f"values of {type(inner).__name__} are not known to lie in the domain of {type(outer).__name__}"
                    )
        self.nodes = nodes
        self.domain = nodes[-1].domain
        self.codomain = nodes[0].codomain

    def evaluate(self, x):
        y = np.asarray(x, dtype=float)
        for nd in reversed(self.nodes):
            y = nd.evaluate(y)
        return y

    def evaluate_many(self, X):
        Y = np.asarray(X, dtype=float)
        for nd in reversed(self.nodes):
            Y = nd.evaluate_many(Y)
        return Y

    def to_json(self):
        return {"kind": "compose", "nodes": [nd.to_json() for nd in self.nodes]}


def compose(*nodes, check=True) -> NonexpansiveMap:
    """Composition in mathematical order: ``compose(f, g)(x) = f(g(x))``.
    A single node is returned unchanged."""
    if len(nodes) == 1:
        return nodes[0]
    return Composition(nodes, check=check)


class Power(NonexpansiveMap):
    """``f^k`` as a single node."""

    def __init__(self, f: NonexpansiveMap, k: int):
        if k < 0:
            raise CompositionError("negative power")
        self.f = f
        self.k = int(k)
        self.domain = f.domain
        self.codomain = f.codomain if k > 0 else f.domain

    def evaluate(self, x):
        return self.f.iterate(x, self.k)

    def to_json(self):
        return {"kind": "power", "map": self.f.to_json(), "k": self.k}


class SampledMap(NonexpansiveMap):
    """Kirszbraun extension of 1-Lipschitz sample data.

    A query ``q`` is answered by a minimizer of
    ``max_i ||y - y_i|| - ||q - x_i||`` (a point of the ball intersection),
    and the pair ``(q, y)`` is appended to the anchor log so every later
    value is constrained by it.  The log order is part of the map.

    Appends are serialized by a lock; concurrent callers must agree on an
    order externally for results to be reproducible.
    """

    def __init__(self, xs, ys, domain: ConvexBody | None = None, validate=True):
        X = np.atleast_2d(np.asarray(xs, dtype=float))
        Y = np.atleast_2d(np.asarray(ys, dtype=float))
        if X.shape != Y.shape or X.shape[0] == 0:
            raise CompositionError("anchors need matching, nonempty point and value arrays")
        self.domain = domain if domain is not None else FullSpace(X.shape[1])
        self.codomain = None
        cap = max(16, 2 * X.shape[0])
        self._X = np.empty((cap, X.shape[1]))
        self._Y = np.empty((cap, X.shape[1]))
        self._X[: X.shape[0]] = X
        self._Y[: X.shape[0]] = Y
        self._n = X.shape[0]
        self._lock = threading.Lock()
        self.queries = 0
        if validate:
            ratio, i, j = kernels.pairwise_ratio_max(X, Y, 0.0)
            sep = float(np.linalg.norm(X[i] - X[j])) if i >= 0 else 0.0
            if i >= 0 and np.linalg.norm(Y[i] - Y[j]) > sep + 1e-9:
                raise CertificateError(f"anchor data is not 1-Lipschitz (pair {i},{j}: ratio {ratio:.12g})")

    @property
    def anchors_x(self):
        return self._X[: self._n]

    @property
    def anchors_y(self):
        return self._Y[: self._n]

    def __len__(self):
        return self._n

    def _append(self, x, y):
        if self._n == self._X.shape[0]:
            self._X = np.vstack([self._X, np.empty_like(self._X)])
            self._Y = np.vstack([self._Y, np.empty_like(self._Y)])
        self._X[self._n] = x
        self._Y[self._n] = y
        self._n += 1

    def evaluate(self, x):
        return self.extend(x)[0]

    def extend(self, query):
        """Value at ``query`` and the min-max objective reached there."""
        q = np.ascontiguousarray(as_vector(query, self.dim))
        with self._lock:
            self.queries += 1
            X, Y = self.anchors_x, self.anchors_y
            diff = X - q
            rad = np.sqrt((diff * diff).sum(axis=1))
            j = int(np.argmin(rad))
            if rad[j] <= DUPLICATE_TOL:
                return Y[j].copy(), -float(rad[j])
            y, value, _ = kernels.minmax_ball_center(np.ascontiguousarray(Y), rad, Y[j].copy(), GAP_TOL)
            if not value <= FEASIBILITY_TOL:
                raise InfeasibleExtensionError("ball intersection is empty", float(value))
            self._append(q, y)
            return y.copy(), float(value)

    def to_json(self):
        return {"kind": "sampled", "xs": self.anchors_x.tolist(), "ys": self.anchors_y.tolist(),
                "domain": self.domain.to_json()}


def kirszbraun_extend(f: SampledMap, query):
    """Value of the sampled map at ``query`` (appended to its anchors)."""
    return f.extend(query)[0]


class OrthogonalShift(NonexpansiveMap):
    """``x -> pi_C(g(x) + <x, y0> y0 + c y0)``.

    Nonexpansive when the values of ``g`` are orthogonal to ``y0`` and ``g``
    depends only on the component of ``x`` orthogonal to ``y0``; the value
    orthogonality is checked on every evaluation.
    """

    def __init__(self, g: NonexpansiveMap, y0, c: float, body: ConvexBody, orth_tol=1e-9):
        y0 = as_vector(y0, g.dim)
        if abs(np.linalg.norm(y0) - 1.0) > 1e-12:
            raise ConstructionError("shift direction must be a unit vector")
        self.g = g
        self.y0 = y0
        self.c = float(c)
        self.body = body
        self.orth_tol = orth_tol
        self.domain = body
        self.codomain = body

    def inner(self, x):
        """The argument of the final projection."""
        x = np.asarray(x, dtype=float)
        gx = self.g.evaluate(x)
        off = float(gx @ self.y0)
        if abs(off) > self.orth_tol * max(1.0, float(np.linalg.norm(gx))):
            raise ConstructionError(f"g(x) has component {off:.3e} along the shift direction")
        return gx + (float(x @ self.y0) + self.c) * self.y0

    def evaluate(self, x):
        return self.body.project(self.inner(x))

    def to_json(self):
        return {"kind": "orthogonal_shift", "g": self.g.to_json(), "y0": self.y0.tolist(), "c": self.c,
                "body": self.body.to_json()}


def orthogonal_shift_map(g, y0, c, body) -> OrthogonalShift:
    return OrthogonalShift(g, y0, c, body)


# ---------------------------------------------------------------------------
# certification


@dataclass
class LipschitzReport:
    ratio: float
    passed: bool
    pair: tuple | None

    def to_json(self):
        return {"ratio": self.ratio, "pass": self.passed,
                "pair": None if self.pair is None else [np.asarray(p).tolist() for p in self.pair]}


def certify_lipschitz(f: NonexpansiveMap, pair_count=1000, rng_seed=0, radius=None, points=None,
                      tol=LIPSCHITZ_TOL) -> LipschitzReport:
    """Largest ``||f(x) - f(y)|| / ||x - y||`` over sampled pairs.

    Pairs come from uniform samples of the domain within ``radius`` (half
    independent, half nearby perturbations projected back into the domain),
    or from ``points`` if given.  Pairs closer than 1e-8 are skipped.
    """
    rng = np.random.default_rng(rng_seed)
    dom = f.domain
    if points is None:
        R = radius if radius is not None else 4.0 + float(np.linalg.norm(dom.interior_point()))
        n = max(2, pair_count)
        P = dom.sample(rng, n, R)
        near = dom.project_many(P[: n // 2] + 0.05 * R * uniform_ball(rng, n // 2, dom.dim, 1.0))
        A = np.vstack([P[: n // 2], P[: n // 2]])
        B = np.vstack([np.roll(P, 1, axis=0)[: n // 2], near])
    else:
        pts = np.asarray(points, dtype=float)
        i = rng.integers(0, len(pts), pair_count)
        j = rng.integers(0, len(pts), pair_count)
        A, B = pts[i], pts[j]
    FA = np.array([f.evaluate(a) for a in A])
    FB = np.array([f.evaluate(b) for b in B])
    dx = np.linalg.norm(A - B, axis=1)
    dy = np.linalg.norm(FA - FB, axis=1)
    ok = dx >= 1e-8
    if not ok.any():
        return LipschitzReport(0.0, True, None)
    ratios = np.where(ok, dy / np.where(ok, dx, 1.0), 0.0)
    k = int(np.argmax(ratios))
    return LipschitzReport(float(ratios[k]), bool(ratios[k] <= 1.0 + tol), (A[k], B[k]))


# ---------------------------------------------------------------------------
# random maps for property tests


def random_orthogonal(rng, d):
    Q, R = np.linalg.qr(rng.standard_normal((d, d)))
    return Q * np.sign(np.diag(R))


def random_composed_map(rng: np.random.Generator, body: ConvexBody, depth=3, scale=1.0) -> NonexpansiveMap:
    """A random self-map of ``body``: a chain of rotations, contractions,
    translations and ball projections, finished by the projection onto
    ``body``."""
    d = body.dim
    nodes = [Projection(body)]
    space = FullSpace(d)
    for _ in range(depth):
        kind = rng.integers(0, 4)
        if kind == 0:
            nodes.append(Affine(random_orthogonal(rng, d), scale * rng.standard_normal(d), space))
        elif kind == 1:
            nodes.append(Affine(rng.uniform(0.3, 1.0) * random_orthogonal(rng, d), np.zeros(d), space))
        elif kind == 2:
            nodes.append(translation(scale * rng.standard_normal(d), space))
        else:
            nodes.append(Projection(Ball(scale * rng.standard_normal(d), scale * rng.uniform(0.5, 3.0))))
    nodes.append(Identity(body))
    return compose(*nodes, check=False)


# ---------------------------------------------------------------------------
# JSON


MAP_KINDS = ("identity", "constant", "affine", "translation", "projection", "compose", "sampled",
             "orthogonal_shift", "power")


def map_from_json(spec: dict, domain: ConvexBody | None = None) -> NonexpansiveMap:
    """Rebuild a map from its JSON tree.  ``domain`` fills in a missing
    ``"domain"`` entry."""
    kind = spec.get("kind")

    def dom():
        if "domain" in spec:
            return body_from_json(spec["domain"])
        if domain is None:
            raise CompositionError(f"{kind} node needs a domain")
        return domain

    if kind == "identity":
        return Identity(dom())
    if kind == "constant":
        return Constant(spec["value"], dom())
    if kind == "affine":
        return Affine(spec["matrix"], spec["offset"], dom())
    if kind == "translation":
        return translation(spec["shift"], dom())
    if kind == "projection":
        return Projection(body_from_json(spec["body"]))
    if kind == "compose":
        return compose(*[map_from_json(s, domain) for s in spec["nodes"]], check=False)
    if kind == "sampled":
        return SampledMap(spec["xs"], spec["ys"], dom())
    if kind == "orthogonal_shift":
        return OrthogonalShift(map_from_json(spec["g"], domain), spec["y0"], spec["c"], body_from_json(spec["body"]))
    if kind == "power":
        return Power(map_from_json(spec["map"], domain), spec["k"])
    raise CompositionError(f"unknown map kind {kind!r}")


def is_self_map(f: NonexpansiveMap, rng=None, n=256, radius=None, tol=1e-9) -> bool:
    """Sampled check that ``f`` maps its domain into itself."""
    rng = np.random.default_rng(0) if rng is None else rng
    dom = f.domain
    R = radius if radius is not None else 4.0 + float(np.linalg.norm(dom.interior_point()))
    X = dom.sample(rng, n, R)
    return bool(dom.contains_many(f.evaluate_many(X), tol=tol).all())


__all__ = [
    "NonexpansiveMap", "Identity", "Constant", "Affine", "translation", "Projection", "Composition",
    "compose", "Power", "SampledMap", "kirszbraun_extend", "OrthogonalShift", "orthogonal_shift_map",
    "LipschitzReport", "certify_lipschitz", "random_orthogonal", "random_composed_map", "map_from_json",
    "is_self_map", "MAP_KINDS",
]
