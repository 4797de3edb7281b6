"""Vectors, subspaces and orthogonal projections in a finite truncation of
Hilbert space.

Vectors are plain 1-D float64 arrays.  The ambient dimension is carried by
the arrays themselves; ``DEFAULT_DIM`` is used where a caller does not say.
"""
from __future__ import annotations

import numpy as np

from .errors import CertificateError, DimensionError

DEFAULT_DIM = 8
ORTHO_TOL = 1e-12
DEFLATION_TOL = 1e-10


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Return ``x`` as a finite 1-D float64 array, checking the length."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionError(f"expected length {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise DimensionError("vector has non-finite coordinates")
    return v


def unit(i: int, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Standard basis vector e_{i+1} (zero-based index ``i``)."""
    e = np.zeros(dim)
    e[i] = 1.0
    return e


class Subspace:
    """Span of an orthonormal family.

    Parameters
    ----------
    basis : array_like, shape (k, d)
        Rows are the basis vectors.  ``k`` may be zero.
    dim : int, optional
        Ambient dimension; required when ``basis`` is empty.

    Raises
    ------
    CertificateError
        If the Gram matrix differs from the identity by more than 1e-12.
    """

    __slots__ = ("basis", "ambient")

    def __init__(self, basis, dim: int | None = None):
        B = np.asarray(basis, dtype=float)
        if B.size == 0:
            if dim is None:
                raise DimensionError("empty subspace needs an ambient dimension")
            B = np.zeros((0, dim))
        if B.ndim == 1:
            B = B[None, :]
        if dim is not None and B.shape[1] != dim:
            raise DimensionError(f"basis vectors have length {B.shape[1]}, expected {dim}")
        if B.shape[0] > B.shape[1]:
            raise CertificateError("more basis vectors than the ambient dimension")
        gram = B @ B.T
        dev = np.abs(gram - np.eye(B.shape[0])).max() if B.shape[0] else 0.0
        if dev > ORTHO_TOL:
            raise CertificateError(f"basis is not orthonormal (Gram deviation {dev:.3e})")
        B.setflags(write=False)
        self.basis = B
        self.ambient = B.shape[1]

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def project(self, x):
        """Orthogonal projection onto the subspace (rows of ``x`` if 2-D)."""
        return project_subspace(x, self)

    def complement_project(self, x):
        return project_complement(x, self)

    def complement(self) -> "Subspace":
        """Orthonormal basis of the orthogonal complement."""
        d = self.ambient
        if self.dim == 0:
            return Subspace(np.eye(d))
        # the trailing right singular vectors span the complement
        _, _, vt = np.linalg.svd(self.basis, full_matrices=True)
        comp = vt[self.dim:]
        # one MGS pass to hit the 1e-12 Gram tolerance
        return orthonormalize(list(comp), dim=d)

    def to_json(self):
        return self.basis.tolist()

    @classmethod
    def from_json(cls, data, dim: int | None = None) -> "Subspace":
        """Basis rows, or ``{"axes": [i, ...], "dim": d}`` for coordinate
        subspaces (zero-based axes)."""
        if isinstance(data, dict):
            d = data.get("dim", dim)
            if d is None:
                raise DimensionError("coordinate subspace needs an ambient dimension")
            return Subspace(np.eye(d)[list(data["axes"])], dim=d)
        return Subspace(np.asarray(data, dtype=float), dim=dim)

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient})"


def span(*vectors, dim: int | None = None) -> Subspace:
    """Shorthand for ``orthonormalize(vectors)``."""
    return orthonormalize(list(vectors), dim=dim)


def project_subspace(x, F: Subspace):
    """Return ``sum_i <x, b_i> b_i``.  Works row-wise on 2-D input."""
    x = np.asarray(x, dtype=float)
    return (x @ F.basis.T) @ F.basis


def project_complement(x, F: Subspace):
    """Return ``x - project_subspace(x, F)``."""
    x = np.asarray(x, dtype=float)
    return x - project_subspace(x, F)


def orthonormalize(vectors, dim: int | None = None) -> Subspace:
    """Orthonormal basis of the span of ``vectors``.

    Modified Gram-Schmidt with a second orthogonalization pass; a vector whose
    residual norm falls below 1e-10 (relative to its own norm when that is
    larger than one) is treated as dependent and dropped.

    Examples
    --------
    >>> orthonormalize([np.array([1.0, 0.0]), np.array([2.0, 0.0])]).dim
    1
    """
    vecs = [np.asarray(v, dtype=float) for v in vectors]
    if not vecs:
        if dim is None:
            raise DimensionError("empty input needs an ambient dimension")
        return Subspace([], dim=dim)
    d = vecs[0].shape[0] if dim is None else dim
    basis = []
    for v in vecs:
        if v.shape != (d,):
            raise DimensionError(f"vector of shape {v.shape} in ambient dimension {d}")
        w = v.copy()
        for _ in range(2):
            for b in basis:
                w -= (b @ w) * b
        nw = np.linalg.norm(w)
        if nw < DEFLATION_TOL * max(1.0, np.linalg.norm(v)):
            continue
        basis.append(w / nw)
    if not basis:
        return Subspace([], dim=d)
    return Subspace(np.array(basis))


def sphere_directions(F: Subspace, rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` uniformly random unit vectors of ``F``, as rows."""
    if F.dim == 0:
        raise DimensionError("no unit vectors in the zero subspace")
    g = rng.standard_normal((n, F.dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g @ F.basis
