import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from fixgen.errors import CertificateError, DimensionError
from fixgen.geometry import Subspace, as_vector, orthonormalize, project_complement, project_subspace, span, unit

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_coordinate_projection():
    F = span(unit(0, 3))
    assert np.array_equal(project_subspace([1.0, 2.0, 3.0], F), [1.0, 0.0, 0.0])
    assert np.array_equal(project_complement([1.0, 2.0, 3.0], F), [0.0, 2.0, 3.0])


def test_points_of_subspace_are_fixed():
    F = span(np.array([1.0, 1.0, 0.0]))
    x = 3.0 * F.basis[0]
    assert np.allclose(project_subspace(x, F), x, atol=1e-15)
    assert np.allclose(project_complement(x, F), 0.0, atol=1e-15)


def test_projection_matches_least_squares(rng):
    F = Subspace(np.array([[1.0, 1.0, 0.0]]) / np.sqrt(2))
    A = np.array([[1.0], [1.0], [0.0]])
    for _ in range(100):
        x = rng.standard_normal(3)
        coef, *_ = np.linalg.lstsq(A, x, rcond=None)
        assert np.abs(project_subspace(x, F) - A @ coef).max() <= 1e-12


def test_pythagoras(rng):
    F = orthonormalize(list(rng.standard_normal((3, 7))))
    for x in rng.standard_normal((200, 7)):
        a, b = project_subspace(x, F), project_complement(x, F)
        assert abs(a @ a + b @ b - x @ x) <= 1e-12 * max(1.0, x @ x)


def test_orthonormalize_drops_dependent_vectors():
    F = orthonormalize([unit(0, 3), 2.0 * unit(0, 3)])
    assert F.dim == 1
    assert np.allclose(np.abs(F.basis[0]), unit(0, 3))
    G = orthonormalize([unit(0, 3), unit(1, 3)])
    assert np.array_equal(G.basis, np.eye(3)[:2])


def test_orthonormalize_random_gram(rng):
    F = orthonormalize(list(rng.standard_normal((3, 5))))
    assert F.dim == 3
    assert np.abs(F.basis @ F.basis.T - np.eye(3)).max() <= 1e-10


def test_empty_input_is_zero_subspace():
    F = orthonormalize([], dim=4)
    assert F.dim == 0
    assert np.array_equal(project_subspace(np.ones(4), F), np.zeros(4))


def test_non_orthonormal_basis_rejected():
    with pytest.raises(CertificateError):
        Subspace(np.array([[1.0, 0.0], [1.0, 1.0]]))


def test_complement_is_orthonormal_and_orthogonal(rng):
    F = orthonormalize(list(rng.standard_normal((2, 6))))
    G = F.complement()
    assert G.dim == 4
    assert np.abs(G.basis @ F.basis.T).max() <= 1e-12
    assert np.abs(G.basis @ G.basis.T - np.eye(4)).max() <= 1e-12


def test_from_json_axes():
    F = Subspace.from_json({"axes": [0, 2], "dim": 4})
    assert np.array_equal(F.basis, np.eye(4)[[0, 2]])
    assert np.array_equal(Subspace.from_json(F.to_json()).basis, F.basis)


def test_as_vector_rejects_bad_input():
    with pytest.raises(DimensionError):
        as_vector([1.0, np.nan])
    with pytest.raises(DimensionError):
        as_vector([1.0, 2.0], dim=3)


@settings(max_examples=60, deadline=None)
@given(arrays(float, (4, 5), elements=finite), arrays(float, 5, elements=finite))
def test_projection_properties(vectors, x):
    F = orthonormalize(list(vectors))
    p = project_subspace(x, F)
    scale = max(1.0, float(np.abs(x).max()))
    assert np.abs(project_subspace(p, F) - p).max() <= 1e-12 * scale
    assert np.linalg.norm(p) <= np.linalg.norm(x) * (1 + 1e-12) + 1e-12
    if F.dim:
        assert np.abs(F.basis @ (x - p)).max() <= 1e-12 * scale * 10
    # every input vector is reconstructed from the basis
    for v in vectors:
        assert np.linalg.norm(project_complement(v, F)) <= 1e-9 * max(1.0, np.linalg.norm(v))
