import numpy as np
import pytest

from spacelike.linalg import (
    CMatrix,
    DimensionError,
    dagger,
    is_hermitian,
    is_unitary,
    kron,
    matmul,
    max_abs_diff,
    partial_trace,
    trace,
)


def rand_matrix(rng, rows, cols):
    return CMatrix(rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols)))


def test_construction_copies_and_freezes():
    data = np.zeros((2, 2), dtype=complex)
    m = CMatrix(data)
    data[0, 0] = 5.0
    assert m.array[0, 0] == 0.0
    with pytest.raises(ValueError):
        m.array[0, 0] = 1.0


@pytest.mark.parametrize(
    "bad",
    [np.zeros(3), np.zeros((2, 2, 2)), np.zeros((0, 2)), np.array([[np.nan, 0], [0, 0]]), np.array([[np.inf, 0], [0, 0]])],
)
def test_construction_rejects_bad_shapes_and_values(bad):
    with pytest.raises(ValueError):
        CMatrix(bad)


def test_identity_zeros_diag():
    assert np.array_equal(CMatrix.identity(3).array, np.eye(3))
    assert np.array_equal(CMatrix.zeros(2, 4).array, np.zeros((2, 4)))
    d = CMatrix.diag([1.0, 2j])
    assert d.array[0, 0] == 1.0 and d.array[1, 1] == 2j and d.array[0, 1] == 0.0


def test_matmul_shapes_and_values():
    rng = np.random.default_rng(1)
    a = rand_matrix(rng, 2, 3)
    b = rand_matrix(rng, 3, 4)
    c = matmul(a, b)
    assert c.shape == (2, 4)
    np.testing.assert_allclose(c.array, a.array @ b.array)
    # operator form matches the function
    np.testing.assert_array_equal((a @ b).array, c.array)


def test_matmul_inner_dimension_error_names_both_shapes():
    a = CMatrix.zeros(2, 3)
    b = CMatrix.zeros(4, 2)
    with pytest.raises(DimensionError, match=r"2x3.*4x2"):
        matmul(a, b)


def test_dagger_is_conjugate_transpose():
    rng = np.random.default_rng(2)
    a = rand_matrix(rng, 3, 2)
    np.testing.assert_array_equal(dagger(a).array, a.array.conj().T)


def test_kron_matches_numpy_and_shapes():
    rng = np.random.default_rng(3)
    a = rand_matrix(rng, 2, 3)
    b = rand_matrix(rng, 4, 5)
    k = kron(a, b)
    assert k.shape == (8, 15)
    np.testing.assert_allclose(k.array, np.kron(a.array, b.array))


def test_trace_requires_square():
    assert trace(CMatrix.identity(4)) == pytest.approx(4.0)
    with pytest.raises(DimensionError):
        trace(CMatrix.zeros(2, 3))


def test_partial_trace_of_product_state():
    """Tracing out one factor of A (x) B returns the other times the trace."""
    rng = np.random.default_rng(4)
    a = rand_matrix(rng, 2, 2)
    b = rand_matrix(rng, 3, 3)
    ab = kron(a, b)
    kept_a = partial_trace(ab, (2, 3), keep=(0,))
    np.testing.assert_allclose(kept_a.array, a.array * np.trace(b.array), atol=1e-12)
    kept_b = partial_trace(ab, (2, 3), keep=(1,))
    np.testing.assert_allclose(kept_b.array, b.array * np.trace(a.array), atol=1e-12)


def test_partial_trace_three_factors_keep_outer():
    rng = np.random.default_rng(5)
    parts = [rand_matrix(rng, d, d) for d in (2, 3, 2)]
    full = kron(kron(parts[0], parts[1]), parts[2])
    kept = partial_trace(full, (2, 3, 2), keep=(0, 2))
    expected = np.kron(parts[0].array, parts[2].array) * np.trace(parts[1].array)
    np.testing.assert_allclose(kept.array, expected, atol=1e-12)


def test_partial_trace_keep_everything_preserves_matrix():
    rng = np.random.default_rng(6)
    a = rand_matrix(rng, 6, 6)
    same = partial_trace(a, (2, 3), keep=(0, 1))
    np.testing.assert_array_equal(same.array, a.array)
    # duplicate keep indices collapse to one mention
    same2 = partial_trace(a, (2, 3), keep=(0, 0, 1))
    np.testing.assert_array_equal(same2.array, a.array)


def test_partial_trace_validates_dims_and_keep():
    a = CMatrix.identity(6)
    with pytest.raises(DimensionError):
        partial_trace(a, (2, 2), keep=(0,))
    with pytest.raises(ValueError):
        partial_trace(a, (2, 3), keep=(2,))
    with pytest.raises(ValueError):
        partial_trace(a, (2, 3), keep=())


def test_max_abs_diff():
    a = CMatrix.identity(2)
    b = CMatrix(np.array([[1.0, 0.0], [0.0, 1.0 + 3e-4j]]))
    assert max_abs_diff(a, b) == pytest.approx(3e-4)
    with pytest.raises(DimensionError):
        max_abs_diff(a, CMatrix.zeros(3, 3))


def test_hermitian_and_unitary_predicates():
    h = CMatrix(np.array([[1.0, 2.0 - 1j], [2.0 + 1j, -3.0]]))
    assert is_hermitian(h, 1e-12)
    assert not is_hermitian(CMatrix(np.array([[0.0, 1.0], [0.0, 0.0]])), 1e-12)
    theta = 0.3
    u = CMatrix(
        np.array(
            [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]],
            dtype=complex,
        )
    )
    assert is_unitary(u, 1e-12)
    assert not is_unitary(CMatrix.diag([1.0, 0.5]), 1e-9)
    # rectangular matrices are never unitary
    assert not is_unitary(CMatrix.zeros(2, 3), 1e-9)
