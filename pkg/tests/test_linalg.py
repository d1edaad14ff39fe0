import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from stiefel_fourier.errors import DimensionError, DomainError, RankError
from stiefel_fourier.linalg import (
    SingularSpectrum,
    complete_orthonormal,
    frobenius_pairing,
    qr_positive,
    rect_diag,
    svd,
    sym2_eigvals,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def rect_matrices(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    k = draw(st.integers(1, n))
    return draw(arrays(float, (n, k), elements=finite))


def test_pairing_at_special_point_sums_spectrum():
    lam = np.array([3.0, 2.0, 0.5])
    Y = rect_diag(np.ones(3), 5)
    assert frobenius_pairing(Y, rect_diag(lam, 5)) == pytest.approx(lam.sum(), abs=1e-15)


def test_pairing_zero_frequency(rng):
    X = rng.standard_normal((4, 2))
    assert frobenius_pairing(X, np.zeros((4, 2))) == 0.0


def test_pairing_matches_double_loop(rng):
    X, Xi = rng.standard_normal((3, 2)), rng.standard_normal((3, 2))
    total = 0.0
    for i in range(3):
        for j in range(2):
            total += X[i, j] * Xi[i, j]
    assert frobenius_pairing(X, Xi) == pytest.approx(total, abs=1e-14)


def test_pairing_shape_mismatch():
    with pytest.raises(DimensionError):
        frobenius_pairing(np.zeros((3, 2)), np.zeros((2, 3)))


def test_pairing_bilinear(rng):
    for _ in range(20):
        X, X2, Xi = (rng.standard_normal((5, 3)) for _ in range(3))
        a, b = rng.standard_normal(2)
        lhs = frobenius_pairing(a * X + b * X2, Xi)
        rhs = a * frobenius_pairing(X, Xi) + b * frobenius_pairing(X2, Xi)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_svd_of_rect_diagonal_is_trivial():
    res = svd(rect_diag([3.0, 1.0], 3))
    assert res.spectrum.values == (3.0, 1.0)
    assert np.allclose(np.abs(res.right), np.eye(2), atol=1e-14)
    assert np.allclose(np.abs(res.left[:, :2]), np.eye(3)[:, :2], atol=1e-14)


def test_svd_zero_matrix():
    res = svd(np.zeros((4, 3)))
    assert res.spectrum.values == (0.0, 0.0, 0.0)
    assert np.allclose(res.left.T @ res.left, np.eye(4), atol=1e-14)


def test_svd_matches_two_by_two_characteristic_polynomial(rng):
    Xi = rng.standard_normal((4, 2))
    G = Xi.T @ Xi
    tr, det = np.trace(G), np.linalg.det(G)
    disc = np.sqrt(tr * tr / 4 - det)
    oracle = np.sqrt([tr / 2 + disc, tr / 2 - disc])
    assert np.allclose(svd(Xi).spectrum.array, oracle, rtol=1e-12)


def test_svd_rejects_non_finite():
    with pytest.raises(DomainError):
        svd(np.array([[1.0, np.nan], [0.0, 1.0]]))


def test_svd_sign_convention_and_determinism(rng):
    Xi = rng.standard_normal((5, 3))
    a, b = svd(Xi), svd(Xi.copy())
    assert np.array_equal(a.left, b.left) and np.array_equal(a.right, b.right)
    for row in a.right:
        first = row[np.flatnonzero(np.abs(row) > 1e-14)[0]]
        assert first > 0


def test_svd_ties_keep_column_order():
    res = svd(np.eye(3)[:, :2] * 2.0)
    assert res.spectrum.values == (2.0, 2.0)
    assert np.allclose(res.right, np.eye(2))


@given(rect_matrices())
def test_svd_reconstruction_and_orthogonality(Xi):
    res = svd(Xi)
    scale = max(1.0, np.linalg.norm(Xi))
    assert np.linalg.norm(res.reconstruct() - Xi) <= 1e-10 * scale
    n, k = Xi.shape
    assert np.linalg.norm(res.left.T @ res.left - np.eye(n)) <= 1e-10
    assert np.linalg.norm(res.right.T @ res.right - np.eye(k)) <= 1e-10
    vals = res.spectrum.values
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert np.allclose(vals, np.linalg.svd(Xi, compute_uv=False), atol=1e-12 * scale)


def test_svd_recovers_tiny_singular_value():
    Q1 = np.linalg.qr(np.random.default_rng(3).standard_normal((4, 4)))[0]
    Q2 = np.linalg.qr(np.random.default_rng(4).standard_normal((2, 2)))[0]
    Xi = Q1 @ rect_diag([1.0, 1e-9], 4) @ Q2
    assert svd(Xi).spectrum.values[1] == pytest.approx(1e-9, rel=1e-6)


def test_qr_of_orthonormal_columns(rng):
    A = np.linalg.qr(rng.standard_normal((5, 3)))[0]
    Q, R = qr_positive(A * np.sign(np.diag(np.linalg.qr(A)[1])))
    assert np.allclose(R, np.eye(3), atol=1e-12)


def test_qr_scaling_example():
    Q, R = qr_positive(np.array([[2.0], [0.0], [0.0]]))
    assert np.allclose(Q, [[1.0], [0.0], [0.0]]) and np.allclose(R, [[2.0]])


def test_qr_reconstruction(rng):
    A = rng.standard_normal((5, 3))
    Q, R = qr_positive(A)
    assert np.linalg.norm(A - Q @ R) <= 1e-10 * np.linalg.norm(A)
    assert np.linalg.norm(Q.T @ Q - np.eye(3)) <= 1e-10
    assert np.all(np.diag(R) > 0) and np.allclose(R, np.triu(R))


def test_qr_returns_given_factors(rng):
    Q0 = np.linalg.qr(rng.standard_normal((6, 3)))[0]
    R0 = np.triu(rng.standard_normal((3, 3)))
    R0[np.diag_indices(3)] = np.abs(R0[np.diag_indices(3)]) + 0.5
    Q, R = qr_positive(Q0 @ R0)
    assert np.allclose(Q, Q0, atol=1e-10) and np.allclose(R, R0, atol=1e-10)


def test_qr_rank_deficient():
    A = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    with pytest.raises(RankError):
        qr_positive(A)


def test_complete_orthonormal_is_orthogonal(rng):
    U = np.linalg.qr(rng.standard_normal((5, 2)))[0]
    O = complete_orthonormal(U, 5)
    assert np.allclose(O.T @ O, np.eye(5), atol=1e-13)
    assert np.allclose(O[:, :2], U)


def test_spectrum_validation():
    with pytest.raises(DomainError):
        SingularSpectrum((1.0, 2.0), 3, 2)
    with pytest.raises(DomainError):
        SingularSpectrum((1.0, -1.0), 3, 2)
    with pytest.raises(DimensionError):
        SingularSpectrum((1.0,), 3, 2)
    assert SingularSpectrum.from_values([1, -3], 4).values == (3.0, 1.0)


def test_sym2_eigvals_small_root_accuracy():
    hi, lo = sym2_eigvals(1.0, 0.0, 1e-20)
    assert hi == 1.0 and lo == pytest.approx(1e-20, rel=1e-12)
    a, b, c = 2.0, 0.5, 1.0
    w = np.linalg.eigvalsh([[a, b], [b, c]])
    assert np.allclose(sym2_eigvals(a, b, c), w[::-1])
