"""Second-order geometry of ``St(n, k) ⊂ R^{n x k}``.

Projectors onto tangent and normal spaces, the second fundamental form
``II_X(A, B) = -1/2 X (A^T B + B^T A)``, the critical points of the phase
``X -> Tr(X^T Xi)`` for rectangular-diagonal ``Xi``, and the eigenvalue,
signature and determinant data that feed stationary phase.  Two
finite-difference oracles (QR-retraction curves and the derivative of the
projector field) check the closed form for ``II``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDirectionError, DimensionError, PreconditionError
from .linalg import SingularSpectrum, complete_orthonormal, qr_positive, rect_diag

TANGENCY_TOL = 1e-8


def _sym(M):
    return 0.5 * (M + M.T)


def tangent_project(X, A):
    """``(I - X X^T) A + 1/2 X (X^T A - A^T X)``.

    The formula is also used off the manifold (``X`` any ``n x k`` matrix),
    which is how the projector field is differentiated.
    """
    X = np.asarray(X, dtype=float)
    A = np.asarray(A, dtype=float)
    if X.shape != A.shape:
        raise DimensionError(f"shape mismatch: {X.shape} vs {A.shape}")
    XtA = X.T @ A
    return A - X @ XtA + 0.5 * X @ (XtA - XtA.T)


def normal_project(X, A):
    """``1/2 X (X^T A + A^T X)``."""
    X = np.asarray(X, dtype=float)
    A = np.asarray(A, dtype=float)
    if X.shape != A.shape:
        raise DimensionError(f"shape mismatch: {X.shape} vs {A.shape}")
    return X @ _sym(X.T @ A)


def _check_tangent(X, A, name):
    resid = np.linalg.norm(normal_project(X, A))
    if resid > TANGENCY_TOL * max(1.0, np.linalg.norm(A)):
        raise PreconditionError(f"{name} is not tangent at X (normal component {resid:.2e})")


def second_fundamental_form(X, A, B):
    """``II_X(A, B) = -1/2 X (A^T B + B^T A)`` for tangent ``A``, ``B``."""
    X = np.asarray(X, dtype=float)
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    _check_tangent(X, A, "A")
    _check_tangent(X, B, "B")
    return -0.5 * X @ (A.T @ B + B.T @ A)


@dataclass(frozen=True)
class TangentBasis:
    """Orthonormal tangent basis: the ``so(k)`` part, then the Grassmann part.

    ``so_labels`` / ``grassmann_labels`` hold the 1-based ``(i, j)`` index of
    each element, in the same order as the matrices.
    """

    so_part: tuple
    grassmann_part: tuple
    base_point: np.ndarray
    so_labels: tuple
    grassmann_labels: tuple

    @property
    def elements(self):
        return self.so_part + self.grassmann_part

    @property
    def labels(self):
        return self.so_labels + self.grassmann_labels

    def __len__(self):
        return len(self.so_part) + len(self.grassmann_part)


def stiefel_dim(n, k):
    return k * (k - 1) // 2 + (n - k) * k


def tangent_basis(X):
    """Orthonormal basis of ``T_X St(n, k)``.

    ``so(k)`` part: ``X (E_ij - E_ji)/√2`` for ``i < j <= k``; Grassmann part:
    ``K_i e_j^T`` with ``K`` an orthonormal complement of ``X``, ordered by
    row ``i`` first, then column ``j``.  At the special point this is exactly
    ``(E_ij - E_ji)/√2`` and ``E_ij`` (``i > k``).
    """
    X = np.asarray(X, dtype=float)
    n, k = X.shape
    K = complete_orthonormal(X, n)[:, k:]
    so, so_lab = [], []
    for i, j in itertools.combinations(range(k), 2):
        W = np.zeros((k, k))
        W[i, j], W[j, i] = 1.0 / math.sqrt(2.0), -1.0 / math.sqrt(2.0)
        so.append(X @ W)
        so_lab.append((i + 1, j + 1))
    gr, gr_lab = [], []
    for i in range(n - k):
        for j in range(k):
            E = np.zeros((n, k))
            E[:, j] = K[:, i]
            gr.append(E)
            gr_lab.append((k + i + 1, j + 1))
    return TangentBasis(tuple(so), tuple(gr), X, tuple(so_lab), tuple(gr_lab))


def sign_vectors(k):
    """All ``s ∈ {+1, -1}^k``, ``+1`` first in each slot."""
    return [tuple(s) for s in itertools.product((1, -1), repeat=k)]


def _require_positive(spectrum):
    lam = spectrum.array
    zero = [j + 1 for j, v in enumerate(lam) if not v > 0]
    if zero:
        raise DegenerateDirectionError(
            f"singular values {zero} vanish; apply the zero-column reduction first"
        )
    return lam


def critical_points(spectrum):
    """The ``2^k`` frames ``rect_diag(s)`` where the rectangular-diagonal ``Xi`` is normal."""
    _require_positive(spectrum)
    n, k = spectrum.ambient_n, spectrum.frame_k
    return [(s, rect_diag(np.array(s, dtype=float), n)) for s in sign_vectors(k)]


@dataclass(frozen=True)
class SffPairing:
    """Matrix of ``<II(e_a, e_b), Xi>`` in the canonical tangent basis at a critical point."""

    matrix: np.ndarray
    base_sign: tuple
    spectrum: SingularSpectrum

    @property
    def eigenvalues(self):
        return np.linalg.eigvalsh(self.matrix)


def sff_pairing(s, spectrum):
    """Diagonal pairing at the critical point ``s``.

    Entries ``-1/2 (s_i λ_i + s_j λ_j)`` for the ``so(k)`` directions and
    ``-s_j λ_j`` for the Grassmann directions, in :func:`tangent_basis` order.
    """
    lam = _require_positive(spectrum)
    n, k = spectrum.ambient_n, spectrum.frame_k
    s = tuple(int(v) for v in s)
    if len(s) != k or any(v not in (-1, 1) for v in s):
        raise DimensionError(f"sign vector must have {k} entries in {{-1, +1}}, got {s}")
    sl = np.array(s) * lam
    diag = [-0.5 * (sl[i] + sl[j]) for i, j in itertools.combinations(range(k), 2)]
    diag += [-sl[j] for _ in range(n - k) for j in range(k)]
    return SffPairing(np.diag(diag), s, spectrum)


def assemble_pairing(X, Xi, basis=None):
    """Brute-force ``<II_X(e_a, e_b), Xi>`` over a full tangent basis."""
    X = np.asarray(X, dtype=float)
    basis = basis or tangent_basis(X)
    E = basis.elements
    d = len(E)
    M = np.empty((d, d))
    for a in range(d):
        for b in range(a, d):
            M[a, b] = M[b, a] = np.sum(second_fundamental_form(X, E[a], E[b]) * Xi)
    return M


def signature_formula(s, n, k):
    """``Σ_j s_j (j - n)``."""
    if len(s) != k:
        raise DimensionError(f"sign vector must have length {k}")
    return int(sum(sj * (j - n) for j, sj in enumerate(s, start=1)))


def sff_abs_det(s, spectrum, n, k):
    """``2^{-k(k-1)/2} |λ1...λk|^{n-k} Π_{i<j} |s_i λ_i + s_j λ_j|``."""
    lam = _require_positive(spectrum)
    if len(s) != k or len(lam) != k:
        raise DimensionError("sign vector and spectrum must both have length k")
    sl = np.array(s, dtype=float) * lam
    out = 2.0 ** (-k * (k - 1) / 2) * float(np.prod(lam)) ** (n - k)
    for i, j in itertools.combinations(range(k), 2):
        pair = abs(sl[i] + sl[j])
        if pair == 0.0:
            raise DegenerateDirectionError(
                f"s_i λ_i + s_j λ_j vanishes for pair {(i + 1, j + 1)}", pair=(i + 1, j + 1)
            )
        out *= pair
    return out


def signature_of(M, tol=1e-10):
    """Number of positive minus number of negative eigenvalues of symmetric ``M``."""
    w = np.linalg.eigvalsh(M)
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    return int(np.sum(w > tol * scale) - np.sum(w < -tol * scale))


def retract(Z):
    """QR retraction onto ``St(n, k)``."""
    return qr_positive(Z)[0]


def retraction_second_derivative(X, A, B, h=1e-4):
    """Normal part of the mixed second derivative of ``(s, t) -> retract(X + sA + tB)``."""
    X = np.asarray(X, dtype=float)
    D = (
        retract(X + h * A + h * B)
        - retract(X + h * A - h * B)
        - retract(X - h * A + h * B)
        + retract(X - h * A - h * B)
    ) / (4.0 * h * h)
    return normal_project(X, D)


def projector_derivative(X, A, B, h=1e-4):
    """Central difference of ``Z -> tangent_project(Z, B)`` along ``A`` at ``Z = X``."""
    X = np.asarray(X, dtype=float)
    return (tangent_project(X + h * A, B) - tangent_project(X - h * A, B)) / (2.0 * h)


def random_tangent(X, rng):
    """Project an ambient Gaussian matrix onto ``T_X``."""
    return tangent_project(X, rng.standard_normal(np.shape(X)))
