"""Small dense linear algebra: pairing, positive-diagonal QR, Jacobi SVD.

Matrices are plain ``numpy`` arrays of shape ``(n, k)`` with ``n >= k >= 1``.
Everything here is written for desk-scale sizes (``n`` up to a few dozen).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, RankError

_JACOBI_TOL = 1e-15
_JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class SingularSpectrum:
    """Singular values ``λ1 >= ... >= λk >= 0`` of an ``n x k`` frequency matrix."""

    values: tuple
    ambient_n: int
    frame_k: int

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != self.frame_k:
            raise DimensionError(f"spectrum has {len(vals)} values, expected k={self.frame_k}")
        if not (self.ambient_n >= self.frame_k >= 0):
            raise DimensionError(f"need n >= k >= 0, got n={self.ambient_n}, k={self.frame_k}")
        if any(not np.isfinite(v) or v < 0 for v in vals):
            raise DomainError(f"singular values must be finite and nonnegative: {vals}")
        if any(a < b for a, b in zip(vals, vals[1:])):
            raise DomainError(f"singular values must be nonincreasing: {vals}")

    @classmethod
    def from_values(cls, values, n):
        """Build a spectrum from unsorted magnitudes (sorted descending here)."""
        vals = sorted((abs(float(v)) for v in values), reverse=True)
        return cls(tuple(vals), n, len(vals))

    @property
    def array(self):
        return np.asarray(self.values, dtype=float)

    @property
    def norm(self):
        """Largest singular value, used as the matrix norm for remainder estimates."""
        return self.values[0] if self.values else 0.0

    def scaled(self, tau):
        return SingularSpectrum(tuple(tau * v for v in self.values), self.ambient_n, self.frame_k)


@dataclass(frozen=True)
class SvdResult:
    """``Xi = left @ rect_diag(spectrum) @ right`` with ``left``, ``right`` orthogonal."""

    left: np.ndarray
    spectrum: SingularSpectrum
    right: np.ndarray

    def reconstruct(self):
        n = self.left.shape[0]
        return self.left @ rect_diag(self.spectrum.values, n) @ self.right


def as_rect(A, name="matrix"):
    """Validate and return ``A`` as a finite float ``(n, k)`` array with ``n >= k >= 1``."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {A.shape}")
    n, k = A.shape
    if not n >= k >= 1:
        raise DimensionError(f"{name} must satisfy rows >= cols >= 1, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError(f"{name} has non-finite entries")
    return A


def rect_diag(values, n):
    """The ``n x k`` rectangular-diagonal matrix with ``values`` on its diagonal."""
    values = np.asarray(values, dtype=float)
    k = values.size
    if n < k:
        raise DimensionError(f"cannot place {k} diagonal values in {n} rows")
    D = np.zeros((n, k))
    D[np.arange(k), np.arange(k)] = values
    return D


def frobenius_pairing(X, Xi):
    """``Tr(X^T Xi)``, the Frobenius inner product."""
    X = np.asarray(X, dtype=float)
    Xi = np.asarray(Xi, dtype=float)
    if X.shape != Xi.shape:
        raise DimensionError(f"shape mismatch: {X.shape} vs {Xi.shape}")
    return float(np.sum(X * Xi))


def gram_schmidt(A):
    """Batched classical Gram-Schmidt with reorthogonalization.

    Works on stacks ``(..., n, k)``.  Returns ``(Q, R)`` with ``A = Q R`` and
    the diagonal of ``R`` nonnegative.  Does not check rank; see
    :func:`qr_positive`.
    """
    A = np.asarray(A, dtype=float)
    *batch, n, k = A.shape
    Q = np.zeros_like(A)
    R = np.zeros((*batch, k, k))
    for j in range(k):
        v = A[..., :, j].copy()
        for _ in range(2):
            if j:
                coef = np.einsum("...ij,...i->...j", Q[..., :, :j], v)
                v -= np.einsum("...ij,...j->...i", Q[..., :, :j], coef)
                R[..., :j, j] += coef
        r = np.sqrt(np.einsum("...i,...i->...", v, v))
        R[..., j, j] = r
        with np.errstate(divide="ignore", invalid="ignore"):
            Q[..., :, j] = v / r[..., None]
    return Q, R


def qr_positive(A):
    """Thin QR factorization with strictly positive ``diag(R)``.

    The positive-diagonal convention makes ``Q`` unique, which is what makes
    ``Q`` of a Gaussian matrix Haar distributed.
    """
    A = as_rect(A)
    Q, R = gram_schmidt(A)
    scale = np.linalg.norm(A)
    diag = np.diag(R)
    if scale == 0 or np.any(diag < 1e-12 * scale):
        j = int(np.argmin(diag))
        raise RankError(f"matrix is rank deficient at column {j + 1} (|R_jj| = {diag[j]:.3e})")
    return Q, R


def complete_orthonormal(U, n):
    """Extend the orthonormal columns of ``U`` (``n x r``) to an ``n x n`` orthogonal matrix.

    Standard basis vectors are added greedily, always taking the one with the
    largest residual, so the result is deterministic.
    """
    U = np.asarray(U, dtype=float).reshape(n, -1)
    cols = [U[:, j] for j in range(U.shape[1])]
    while len(cols) < n:
        basis = np.array(cols).T if cols else np.zeros((n, 0))
        best, best_norm = None, -1.0
        for i in range(n):
            v = np.zeros(n)
            v[i] = 1.0
            for _ in range(2):
                v -= basis @ (basis.T @ v)
            nv = np.linalg.norm(v)
            if nv > best_norm + 1e-12:
                best, best_norm = v, nv
        cols.append(best / best_norm)
    return np.array(cols).T


def _jacobi_sweeps(A):
    """One-sided (Hestenes) Jacobi: rotate columns of ``A`` until mutually orthogonal."""
    A = A.copy()
    k = A.shape[1]
    V = np.eye(k)
    for _ in range(_JACOBI_MAX_SWEEPS):
        rotated = False
        for p in range(k - 1):
            for q in range(p + 1, k):
                alpha = A[:, p] @ A[:, p]
                beta = A[:, q] @ A[:, q]
                gamma = A[:, p] @ A[:, q]
                if gamma == 0.0 or abs(gamma) <= _JACOBI_TOL * np.sqrt(alpha * beta):
                    continue
                rotated = True
                with np.errstate(over="ignore"):  # ζ = ±inf still gives t = 0
                    zeta = (beta - alpha) / (2.0 * gamma)
                    t = np.copysign(1.0, zeta) / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                ap, aq = A[:, p].copy(), A[:, q].copy()
                A[:, p], A[:, q] = c * ap - s * aq, s * ap + c * aq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p], V[:, q] = c * vp - s * vq, s * vp + c * vq
        if not rotated:
            break
    return A, V


def svd(Xi):
    """Singular value decomposition ``Xi = O @ rect_diag(λ) @ P``.

    Conventions: values sorted nonincreasing (ties keep column order), and
    the first nonzero entry of every right singular vector (row of ``P``)
    is positive.
    """
    Xi = as_rect(Xi, "Xi")
    n, k = Xi.shape
    B, V = _jacobi_sweeps(Xi)
    sigma = np.linalg.norm(B, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma, B, V = sigma[order], B[:, order], V[:, order]

    for j in range(k):
        nz = np.flatnonzero(np.abs(V[:, j]) > 1e-14)
        if nz.size and V[nz[0], j] < 0:
            V[:, j] = -V[:, j]
            B[:, j] = -B[:, j]

    cutoff = 1e-13 * max(sigma[0], np.finfo(float).tiny) if k else 0.0
    significant = [j for j in range(k) if sigma[j] > cutoff]
    U = np.zeros((n, 0))
    for j in significant:
        u = B[:, j] / sigma[j]
        for _ in range(2):
            u -= U @ (U.T @ u)
        U = np.column_stack([U, u / np.linalg.norm(u)])
    # Null directions (if any) are filled by the deterministic completion.
    left = complete_orthonormal(U, n)
    spectrum = SingularSpectrum(tuple(float(s) for s in sigma), n, k)
    return SvdResult(left, spectrum, V.T)


def spectrum_of(Xi):
    """Singular spectrum of ``Xi`` (shortcut for ``svd(Xi).spectrum``)."""
    return svd(Xi).spectrum


def sym2_eigvals(a, b, c, det=None):
    """Eigenvalues ``(hi, lo)`` of the symmetric matrices ``[[a, b], [b, c]]`` (vectorized).

    The smaller root is recovered from the determinant to avoid cancellation;
    pass ``det`` when an exact expression for it is known.
    """
    a, b, c = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (a, b, c)))
    half_tr = 0.5 * (a + c)
    disc = np.hypot(0.5 * (a - c), b)
    hi = half_tr + disc
    det = a * c - b * b if det is None else np.asarray(det, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = np.where(hi > 0, det / hi, half_tr - disc)
    return hi, lo
