"""Haar sampling on Stiefel manifolds and orthogonal groups, and Monte Carlo estimators.

Every estimator splits its ``N`` samples into fixed-size chunks.  Chunk ``i``
draws from its own Philox stream keyed by ``(seed, i)``, so a result depends
only on ``(seed, N)``, never on how many threads ran the chunks.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import DimensionError, DomainError, SamplingError
from .estimate import FourierEstimate
from .linalg import SingularSpectrum, as_rect, gram_schmidt, rect_diag
from .special import stiefel_mass

CHUNK = 1 << 15
MIN_SAMPLES = 1000
_MAX_RETRIES = 8


def stream(seed, index=0):
    """Independent generator for work unit ``index`` of run ``seed``."""
    seq = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(seq))


def thread_count():
    raw = os.environ.get("STIEFEL_FOURIER_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, min(4, os.cpu_count() or 1))


def box_muller(gen, shape):
    """Standard normals from pairs of uniforms via the Box-Muller transform."""
    size = int(np.prod(shape))
    half = (size + 1) // 2
    u1 = 1.0 - gen.random(half)  # in (0, 1]
    u2 = gen.random(half)
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * math.pi * u2
    z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:size]
    return z.reshape(shape)


def _as_generator(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return stream(0 if rng is None else rng)


def sample_stiefel_batch(n, k, size, rng):
    """``size`` independent Haar frames, shape ``(size, n, k)``."""
    if not 1 <= k <= n:
        raise DimensionError(f"need 1 <= k <= n, got n={n}, k={k}")
    gen = _as_generator(rng)
    G = box_muller(gen, (size, n, k))
    Q, R = gram_schmidt(G)
    for _ in range(_MAX_RETRIES + 1):
        diag = np.diagonal(R, axis1=-2, axis2=-1).min(axis=-1)
        scale = np.sqrt(np.einsum("sij,sij->s", G, G))
        bad = ~(diag > 1e-12 * scale)
        if not bad.any():
            return Q
        G[bad] = box_muller(gen, (int(bad.sum()), n, k))
        Q[bad], R[bad] = gram_schmidt(G[bad])
    raise SamplingError(f"Gaussian draws stayed rank deficient after {_MAX_RETRIES} retries")


def sample_stiefel(n, k, rng):
    """One Haar-distributed point of ``St(n, k)``: the ``Q`` of a Gaussian matrix."""
    return sample_stiefel_batch(n, k, 1, rng)[0]


def sample_orthogonal(k, rng):
    """One Haar-distributed element of ``O(k)`` (both components)."""
    return sample_stiefel(k, k, rng)


def special_point(n, k):
    """The frame ``Y``: rectangular-diagonal with unit diagonal entries."""
    return rect_diag(np.ones(k), n)


def _chunk_sizes(N):
    full, rest = divmod(N, CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def _combine(stats):
    """Merge per-chunk ``(count, mean, M2)`` in a fixed order (Chan et al.)."""
    count, mean, m2 = 0, None, None
    for c, mu, s2 in stats:
        if mean is None:
            count, mean, m2 = c, mu.copy(), s2.copy()
            continue
        delta = mu - mean
        total = count + c
        mean = mean + delta * (c / total)
        m2 = m2 + s2 + delta * delta * (count * c / total)
        count = total
    return count, mean, m2


def chunked_mean(draw, N, seed, threads=None):
    """Mean and standard error of ``draw(gen, size) -> (size, m)`` over ``N`` samples."""
    sizes = _chunk_sizes(N)

    def work(item):
        i, size = item
        vals = np.asarray(draw(stream(seed, i), size), dtype=float)
        vals = vals.reshape(size, -1)
        mu = vals.mean(axis=0)
        return size, mu, ((vals - mu) ** 2).sum(axis=0)

    threads = threads or thread_count()
    items = list(enumerate(sizes))
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            stats = list(pool.map(work, items))
    else:
        stats = [work(it) for it in items]
    count, mean, m2 = _combine(stats)
    var = m2 / (count - 1) if count > 1 else np.zeros_like(m2)
    return mean, np.sqrt(var / count)


def _check_samples(N):
    if int(N) != N or N < MIN_SAMPLES:
        raise DomainError(f"Monte Carlo needs N >= {MIN_SAMPLES} samples, got {N}")
    return int(N)


def frequency_matrix(n, k, Xi):
    """Accept a full ``n x k`` matrix, a :class:`SingularSpectrum` or a list of ``k`` values."""
    if isinstance(Xi, SingularSpectrum):
        Xi = Xi.values
    arr = np.asarray(Xi, dtype=float)
    if arr.ndim == 1:
        if arr.size != k:
            raise DimensionError(f"expected {k} singular values, got {arr.size}")
        return rect_diag(arr, n)
    arr = as_rect(arr, "Xi")
    if arr.shape != (n, k):
        raise DimensionError(f"Xi has shape {arr.shape}, expected {(n, k)}")
    return arr


def mc_fourier(n, k, Xi, N, seed, threads=None):
    """Monte Carlo estimate of the transform of the ``St(n, k)`` surface measure at ``Xi``.

    The mean of ``cos(2π Tr(X^T Xi))`` over Haar samples, times the total
    mass.  The sine mean (zero in expectation) is kept in ``details``.
    """
    N = _check_samples(N)
    Xi = frequency_matrix(n, k, Xi)
    mass = stiefel_mass(n, k)

    def draw(gen, size):
        X = sample_stiefel_batch(n, k, size, gen)
        phase = 2.0 * math.pi * np.einsum("sij,ij->s", X, Xi)
        return np.column_stack([np.cos(phase), np.sin(phase)])

    mean, se = chunked_mean(draw, N, seed, threads)
    return FourierEstimate(
        value=mass * float(mean[0]),
        method="monte-carlo",
        total_mass=mass,
        std_error=mass * float(se[0]),
        samples_or_nodes=N,
        trail=(f"monte-carlo: N={N}, seed={seed}",),
        details={"imag": -mass * float(mean[1]), "imag_std_error": mass * float(se[1])},
    )


def mc_trace_moments(k, max_m, N, seed, threads=None):
    """Estimates of ``E[(Tr X)^m]``, ``m = 0..max_m``, under Haar probability on ``O(k)``."""
    N = _check_samples(N)
    powers = np.arange(max_m + 1)

    def draw(gen, size):
        X = sample_stiefel_batch(k, k, size, gen)
        tr = np.trace(X, axis1=-2, axis2=-1)
        return tr[:, None] ** powers[None, :]

    mean, se = chunked_mean(draw, N, seed, threads)
    mean[0], se[0] = 1.0, 0.0
    return mean, se


def mc_trace_moment(k, m, N, seed, threads=None):
    """``(estimate, std_error)`` of ``E[(Tr X)^m]`` for Haar ``X`` in ``O(k)``."""
    if int(m) != m or m < 0:
        raise DomainError(f"moment order must be a nonnegative integer, got {m}")
    if m == 0:
        _check_samples(N)
        return 1.0, 0.0
    mean, se = mc_trace_moments(k, int(m), N, seed, threads)
    return float(mean[m]), float(se[m])


def mc_char_function(k, lam, N, seed, threads=None):
    """Real part of ``E[exp(i λ Tr X)]`` for Haar ``X`` in ``O(k)``: ``(estimate, std_error)``."""
    N = _check_samples(N)

    def draw(gen, size):
        X = sample_stiefel_batch(k, k, size, gen)
        return np.cos(lam * np.trace(X, axis1=-2, axis2=-1))

    mean, se = chunked_mean(draw, N, seed, threads)
    return float(mean[0]), float(se[0])


def moment_series(k, lam, max_m, N, seed, threads=None):
    """Truncated series ``Re Σ_{m<=M} (iλ)^m/m! E[(Tr X)^m]`` with its standard error.

    Only even ``m`` contribute to the real part.
    """
    mean, se = mc_trace_moments(k, max_m, N, seed, threads)
    coef = np.array(
        [((-1) ** (m // 2)) * lam**m / math.factorial(m) if m % 2 == 0 else 0.0 for m in range(max_m + 1)]
    )
    return float(coef @ mean), float(np.sqrt(np.sum((coef * se) ** 2)))
