"""Leading-order stationary phase for the Stiefel transform, and the ``evaluate_auto`` pipeline.

The generic kernel sums ``cos(2π(τ x·ξ + sig/8)) |det|^{-1/2}`` over the
critical points of the phase and scales by ``τ^{-m/2}``.  For ``St(n, k)``
the critical points are the ``2^k`` sign frames ``rect_diag(s)``; their
signatures and determinants come from :mod:`stiefel_fourier.geometry`.

The kernel describes a measure with unit density against the Riemannian
volume of the embedding.  The surface measure used throughout the package
(total mass ``Π Vol(S^{n-1-j})``) is ``2^{-k(k-1)/4}`` times that volume, and
:func:`stationary_phase_leading` includes the factor.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDirectionError, DimensionError, DomainError
from .estimate import FourierEstimate
from .exact import DEFAULT_SPEC, QuadratureSpec, k2_closed_form_n4, k2_quadrature, recursive_quadrature
from .geometry import sff_abs_det, sign_vectors, signature_formula, stiefel_dim
from .haar import mc_fourier
from .linalg import SingularSpectrum, as_rect, svd
from .special import sphere_hat, sphere_vol, stiefel_mass

TOL_ZERO = 1e-3
TOL_GAP = 1e-3
# |exact - leading| <= C λ1^{-(n-k+2)/2}: C is the largest value of the scaled
# remainder over the (4, 2), λ = τ(2, 1), τ ∈ {8, ..., 128} sweep, rounded up (largest value 2.03e-3 at τ = 8).
# A heuristic size, not a bound.
REMAINDER_C = 0.0025


@dataclass(frozen=True)
class CriticalContribution:
    """One critical point's term in the leading-order sum."""

    sign_vector: tuple
    phase_cycles: float
    amplitude: float
    signature: int
    abs_det: float

    @property
    def frequency_cycles(self):
        """``Σ s_j λ_j``: the part of the phase that scales with the frequency."""
        return self.phase_cycles - self.signature / 8.0


@dataclass(frozen=True)
class DegeneracyReport:
    """Singular values near zero and near-coincident pairs (1-based indices)."""

    zero_indices: frozenset
    near_pairs: frozenset
    tol_zero: float = TOL_ZERO
    tol_gap: float = TOL_GAP

    @property
    def usable(self):
        return not self.zero_indices and not self.near_pairs

    def describe(self):
        parts = []
        if self.zero_indices:
            parts.append("near-zero singular values at " + ", ".join(map(str, sorted(self.zero_indices))))
        if self.near_pairs:
            parts.append("near-equal pairs " + ", ".join(f"({i},{j})" for i, j in sorted(self.near_pairs)))
        return "; ".join(parts) or "non-degenerate"


def degeneracy_report(spectrum, tol_zero=TOL_ZERO, tol_gap=TOL_GAP):
    lam = spectrum.values
    top = lam[0] if lam else 0.0
    zeros = frozenset(j for j, v in enumerate(lam, start=1) if v <= tol_zero * top)
    pairs = frozenset(
        (i + 1, j + 1)
        for i, j in itertools.combinations(range(len(lam)), 2)
        if abs(lam[i] - lam[j]) <= tol_gap * top
    )
    return DegeneracyReport(zeros, pairs, tol_zero, tol_gap)


def stationary_phase_kernel(m, contributions, tau):
    """``τ^{-m/2} Σ cos(2π(τ·phase + sig/8)) |det|^{-1/2}`` over ``(phase, sig, abs_det)`` triples."""
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")
    total = 0.0
    for phase, sig, det in contributions:
        if not det > 0:
            raise DegenerateDirectionError(f"critical point with |det| = {det} is degenerate")
        total += math.cos(2.0 * math.pi * (tau * phase + sig / 8.0)) / math.sqrt(det)
    return tau ** (-0.5 * m) * total


def _minus_abs_det(s, lam, n, k):
    sl = np.asarray(s, dtype=float) * lam
    out = 2.0 ** (-k * (k - 1) / 2) * float(np.prod(lam)) ** (n - k)
    for i, j in itertools.combinations(range(k), 2):
        out *= abs(sl[i] - sl[j])
    return out


def critical_contributions(n, k, spectrum, form="plus"):
    """Per-sign-vector data for the leading term.

    ``form="minus"`` swaps the determinant factor ``|s_i λ_i + s_j λ_j|`` for
    ``|s_i λ_i - s_j λ_j|``; it exists only to compare the two amplitude
    conventions and does not match the exact transform.
    """
    if form not in ("plus", "minus"):
        raise ValueError(f"form must be 'plus' or 'minus', got {form!r}")
    lam = spectrum.array
    out = []
    for s in sign_vectors(k):
        sig = signature_formula(s, n, k)
        det = sff_abs_det(s, spectrum, n, k) if form == "plus" else _minus_abs_det(s, lam, n, k)
        if not det > 0:
            raise DegenerateDirectionError(f"vanishing amplitude factor at sign vector {s}")
        freq = float(np.dot(s, lam))
        out.append(CriticalContribution(s, freq + sig / 8.0, det**-0.5, sig, det))
    return out


def normalization_factor(k):
    """Surface measure over Riemannian volume of ``St(n, k)``: ``2^{-k(k-1)/4}``."""
    return 2.0 ** (-k * (k - 1) / 4)


def _spectrum(n, k, spectrum):
    if not isinstance(spectrum, SingularSpectrum):
        spectrum = SingularSpectrum.from_values(spectrum, n)
    if spectrum.frame_k != k or spectrum.ambient_n != n:
        raise DimensionError(f"spectrum is for St({spectrum.ambient_n}, {spectrum.frame_k}), expected St({n}, {k})")
    return spectrum


def remainder_estimate(n, k, lam1):
    return REMAINDER_C * lam1 ** (-(n - k + 2) / 2)


def stationary_phase_leading(n, k, spectrum, form="plus", tol_zero=TOL_ZERO, tol_gap=TOL_GAP):
    """Leading stationary-phase term of the transform at a non-degenerate spectrum."""
    spectrum = _spectrum(n, k, spectrum)
    report = degeneracy_report(spectrum, tol_zero, tol_gap)
    if not report.usable:
        pair = min(report.near_pairs) if report.near_pairs else None
        raise DegenerateDirectionError(
            f"stationary phase refused: {report.describe()}", report=report, pair=pair
        )
    contribs = critical_contributions(n, k, spectrum, form)
    dim = stiefel_dim(n, k)
    value = normalization_factor(k) * stationary_phase_kernel(
        dim, [(c.phase_cycles, 0, c.abs_det) for c in contribs], 1.0
    )
    lam1 = spectrum.norm
    return FourierEstimate(
        value,
        "stationary-phase",
        stiefel_mass(n, k),
        trunc_error=remainder_estimate(n, k, lam1),
        samples_or_nodes=len(contribs),
        trail=(f"stationary phase ({form} form): {len(contribs)} critical points, dim={dim}",),
        details={"form": form, "envelope": normalization_factor(k) * sum(c.amplitude for c in contribs)},
    )


def reduce_zero_singulars(n, k, spectrum, tol_zero=TOL_ZERO):
    """Integrate out the columns paired with vanishing singular values.

    Returns ``(k0, prefactor, reduced)`` with ``reduced`` a spectrum on
    ``St(n, k0)`` and ``prefactor = Π_{j=k0+1}^{k} Vol(S^{n-j})``.
    """
    spectrum = _spectrum(n, k, spectrum)
    lam = spectrum.values
    cut = tol_zero * max(lam[0] if lam else 0.0, 1.0)
    k0 = sum(1 for v in lam if v > cut)
    prefactor = math.prod(sphere_vol(n - j) for j in range(k0 + 1, k + 1))
    return k0, prefactor, SingularSpectrum(tuple(lam[:k0]), n, k0)


@dataclass(frozen=True)
class AutoConfig:
    """Knobs for :func:`evaluate_auto`."""

    recursive_cap_n: int = 12
    asymptotic_threshold: float = 4.0
    samples: int = 1_000_000
    seed: int = 0
    tol_zero: float = 1e-12
    tol_gap: float = TOL_GAP
    quadrature: QuadratureSpec = field(default_factory=lambda: DEFAULT_SPEC)
    threads: int | None = None


def _closed(n, spectrum):
    mass = stiefel_mass(n, spectrum.frame_k)
    lam = spectrum.values
    if spectrum.frame_k == 1:
        value = sphere_hat(n, lam[0])
    else:
        value = k2_closed_form_n4(lam[0], lam[1])
    return FourierEstimate(value, "closed-form", mass, trunc_error=0.0, samples_or_nodes=0)


def _asymptotic_scale(spectrum):
    lam = spectrum.values
    gaps = [lam[i] - lam[i + 1] for i in range(len(lam) - 1)]
    return min([lam[-1]] + gaps)


def evaluate_auto(n, k, Xi, config=None):
    """Evaluate the transform at ``Xi`` by the cheapest applicable exact method.

    Order of preference after the zero-column reduction (``k0`` nonzero
    singular values): closed form (``k0 <= 1`` or ``n = 4, k0 = 2``),
    Bessel quadrature (``k0 = 2``), recursive quadrature (``k0 = 3`` and
    ``n <= recursive_cap_n``), stationary phase (non-degenerate and the
    smallest singular value and gap at least ``asymptotic_threshold``),
    then Monte Carlo.  Every choice is recorded in ``trail``.
    """
    config = config or AutoConfig()
    if isinstance(Xi, SingularSpectrum):
        spectrum = Xi
    else:
        arr = np.asarray(Xi, dtype=float)
        if arr.ndim == 1:
            spectrum = SingularSpectrum.from_values(arr, n)
        else:
            arr = as_rect(arr, "Xi")
            if arr.shape != (n, k):
                raise DimensionError(f"Xi has shape {arr.shape}, expected {(n, k)}")
            spectrum = svd(arr).spectrum
    spectrum = _spectrum(n, k, spectrum)
    trail = [f"spectrum: ({', '.join(f'{v:.17g}' for v in spectrum.values)})"]

    k0, prefactor, reduced = reduce_zero_singulars(n, k, spectrum, config.tol_zero)
    if k0 < k:
        trail.append(f"reduction: {k - k0} zero singular value(s) integrated out, prefactor {prefactor:.17g}")

    if k0 == 0:
        trail.append("closed-form: zero frequency gives the total mass")
        mass = stiefel_mass(n, k)
        return FourierEstimate(mass, "closed-form", mass, trunc_error=0.0, trail=tuple(trail))

    if k0 == 1 or (n == 4 and k0 == 2):
        trail.append("closed-form: " + ("sphere transform" if k0 == 1 else "St(4, 2) Bessel formula"))
        est = _closed(n, reduced)
    elif k0 == 2:
        trail.append("quadrature: one-dimensional Bessel integral for k=2")
        est = k2_quadrature(n, *reduced.values, config.quadrature)
    elif k0 == 3 and n <= config.recursive_cap_n:
        trail.append("recursive: first column integrated out, k=3")
        est = recursive_quadrature(n, 3, reduced, config.quadrature)
    else:
        report = degeneracy_report(reduced, config.tol_zero if config.tol_zero > 0 else TOL_ZERO, config.tol_gap)
        scale = _asymptotic_scale(reduced)
        if report.usable and scale >= config.asymptotic_threshold:
            trail.append(f"stationary-phase: non-degenerate, smallest value/gap {scale:.6g} >= {config.asymptotic_threshold}")
            est = stationary_phase_leading(n, k0, reduced, tol_zero=report.tol_zero, tol_gap=report.tol_gap)
        else:
            why = report.describe() if not report.usable else f"smallest value/gap {scale:.6g} below threshold"
            trail.append(f"monte-carlo: no exact method for k={k0}, n={n}; asymptotics skipped ({why})")
            est = mc_fourier(n, k0, reduced, config.samples, config.seed, config.threads)

    if k0 < k:
        est = est.scaled(prefactor)
    return est.with_trail(*trail)
