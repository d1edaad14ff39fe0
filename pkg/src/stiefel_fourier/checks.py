"""Invariant checks and decay studies behind ``stiefel-fourier verify`` and ``sweep``.

Each check returns a :class:`CheckResult`; the suite runner only counts
them.  The studies return plain rows so the CLI can print them in any
format.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .asymptotics import (
    critical_contributions,
    stationary_phase_kernel,
    stationary_phase_leading,
)
from .exact import exact_estimate, k2_closed_form_n4, k2_quadrature, random_walk_form, recursive_quadrature
from .haar import sample_stiefel, stream
from .linalg import SingularSpectrum
from .special import sphere_hat, sphere_hat_leading, sphere_vol

TAUS = (8, 16, 32, 64, 128)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class SweepRow:
    tau: float
    exact: float
    leading: float
    abs_err: float
    scaled_err: float
    rel_err: float


def geometry_fd_check(n, k, points=5, pairs=20, seed=0, tol=1e-5):
    """Largest deviation of both finite-difference oracles from the closed-form ``II``."""
    gen = stream(seed, 0)
    worst_retr = worst_proj = 0.0
    for _ in range(points):
        X = sample_stiefel(n, k, gen)
        for _ in range(pairs):
            A = geo.random_tangent(X, gen)
            B = geo.random_tangent(X, gen)
            A /= np.linalg.norm(A)
            B /= np.linalg.norm(B)
            II = geo.second_fundamental_form(X, A, B)
            worst_retr = max(worst_retr, float(np.abs(geo.retraction_second_derivative(X, A, B) - II).max()))
            nd = geo.normal_project(X, geo.projector_derivative(X, A, B))
            worst_proj = max(worst_proj, float(np.abs(nd - II).max()))
    ok = bool(worst_retr <= tol and worst_proj <= tol)
    return CheckResult(
        f"second fundamental form by finite differences St({n},{k})",
        ok,
        f"retraction {worst_retr:.2e}, projector {worst_proj:.2e} (tol {tol:g})",
    )


def projector_identity_check(n, k, points=5, seed=1, tol=1e-12):
    """``P² = P``, ``P + P⊥ = I``, ``<P A, P⊥ B> = 0``, ``P(T) = T``."""
    gen = stream(seed, 0)
    worst = 0.0
    for _ in range(points):
        X = sample_stiefel(n, k, gen)
        A = gen.standard_normal((n, k))
        B = gen.standard_normal((n, k))
        PA = geo.tangent_project(X, A)
        NA = geo.normal_project(X, A)
        worst = max(
            worst,
            float(np.abs(geo.tangent_project(X, PA) - PA).max()),
            float(np.abs(geo.normal_project(X, NA) - NA).max()),
            float(np.abs(PA + NA - A).max()),
            abs(float(np.sum(PA * geo.normal_project(X, B)))),
            float(np.abs(geo.normal_project(X, PA)).max()),
        )
    return CheckResult(f"projector identities St({n},{k})", bool(worst <= tol), f"max residual {worst:.2e}")


def signature_determinant_check(n, k, seed=2, tol=1e-10):
    """Closed-form signature and ``|det|`` against the assembled pairing matrix, all sign vectors."""
    gen = stream(seed, 0)
    lam = np.sort(gen.uniform(0.5, 3.0, size=k))[::-1]
    while k > 1 and np.min(-np.diff(lam)) < 0.1:
        lam = np.sort(gen.uniform(0.5, 3.0, size=k))[::-1]
    spectrum = SingularSpectrum.from_values(lam, n)
    Xi = np.zeros((n, k))
    Xi[:k, :k] = np.diag(lam)
    sig_ok, worst = True, 0.0
    for s, X in geo.critical_points(spectrum):
        M = geo.assemble_pairing(X, Xi)
        sig_ok &= geo.signature_of(M) == geo.signature_formula(s, n, k)
        det = abs(float(np.prod(np.linalg.eigvalsh(M))))
        ref = geo.sff_abs_det(s, spectrum, n, k)
        worst = max(worst, abs(det - ref) / ref)
    return CheckResult(
        f"signature and determinant formulas St({n},{k})",
        bool(sig_ok and worst <= tol),
        f"signatures {'match' if sig_ok else 'DIFFER'}, determinant rel. error {worst:.2e}",
    )


def sphere_kernel_check(tol=1e-12):
    worst = 0.0
    for n in (2, 3, 4, 7):
        for r in (3.0, 10.5, 40.25):
            contribs = [(1.0, -(n - 1), 1.0), (-1.0, n - 1, 1.0)]
            got = stationary_phase_kernel(n - 1, contribs, r)
            ref = sphere_hat_leading(n, r)
            worst = max(worst, abs(got - ref) / max(abs(ref), r ** (-(n - 1) / 2)))
    return CheckResult("stationary-phase kernel reproduces the sphere leading term", worst <= tol, f"{worst:.2e}")


def closed_form_check(grid=(0.5, 1.0, 2.0, 5.0), tol=1e-8):
    worst_q = worst_rw = 0.0
    for a in grid:
        for b in grid:
            ref = k2_closed_form_n4(a, b)
            q = k2_quadrature(4, a, b).value
            worst_q = max(worst_q, abs(q - ref))
            worst_rw = max(worst_rw, abs(random_walk_form(4, a, b) - q))
    return CheckResult(
        "St(4,2) closed form, Bessel quadrature and random-walk form agree",
        worst_q <= tol and worst_rw <= tol,
        f"quadrature {worst_q:.2e}, random walk {worst_rw:.2e}",
    )


def reduction_check(tol=1e-6):
    """Integrating out a zero column: ``(4,2,(1,0))`` and ``(5,3,(2,1,0))``."""
    a = recursive_quadrature(4, 2, [1.0, 0.0]).value
    ra = sphere_vol(2) * sphere_hat(4, 1.0)
    b = recursive_quadrature(5, 3, [2.0, 1.0, 0.0]).value
    rb = sphere_vol(2) * k2_quadrature(5, 2.0, 1.0).value
    worst = max(abs(a - ra), abs(b - rb))
    return CheckResult("zero-column reduction", worst <= tol, f"max deviation {worst:.2e}")


def symmetry_check(tol=1e-12):
    """Contributions at ``s`` and ``-s`` mirror each other."""
    worst = 0.0
    for n, k, lam in ((4, 2, (2.0, 1.0)), (6, 3, (3.0, 2.0, 0.5))):
        sp = SingularSpectrum.from_values(lam, n)
        by_sign = {c.sign_vector: c for c in critical_contributions(n, k, sp)}
        for s, c in by_sign.items():
            m = by_sign[tuple(-v for v in s)]
            worst = max(
                worst,
                abs(c.amplitude - m.amplitude),
                abs(c.phase_cycles + m.phase_cycles),
                abs(c.signature + m.signature),
            )
    return CheckResult("s -> -s symmetry of critical contributions", worst <= tol, f"{worst:.2e}")


def remainder_sweep(n, k, direction, taus=TAUS, form="plus"):
    """Exact value against the leading term along ``τ · direction``."""
    rows = []
    for tau in taus:
        lam = tuple(tau * float(v) for v in direction)
        exact = exact_estimate(n, k, lam).value
        lead = stationary_phase_leading(n, k, lam, form=form)
        err = abs(exact - lead.value)
        rows.append(
            SweepRow(float(tau), exact, lead.value, err, err * tau ** ((n - k + 2) / 2), err / lead.details["envelope"])
        )
    return rows


def log_slope(rows):
    """Least-squares slope of ``log rel_err`` against ``log τ``."""
    t = np.log([r.tau for r in rows])
    e = np.log([max(r.rel_err, 1e-300) for r in rows])
    return float(np.polyfit(t, e, 1)[0])


def sign_check(tau_ref=64, cases=((4, 2, (2.0, 1.0), 0.0), (5, 2, (2.0, 1.0), 0.1))):
    """Residual of the plus and minus amplitude forms along each sweep.

    For ``(5, 2)`` with integer ``τ`` every critical point carries the same
    cosine factor, so the two forms coincide; that case uses ``τ + 0.1``.
    Returns ``(rows, separation)`` with the smallest minus/plus residual ratio
    at ``τ_ref``.
    """
    out, separation = [], math.inf
    for n, k, direction, shift in cases:
        taus = tuple(t + shift for t in TAUS)
        plus = remainder_sweep(n, k, direction, taus, "plus")
        minus = remainder_sweep(n, k, direction, taus, "minus")
        for p, m in zip(plus, minus):
            out.append((n, k, p.tau, float(p.rel_err), float(m.rel_err)))
            if math.isclose(p.tau, tau_ref + shift):
                separation = min(separation, float(m.rel_err / p.rel_err))
    return out, separation


def remainder_check(n, k, direction=(2.0, 1.0)):
    rows = remainder_sweep(n, k, direction)
    slope = log_slope(rows)
    bounded = all(b.scaled_err <= a.scaled_err * 1.05 for a, b in zip(rows, rows[1:]))
    return CheckResult(
        f"stationary-phase remainder order St({n},{k})",
        abs(slope + 1.0) <= 0.15 and bounded,
        f"relative remainder slope {slope:.3f}, scaled error {'non-increasing' if bounded else 'GROWS'}",
    )


def run_suite(quick=False):
    """All invariant checks; ``quick`` keeps the geometry and algebra checks only."""
    shapes = ((3, 2), (4, 2), (5, 3))
    results = [geometry_fd_check(n, k, points=2 if quick else 5, pairs=5 if quick else 20) for n, k in shapes]
    results += [projector_identity_check(n, k) for n, k in shapes]
    results += [signature_determinant_check(n, k) for n, k in ((4, 2), (5, 2), (5, 3), (6, 3))]
    results += [sphere_kernel_check(), symmetry_check()]
    if not quick:
        results += [closed_form_check(), reduction_check(), remainder_check(4, 2), remainder_check(5, 2)]
        _, sep = sign_check()
        results.append(CheckResult("plus-form amplitude beats minus-form", bool(sep >= 10.0), f"separation x{sep:.3g} at tau=64"))
    return results
