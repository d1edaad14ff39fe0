import math

import numpy as np
import pytest

from stiefel_fourier import asymptotics as A
from stiefel_fourier.errors import DegenerateDirectionError, DomainError
from stiefel_fourier.exact import k2_closed_form_n4, k2_quadrature
from stiefel_fourier.geometry import sff_abs_det, signature_formula, stiefel_dim
from stiefel_fourier.haar import mc_fourier
from stiefel_fourier.linalg import SingularSpectrum, rect_diag
from stiefel_fourier.special import sphere_hat_leading, sphere_vol, stiefel_mass


def test_kernel_trivial():
    for m, tau in ((1, 3.0), (5, 0.25)):
        assert A.stationary_phase_kernel(m, [(0.0, 0, 1.0)], tau) == pytest.approx(tau ** (-m / 2))


def test_kernel_rejects_bad_input():
    with pytest.raises(DegenerateDirectionError):
        A.stationary_phase_kernel(1, [(0.0, 0, 0.0)], 1.0)
    with pytest.raises(DomainError):
        A.stationary_phase_kernel(1, [(0.0, 0, 1.0)], 0.0)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_kernel_reproduces_sphere(n):
    for r in (2.3, 17.0, 101.5):
        got = A.stationary_phase_kernel(n - 1, [(1.0, -(n - 1), 1.0), (-1.0, n - 1, 1.0)], r)
        assert got == pytest.approx(sphere_hat_leading(n, r), rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("n", [2, 3, 6])
def test_leading_k1_is_sphere_leading(n):
    for r in (4.2, 33.3):
        est = A.stationary_phase_leading(n, 1, [r])
        assert est.value == pytest.approx(sphere_hat_leading(n, r), rel=1e-12, abs=1e-15)


def test_contribution_fields():
    sp = SingularSpectrum.from_values([2.0, 1.0], 4)
    for c in A.critical_contributions(4, 2, sp):
        assert c.signature == signature_formula(c.sign_vector, 4, 2)
        assert c.amplitude == pytest.approx(c.abs_det**-0.5)
        assert c.abs_det == sff_abs_det(c.sign_vector, sp, 4, 2)
        expected = sum(s * (lam - (4 - j) / 8) for j, (s, lam) in enumerate(zip(c.sign_vector, sp.values), start=1))
        assert c.phase_cycles == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("n,k,lam0", [(4, 2, (2.0, 1.0)), (5, 3, (3.0, 2.0, 1.0)), (7, 2, (1.3, 0.4))])
def test_leading_equals_kernel_along_rays(n, k, lam0):
    sp0 = SingularSpectrum.from_values(lam0, n)
    contribs = [(c.frequency_cycles, c.signature, c.abs_det) for c in A.critical_contributions(n, k, sp0)]
    for tau in (1.5, 9.0, 40.0):
        lead = A.stationary_phase_leading(n, k, sp0.scaled(tau)).value
        ker = A.normalization_factor(k) * A.stationary_phase_kernel(stiefel_dim(n, k), contribs, tau)
        assert lead == pytest.approx(ker, rel=1e-12, abs=1e-300)


def test_sign_flip_symmetry():
    sp = SingularSpectrum.from_values([3.0, 2.0, 0.5], 6)
    by = {c.sign_vector: c for c in A.critical_contributions(6, 3, sp)}
    half = 0.0
    for s, c in by.items():
        m = by[tuple(-v for v in s)]
        assert c.amplitude == m.amplitude and c.phase_cycles == -m.phase_cycles and c.signature == -m.signature
        if s[0] == 1:
            half += math.cos(2 * math.pi * c.phase_cycles) * c.amplitude
    full = sum(math.cos(2 * math.pi * c.phase_cycles) * c.amplitude for c in by.values())
    assert full == pytest.approx(2 * half, rel=1e-12)


def test_homogeneity_envelope():
    sp0 = SingularSpectrum.from_values([2.0, 1.0], 3)
    env = A.normalization_factor(2) * sum(c.amplitude for c in A.critical_contributions(3, 2, sp0))
    for c in np.linspace(1, 50, 40):
        assert abs(A.stationary_phase_leading(3, 2, sp0.scaled(c)).value) * c ** (3 / 2) <= env * (1 + 1e-12)


def test_relative_error_decays_like_inverse_tau():
    taus = (8, 16, 32, 64)
    rel = []
    for tau in taus:
        est = A.stationary_phase_leading(4, 2, (2 * tau, tau))
        rel.append(abs(k2_closed_form_n4(2 * tau, tau) - est.value) / est.details["envelope"])
    slope = np.polyfit(np.log(taus), np.log(rel), 1)[0]
    assert abs(slope + 1) <= 0.15


def test_truncation_estimate_covers_calibration_sweep():
    for tau in (8, 16, 32, 64, 128):
        est = A.stationary_phase_leading(4, 2, (2 * tau, tau))
        assert abs(k2_closed_form_n4(2 * tau, tau) - est.value) <= est.trunc_error


def test_minus_form_differs():
    est_p = A.stationary_phase_leading(4, 2, (128.0, 64.0))
    est_m = A.stationary_phase_leading(4, 2, (128.0, 64.0), form="minus")
    exact = k2_closed_form_n4(128.0, 64.0)
    assert abs(exact - est_m.value) > 100 * abs(exact - est_p.value)


def test_degeneracy_report_examples():
    assert A.degeneracy_report(SingularSpectrum.from_values([2, 1], 4)).usable
    rep = A.degeneracy_report(SingularSpectrum.from_values([1, 1], 4))
    assert rep.near_pairs == {(1, 2)} and not rep.usable
    rep = A.degeneracy_report(SingularSpectrum.from_values([1, 0], 4))
    assert rep.zero_indices == {2} and not rep.usable


def test_leading_refuses_degenerate():
    with pytest.raises(DegenerateDirectionError) as info:
        A.stationary_phase_leading(5, 2, (1.0, 1.0))
    assert info.value.pair == (1, 2) and info.value.report is not None
    with pytest.raises(DegenerateDirectionError):
        A.stationary_phase_leading(5, 2, (1.0, 0.0))


def test_reduce_zero_singulars_examples():
    k0, pre, red = A.reduce_zero_singulars(5, 3, SingularSpectrum.from_values([3, 2, 0], 5))
    assert (k0, red.values) == (2, (3.0, 2.0)) and pre == pytest.approx(4 * math.pi)
    k0, pre, red = A.reduce_zero_singulars(5, 3, SingularSpectrum.from_values([0, 0, 0], 5))
    assert k0 == 0 and red.values == () and pre == pytest.approx(stiefel_mass(5, 3))
    k0, pre, red = A.reduce_zero_singulars(5, 3, SingularSpectrum.from_values([3, 2, 1], 5))
    assert k0 == 3 and pre == 1.0


def test_auto_zero_frequency():
    est = A.evaluate_auto(4, 3, np.zeros((4, 3)))
    assert est.method == "closed-form" and est.value == pytest.approx(stiefel_mass(4, 3))


def test_auto_n4_generic_closed_form_vs_mc():
    Xi = np.random.default_rng(5).standard_normal((4, 2))
    est = A.evaluate_auto(4, 2, Xi)
    assert est.method == "closed-form"
    assert any("St(4, 2)" in t for t in est.trail)
    mc = mc_fourier(4, 2, Xi, 300_000, seed=40)
    assert abs(est.value - mc.value) <= 3 * mc.std_error


def test_auto_degenerate_k2_uses_quadrature():
    est = A.evaluate_auto(5, 2, [1.0, 1.0])
    assert est.method == "quadrature"
    assert est.value == pytest.approx(k2_quadrature(5, 1.0, 1.0).value, abs=1e-13)


def test_auto_reduction_path():
    est = A.evaluate_auto(5, 3, [2.0, 1.0, 0.0])
    assert any("reduction" in t for t in est.trail)
    assert est.value == pytest.approx(sphere_vol(2) * k2_quadrature(5, 2.0, 1.0).value, abs=1e-9)
    assert est.total_mass == pytest.approx(stiefel_mass(5, 3))


def test_auto_k3_recursive_and_k4_routes():
    assert A.evaluate_auto(5, 3, [1.0, 0.5, 0.2]).method == "recursive"
    far = A.evaluate_auto(6, 4, [40.0, 30.0, 20.0, 10.0])
    assert far.method == "stationary-phase"
    near = A.evaluate_auto(6, 4, [0.4, 0.3, 0.2, 0.1], A.AutoConfig(samples=20_000))
    assert near.method == "monte-carlo" and any("monte-carlo" in t for t in near.trail)
    capped = A.evaluate_auto(5, 3, [1.0, 0.5, 0.2], A.AutoConfig(recursive_cap_n=4, samples=20_000))
    assert capped.method == "monte-carlo"


def test_auto_accepts_full_matrix():
    Xi = np.random.default_rng(6).standard_normal((5, 2))
    U, s, Vt = np.linalg.svd(Xi)
    a = A.evaluate_auto(5, 2, Xi).value
    b = A.evaluate_auto(5, 2, rect_diag(s, 5)).value
    assert a == pytest.approx(b, abs=1e-11)
