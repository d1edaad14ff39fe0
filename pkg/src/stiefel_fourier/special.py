"""Bessel functions of integer and half-integer order, sphere volumes, sphere transforms.

``bessel_j`` uses three regimes, all vectorized over the argument:

* ascending power series for ``t <= 12``;
* Miller backward recurrence, normalized with a Neumann series, in the
  middle band;
* the Hankel large-argument expansion once ``t`` is past
  :func:`hankel_threshold`.

Orders are restricted to ``2ν ∈ {-1, 0, 1, 2, ...}``, which covers every
sphere dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, DomainError

SERIES_LIMIT = 12.0
_HANKEL_MAX_TERMS = 80
_TINY = 1e-17
_RESCALE = 1e200


@dataclass(frozen=True)
class BesselOrder:
    """A Bessel order stored as ``twice_nu`` so half-integers are exact."""

    twice_nu: int

    def __post_init__(self):
        if int(self.twice_nu) != self.twice_nu or self.twice_nu < -1:
            raise DomainError(f"twice_nu must be an integer >= -1, got {self.twice_nu}")

    @property
    def nu(self):
        return self.twice_nu / 2.0

    @classmethod
    def of(cls, nu):
        if isinstance(nu, BesselOrder):
            return nu
        twice = 2.0 * float(nu)
        if not math.isfinite(twice) or abs(twice - round(twice)) > 1e-12:
            raise DomainError(f"order must be an integer or half-integer, got {nu}")
        return cls(int(round(twice)))


def hankel_threshold(nu):
    """Smallest argument at which the Hankel expansion is used for order ``nu``."""
    return max(25.0, 1.5 * nu * nu)


def _series_scaled(nu, t):
    """``J_nu(t) / (t/2)**nu`` by its power series."""
    q = -0.25 * t * t
    term = np.full_like(t, 1.0 / math.gamma(nu + 1.0))
    total = term.copy()
    m = 0
    while True:
        m += 1
        term = term * q / (m * (m + nu))
        total += term
        if m > 4 and np.all(np.abs(term) <= _TINY * np.maximum(np.abs(total), 1e-300)):
            break
        if m > 400:
            raise AccuracyError("power series for J_nu did not converge")
    return total


def _hankel(nu, t):
    mu = 4.0 * nu * nu
    inv = 1.0 / t
    P = np.ones_like(t)
    Q = np.zeros_like(t)
    term = np.ones_like(t)
    prev_mag = np.full_like(t, np.inf)
    active = np.ones(t.shape, dtype=bool)
    for k in range(1, _HANKEL_MAX_TERMS + 1):
        term = term * (mu - (2 * k - 1) ** 2) * inv / (8.0 * k)
        mag = np.abs(term)
        # Asymptotic series: stop each element at its smallest term.
        active &= mag < prev_mag
        if k >= 10:
            active &= mag > _TINY
        contrib = np.where(active, term, 0.0)
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            Q += sign * contrib
        else:
            P += sign * contrib
        prev_mag = mag
        if k >= 10 and not active.any():
            break
    c = (0.5 * nu + 0.25) * math.pi
    cos_chi = np.cos(t) * math.cos(c) + np.sin(t) * math.sin(c)
    sin_chi = np.sin(t) * math.cos(c) - np.cos(t) * math.sin(c)
    return np.sqrt(2.0 / (math.pi * t)) * (P * cos_chi - Q * sin_chi)


def _neumann_coefficients(nu0, count):
    """``(nu0 + 2k) Γ(nu0 + k) / k!`` for the identity ``Σ c_k J_{nu0+2k}(t) = (t/2)^nu0``."""
    if nu0 == 0.0:
        return np.array([1.0] + [2.0] * (count - 1))
    coef = np.empty(count)
    g = math.gamma(nu0)
    for k in range(count):
        if k:
            g *= (nu0 + k - 1) / k
        coef[k] = (nu0 + 2 * k) * g
    return coef


def _miller(nu, t):
    """Backward recurrence from far above the turning point."""
    base = math.floor(nu)
    nu0 = nu - base
    lowest = min(base, 0)
    top = max(base, float(t.max()))
    start = int(top + 30 + 4 * math.sqrt(top))
    start += start % 2
    coef = _neumann_coefficients(nu0, start // 2 + 1)

    f_next = np.zeros_like(t)
    f_cur = np.full_like(t, 1e-30)
    norm = np.zeros_like(t)
    target = np.zeros_like(t)
    for j in range(start, lowest - 1, -1):
        if j >= 0 and j % 2 == 0:
            norm += coef[j // 2] * f_cur
        if j == base:
            target = f_cur.copy()
        if j == lowest:
            break
        f_prev = 2.0 * (nu0 + j) / t * f_cur - f_next
        f_next, f_cur = f_cur, f_prev
        big = np.abs(f_cur) > _RESCALE
        if big.any():
            scale = np.where(big, 1.0 / _RESCALE, 1.0)
            f_cur *= scale
            f_next *= scale
            norm *= scale
            target *= scale
    return target * (0.5 * t) ** nu0 / norm


def _as_args(t):
    arr = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(arr)):
        raise DomainError("Bessel argument must be finite")
    if np.any(arr < 0):
        raise DomainError("Bessel argument must be nonnegative")
    return arr


def _evaluate(nu, t, scaled):
    flat = t.ravel()
    out = np.empty_like(flat)
    small = flat <= SERIES_LIMIT
    large = flat >= hankel_threshold(nu)
    mid = ~(small | large)
    if small.any():
        ts = flat[small]
        s = _series_scaled(nu, ts)
        if scaled:
            out[small] = s
        else:
            with np.errstate(divide="ignore"):
                out[small] = s * (0.5 * ts) ** nu
    if mid.any():
        out[mid] = _miller(nu, flat[mid])
    if large.any():
        out[large] = _hankel(nu, flat[large])
    if scaled:
        rest = ~small
        out[rest] = out[rest] / (0.5 * flat[rest]) ** nu
    if np.any(np.isnan(out)):
        raise AccuracyError(f"Bessel evaluation produced NaN for order {nu}")
    return out.reshape(t.shape)


def bessel_j(order, t):
    """Bessel function of the first kind ``J_nu(t)`` for ``t >= 0``.

    ``order`` is a number (integer or half-integer, ``>= -1/2``) or a
    :class:`BesselOrder`.  Accepts scalars or arrays.
    """
    nu = BesselOrder.of(order).nu
    arr = _as_args(t)
    out = _evaluate(nu, np.atleast_1d(arr), scaled=False)
    return float(out[0]) if arr.ndim == 0 else out


def bessel_j_scaled(order, x):
    """``J_nu(x) / (x/2)**nu``, continuous at ``x = 0`` where it equals ``1/Γ(nu+1)``."""
    nu = BesselOrder.of(order).nu
    arr = _as_args(x)
    out = _evaluate(nu, np.atleast_1d(arr), scaled=True)
    return float(out[0]) if arr.ndim == 0 else out


def bessel_j_half_closed(order, t):
    """Closed trigonometric form of ``J_{l+1/2}`` (cross-check only, ``t > 0``).

    Uses the upward recurrence of spherical Bessel functions, which is
    accurate for ``t`` of the order of ``l`` or larger.
    """
    twice = BesselOrder.of(order).twice_nu
    if twice % 2 == 0:
        raise DomainError("closed form exists only for half-integer orders")
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("closed form needs t > 0")
    ell = (twice - 1) // 2
    j_prev = np.cos(t) / t  # j_{-1}
    j_cur = np.sin(t) / t  # j_0
    for l in range(ell):
        j_prev, j_cur = j_cur, (2 * l + 1) / t * j_cur - j_prev
    j = j_prev if ell < 0 else j_cur
    return np.sqrt(2.0 * t / math.pi) * j


def sphere_vol(m):
    """Surface volume of the unit sphere ``S^m`` in ``R^(m+1)``."""
    if int(m) != m or m < 0:
        raise DomainError(f"sphere dimension must be a nonnegative integer, got {m}")
    return 2.0 * math.pi ** ((m + 1) / 2.0) / math.gamma((m + 1) / 2.0)


def stiefel_mass(n, k):
    """Total mass ``Π_{j<k} Vol(S^{n-1-j})`` of the iterated-sphere measure on ``St(n, k)``."""
    return math.prod(sphere_vol(n - 1 - j) for j in range(k))


def sphere_hat(n, r):
    """Fourier transform of the surface measure of ``S^{n-1}`` at radius ``r``.

    Equal to ``2π r^{-(n-2)/2} J_{(n-2)/2}(2πr)``; the value at ``r = 0`` is
    the total mass ``Vol(S^{n-1})``.  Vectorized in ``r``.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"need an integer n >= 1, got {n}")
    nu = (n - 2) / 2.0
    r_arr = _as_args(r)
    out = 2.0 * math.pi ** (nu + 1.0) * bessel_j_scaled(nu, 2.0 * math.pi * np.atleast_1d(r_arr))
    return float(out[0]) if r_arr.ndim == 0 else out


def sphere_hat_leading(n, r):
    """Leading large-``r`` term ``2 cos(2π(r - (n-1)/8)) r^{-(n-1)/2}`` of :func:`sphere_hat`."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(~(r_arr > 0)):
        raise DomainError("the asymptotic form is undefined at r <= 0")
    out = 2.0 * np.cos(2.0 * math.pi * (r_arr - (n - 1) / 8.0)) * r_arr ** (-(n - 1) / 2.0)
    return float(out) if r_arr.ndim == 0 else out
