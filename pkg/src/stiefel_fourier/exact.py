"""Deterministic evaluators of the ``St(n, k)`` transform for ``k <= 3``.

All routines work with the iterated-sphere normalization (total mass
``Π Vol(S^{n-1-j})``).  Integrals over ``[-1, 1]`` are rewritten with
``t = cos θ`` so that the weights ``(1 - t^2)^{(n-3)/2}`` (a square-root
branch point for even ``n``) become smooth trigonometric factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AccuracyError, DimensionError, DomainError, UnsupportedError
from .estimate import FourierEstimate
from .linalg import SingularSpectrum, sym2_eigvals
from .special import bessel_j, sphere_hat, sphere_vol, stiefel_mass

TWO_PI = 2.0 * math.pi
_BLOCK = 1 << 21


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre settings.

    ``panel_count`` overrides the oscillation-based rule
    ``max(min_panels, ceil(panels_per_cycle * cycles))``.  Multi-dimensional
    rules use the coarser ``multi_panels_per_cycle``.  ``target_tol`` is
    relative to the total mass of the measure.
    """

    node_count: int = 16
    panel_count: int | None = None
    target_tol: float = 1e-12
    panels_per_cycle: float = 4.0
    multi_panels_per_cycle: float = 0.5
    min_panels: int = 8
    max_refinements: int = 4
    scheme: str = "gauss-legendre"

    def __post_init__(self):
        if self.node_count < 8:
            raise DomainError("node_count must be at least 8")
        if self.panel_count is not None and self.panel_count < 1:
            raise DomainError("panel_count must be at least 1")
        if self.scheme != "gauss-legendre":
            raise DomainError(f"unsupported scheme {self.scheme!r}")

    def panels(self, cycles):
        if self.panel_count is not None:
            return self.panel_count
        return max(self.min_panels, math.ceil(self.panels_per_cycle * cycles))

    def multi_panels(self, cycles):
        return max(4, math.ceil(self.multi_panels_per_cycle * cycles))


DEFAULT_SPEC = QuadratureSpec()


@lru_cache(maxsize=32)
def _legendre(order):
    return np.polynomial.legendre.leggauss(order)


def composite_gauss(a, b, panels, order):
    """Nodes and weights of the composite ``order``-point Gauss-Legendre rule on ``[a, b]``."""
    x, w = _legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _refine(evaluate, spec, mass, what):
    """Panel doubling until two successive levels agree to ``target_tol * mass``.

    ``evaluate(level)`` returns ``(value, node_count)``.
    """
    prev, _ = evaluate(1)
    level = 2
    diffs = []
    for _ in range(spec.max_refinements):
        cur, nodes = evaluate(level)
        diff = abs(cur - prev)
        diffs.append(diff)
        if diff <= spec.target_tol * max(mass, 1.0):
            return cur, diff, nodes, diffs
        prev = cur
        level *= 2
    best = FourierEstimate(cur, "quadrature", mass, trunc_error=diff, samples_or_nodes=nodes)
    raise AccuracyError(f"{what}: panel doubling did not reach tolerance (last difference {diff:.3e})", best)


def _check_freq(*vals):
    for v in vals:
        if not (np.all(np.isfinite(v)) and np.all(np.asarray(v) >= 0)):
            raise DomainError(f"frequencies must be finite and nonnegative, got {v}")


def _k2_integral(n, kappa, lam, level, spec):
    """``2∫_0^{π/2} σ̂(κ sinθ) σ̂(λ sinθ) sin^{n-2}θ dθ`` for arrays of ``(κ, λ)`` pairs."""
    kappa = np.atleast_1d(np.asarray(kappa, dtype=float))
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    cycles = float(np.max(kappa + lam)) if kappa.size else 0.0
    panels = spec.panels(cycles) * level
    theta, w = composite_gauss(0.0, 0.5 * math.pi, panels, spec.node_count)
    s = np.sin(theta)
    w = 2.0 * w * s ** (n - 2)
    out = np.empty(kappa.shape)
    step = max(1, _BLOCK // theta.size)
    for i in range(0, kappa.size, step):
        kb, lb = kappa[i : i + step, None], lam[i : i + step, None]
        fk = sphere_hat(n - 1, kb * s[None, :])
        fl = fk if np.array_equal(kb, lb) else sphere_hat(n - 1, lb * s[None, :])
        out[i : i + step] = (fk * fl) @ w
    return out, theta.size


def k2_quadrature(n, kappa, lam, spec=DEFAULT_SPEC):
    """Transform on ``St(n, 2)`` at singular values ``(κ, λ)`` by one-dimensional quadrature.

    Evaluates ``∫_{-1}^{1} σ̂_{n-2}(κ√(1-t²)) σ̂_{n-2}(λ√(1-t²)) (1-t²)^{(n-3)/2} dt``.
    Valid everywhere, including ``κ = λ`` and ``λ = 0``.
    """
    if n < 3:
        raise DimensionError(f"k2_quadrature needs n >= 3, got {n}")
    _check_freq(kappa, lam)
    mass = stiefel_mass(n, 2)

    def evaluate(level):
        vals, nodes = _k2_integral(n, kappa, lam, level, spec)
        return float(vals[0]), nodes

    value, err, nodes, diffs = _refine(evaluate, spec, mass, "k2_quadrature")
    return FourierEstimate(
        value,
        "quadrature",
        mass,
        trunc_error=err,
        samples_or_nodes=nodes,
        trail=(f"k2 quadrature: n={n}, {nodes} nodes",),
        details={"richardson": diffs},
    )


def _bracket_series(big, small, terms=14):
    """``[J0(a) - J0(b)] / (κλ)`` for small ``a = 2π(κ-λ)``, ``b = 2π(κ+λ)``."""
    a2 = (TWO_PI * (big - small)) ** 2
    b2 = (TWO_PI * (big + small)) ** 2
    total = np.zeros_like(big)
    fact = 1.0
    for m in range(1, terms + 1):
        fact *= m
        inner = sum(b2**j * a2 ** (m - 1 - j) for j in range(m))
        total += (-1) ** (m + 1) * inner / (4.0**m * fact * fact)
    return 16.0 * math.pi**2 * total


def _bracket_taylor(big, small):
    """Same quantity for ``small << big``: expansion in ``h = 2π small`` to order ``h^3``."""
    x = TWO_PI * big
    h = TWO_PI * small
    j0, j1 = bessel_j(0, x), bessel_j(1, x)
    dj1 = j0 - j1 / x
    d2j1 = -dj1 / x - (1.0 - 1.0 / (x * x)) * j1
    return TWO_PI / big * (2.0 * j1 + h * h / 3.0 * d2j1)


def k2_closed_form_n4(kappa, lam):
    """Closed form on ``St(4, 2)``: ``(2π/(κλ)) [J0(2π(κ-λ)) - J0(2π(κ+λ))]``.

    Small arguments switch to a power series of the bracket, and a small
    ``min(κ, λ)`` next to a larger one to a Taylor expansion, so the
    ``1/(κλ)`` prefactor never amplifies cancellation.  The limit at the
    origin is the total mass ``8π³``.  Vectorized.
    """
    k_arr, l_arr = np.broadcast_arrays(np.asarray(kappa, dtype=float), np.asarray(lam, dtype=float))
    if np.any(~np.isfinite(k_arr)) or np.any(~np.isfinite(l_arr)):
        raise DomainError("frequencies must be finite")
    if np.any(k_arr < 0) or np.any(l_arr < 0):
        raise DomainError("frequencies must be nonnegative")
    big = np.maximum(k_arr, l_arr).ravel()
    small = np.minimum(k_arr, l_arr).ravel()
    ratio = np.empty_like(big)  # [J0(a) - J0(b)] / (κλ)

    series = big <= 0.05
    taylor = ~series & (small < 1e-6)
    direct = ~(series | taylor)
    if series.any():
        ratio[series] = _bracket_series(big[series], small[series])
    if taylor.any():
        ratio[taylor] = _bracket_taylor(big[taylor], small[taylor])
    if direct.any():
        bd, sd = big[direct], small[direct]
        ratio[direct] = (bessel_j(0, TWO_PI * (bd - sd)) - bessel_j(0, TWO_PI * (bd + sd))) / (bd * sd)
    out = (TWO_PI * ratio).reshape(k_arr.shape)
    return float(out) if out.ndim == 0 else out


def random_walk_form(n, kappa, lam, spec=DEFAULT_SPEC):
    """The ``St(n, 2)`` transform rewritten through a two-step random walk.

    For ``u, v`` uniform on the unit sphere of ``R^{n-1}``, the law of
    ``κu + λv`` is ``σ̃_κ * σ̃_λ``; its transform at radius ``s`` is the mean of
    the normalized sphere transform at ``s |κu + λv|``, averaged over the
    angle between ``u`` and ``v``.  Integrating against ``(1-t²)^{(n-3)/2}``
    with ``s = √(1-t²)`` reproduces :func:`k2_quadrature`.
    """
    if n < 3:
        raise DimensionError(f"random_walk_form needs n >= 3, got {n}")
    _check_freq(kappa, lam)
    kappa, lam = float(kappa), float(lam)
    vol = sphere_vol(n - 2)
    angle_mass = vol / sphere_vol(n - 3)  # ∫_0^π sin^{n-3}φ dφ
    mass = stiefel_mass(n, 2)

    def evaluate(level):
        panels = spec.panels(kappa + lam) * level
        theta, wt = composite_gauss(0.0, 0.5 * math.pi, panels, spec.node_count)
        phi, wp = composite_gauss(0.0, math.pi, panels, spec.node_count)
        wp = wp * np.sin(phi) ** (n - 3) / angle_mass
        # |κu + λv| with u·v = cos φ, written to stay accurate near κ = λ, φ = π
        radius = np.sqrt((kappa - lam) ** 2 + 4.0 * kappa * lam * np.cos(0.5 * phi) ** 2)
        s = np.sin(theta)
        walk = (sphere_hat(n - 1, s[:, None] * radius[None, :]) / vol) @ wp
        value = vol * vol * float(np.sum(2.0 * wt * s ** (n - 2) * walk))
        return value, theta.size * phi.size

    value, _, _, _ = _refine(evaluate, spec, mass, "random_walk_form")
    return value


def _stiefel2_values(n, kappa, lam, level, spec):
    """Vectorized ``St(n, 2)`` transform for the inner step of the recursion."""
    if n == 4:
        return k2_closed_form_n4(kappa, lam)
    kappa, lam = np.broadcast_arrays(kappa, lam)
    vals, _ = _k2_integral(n, kappa.ravel(), lam.ravel(), level, spec)
    return vals.reshape(kappa.shape)


def _inner(n, k, sig1, sig2, spec):
    """Transform on ``St(n, k)`` (``k <= 2``) at arrays of singular values.

    The inner rule is not refined with the outer one: its panel count already
    tracks the inner frequencies.
    """
    if k == 1:
        return sphere_hat(n, sig1)
    return _stiefel2_values(n, sig1, sig2, 1, spec)


def _inner_spectrum(lam, u):
    """Singular values of ``Λ'`` after projecting its columns onto ``x1^⊥``.

    ``u`` holds the coordinates ``(x1_2, ..., x1_k)``; the Gram matrix is
    ``Λ' (I - u u^T) Λ'``.
    """
    if len(lam) == 2:
        return lam[1] * np.sqrt(np.clip(1.0 - u[0] ** 2, 0.0, None)), None
    l2, l3 = lam[1], lam[2]
    a = l2 * l2 * (1.0 - u[0] ** 2)
    c = l3 * l3 * (1.0 - u[1] ** 2)
    b = -l2 * l3 * u[0] * u[1]
    det = (l2 * l3) ** 2 * np.clip(1.0 - u[0] ** 2 - u[1] ** 2, 0.0, None)
    hi, lo = sym2_eigvals(a, b, c, det)
    return np.sqrt(np.clip(hi, 0.0, None)), np.sqrt(np.clip(lo, 0.0, None))


def _recursive_full(n, k, lam, level, spec):
    """Product rule over ``k`` hyperspherical angles of the first column."""
    order = spec.node_count
    cyc_rest = float(sum(lam[1:]))
    grids = [composite_gauss(0.0, 0.5 * math.pi, spec.multi_panels(lam[0] + cyc_rest) * level, order)]
    for _ in range(1, k):
        grids.append(composite_gauss(0.0, 0.5 * math.pi, spec.multi_panels(cyc_rest) * level, order))
    mesh = np.meshgrid(*[g[0] for g in grids], indexing="ij")
    wmesh = np.meshgrid(*[g[1] for g in grids], indexing="ij")
    weight = np.ones_like(mesh[0])
    for i, (w, th) in enumerate(zip(wmesh, mesh), start=1):
        weight = weight * w * np.sin(th) ** (n - 1 - i)
    coords = []
    running = np.ones_like(mesh[0])
    for th in mesh:
        coords.append(running * np.cos(th))
        running = running * np.sin(th)
    phase = np.cos(TWO_PI * lam[0] * coords[0])
    sig1, sig2 = _inner_spectrum(lam, coords[1:])
    inner = _inner(n - 1, k - 1, sig1, sig2, spec)
    value = sphere_vol(n - 1 - k) * 2.0**k * float(np.sum(weight * phase * inner))
    return value, weight.size


def _recursive_sliced(n, k, lam, level, spec):
    """First column with its phase coordinate integrated in closed form.

    For fixed ``u = (x1_2, ..., x1_k)`` the remaining coordinates of ``x1``
    sweep a sphere ``S^{n-k}`` of radius ``ρ = √(1-|u|²)``, whose transform at
    ``λ1 e1`` is ``ρ^{n-k} σ̂_{n-k}(λ1 ρ)``.  The outer integral runs over the
    ball ``|u| < 1`` in polar form, ``|u| = sin α``.
    """
    order = spec.node_count
    alpha, wa = composite_gauss(0.0, 0.5 * math.pi, spec.multi_panels(sum(lam)) * level, order)
    rho = np.cos(alpha)
    slice_hat = sphere_hat(n - k + 1, lam[0] * rho)
    wa = wa * np.sin(alpha) ** (k - 2) * rho ** (n - k) * slice_hat
    if k == 2:
        sig1, _ = _inner_spectrum(lam, [np.sin(alpha)])
        inner = _inner(n - 1, 1, sig1, None, spec)
        return 2.0 * float(wa @ inner), alpha.size
    # k == 3: azimuth by the midpoint rule on a quarter period (the inner
    # spectrum is even in both coordinates of u), spectrally accurate.
    m = order * spec.multi_panels(sum(lam[1:])) * level
    phi = (np.arange(m) + 0.5) * (0.5 * math.pi / m)
    wphi = 2.0 * math.pi / (4 * m)
    total = 0.0
    step = max(1, _BLOCK // m)
    for i in range(0, alpha.size, step):
        sa = np.sin(alpha[i : i + step])[:, None]
        u = [sa * np.cos(phi)[None, :], sa * np.sin(phi)[None, :]]
        sig1, sig2 = _inner_spectrum(lam, u)
        inner = _inner(n - 1, 2, sig1, sig2, spec)
        total += float(wa[i : i + step] @ inner.sum(axis=1))
    return 4.0 * wphi * total, alpha.size * m


def recursive_quadrature(n, k, spectrum, spec=DEFAULT_SPEC, phase="auto"):
    """Transform on ``St(n, k)``, ``k <= 3``, by integrating out the first column.

    The first column ``x1`` runs over ``S^{n-1}``; for each ``x1`` the other
    columns form a frame of ``x1^⊥``, whose transform is that of
    ``St(n-1, k-1)`` at the singular values of the remaining frequency
    columns projected onto ``x1^⊥``.  The base case ``k = 1`` is
    :func:`sphere_hat`; the inner ``k = 2`` level uses the ``n = 4`` closed
    form or the one-dimensional Bessel quadrature.

    ``phase="quadrature"`` integrates ``x1`` by a product rule over ``k``
    angles; ``phase="analytic"`` integrates its phase coordinate in closed
    form and is much cheaper for large frequencies.  ``"auto"`` picks the
    product rule for ``k <= 2`` and the analytic slice for ``k = 3``.
    """
    if not isinstance(spectrum, SingularSpectrum):
        spectrum = SingularSpectrum.from_values(spectrum, n)
    if spectrum.frame_k != k:
        raise DimensionError(f"spectrum has {spectrum.frame_k} values, expected k={k}")
    if k > 3:
        raise UnsupportedError("recursive quadrature is capped at k <= 3")
    if k < 1 or n < k + 1:
        raise DimensionError(f"recursive quadrature needs 1 <= k and n >= k + 1, got n={n}, k={k}")
    if phase not in ("auto", "quadrature", "analytic"):
        raise ValueError(f"unknown phase mode {phase!r}")
    lam = list(spectrum.values)
    mass = stiefel_mass(n, k)
    if k == 1:
        return FourierEstimate(
            sphere_hat(n, lam[0]), "recursive", mass, trunc_error=0.0, samples_or_nodes=1,
            trail=("recursive: base case k=1 (sphere transform)",),
        )
    mode = phase if phase != "auto" else ("quadrature" if k <= 2 else "analytic")
    rule = _recursive_full if mode == "quadrature" else _recursive_sliced

    value, err, nodes, diffs = _refine(lambda lv: rule(n, k, lam, lv, spec), spec, mass, "recursive_quadrature")
    return FourierEstimate(
        value,
        "recursive",
        mass,
        trunc_error=err,
        samples_or_nodes=nodes,
        trail=(f"recursive quadrature: n={n}, k={k}, first column by {mode} phase, {nodes} nodes",),
        details={"richardson": diffs, "phase": mode},
    )


def closed_form(n, spectrum):
    """Exact value where a closed form exists: ``k0 <= 1`` or ``(n, k) = (4, 2)``.

    Returns ``None`` when no closed form applies.
    """
    k = spectrum.frame_k
    lam = spectrum.values
    if k == 1:
        return sphere_hat(n, lam[0])
    if k == 2 and n == 4:
        return k2_closed_form_n4(lam[0], lam[1])
    return None


def exact_estimate(n, k, spectrum, spec=DEFAULT_SPEC):
    """Best deterministic evaluator for ``St(n, k)``, ``k <= 3``, at a full spectrum."""
    if not isinstance(spectrum, SingularSpectrum):
        spectrum = SingularSpectrum.from_values(spectrum, n)
    mass = stiefel_mass(n, k)
    value = closed_form(n, spectrum)
    if value is not None:
        return FourierEstimate(value, "closed-form", mass, trunc_error=0.0, trail=("closed form",))
    if k == 2:
        return k2_quadrature(n, *spectrum.values, spec)
    if k == 3:
        return recursive_quadrature(n, 3, spectrum, spec)
    raise UnsupportedError(f"no deterministic evaluator for k={k}")
