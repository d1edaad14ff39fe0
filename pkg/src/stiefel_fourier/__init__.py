"""Fourier transform of the surface measure on the Stiefel manifold ``St(n, k)``.

``μ̂(Ξ) = ∫ exp(-2πi Tr(X^T Ξ)) dμ(X)`` depends on ``Ξ`` only through its
singular values.  The package evaluates it by Monte Carlo over Haar frames,
by Bessel closed forms and quadrature for ``k <= 3``, and by leading-order
stationary phase for large non-degenerate frequencies.
"""

from .asymptotics import (
    AutoConfig,
    CriticalContribution,
    DegeneracyReport,
    critical_contributions,
    degeneracy_report,
    evaluate_auto,
    reduce_zero_singulars,
    stationary_phase_kernel,
    stationary_phase_leading,
)
from .errors import (
    AccuracyError,
    DegenerateDirectionError,
    DimensionError,
    DomainError,
    PreconditionError,
    RankError,
    SamplingError,
    StiefelFourierError,
    UnsupportedError,
)
from .estimate import FourierEstimate
from .exact import (
    QuadratureSpec,
    exact_estimate,
    k2_closed_form_n4,
    k2_quadrature,
    random_walk_form,
    recursive_quadrature,
)
from .haar import mc_char_function, mc_fourier, mc_trace_moment, sample_orthogonal, sample_stiefel
from .linalg import SingularSpectrum, rect_diag, svd
from .special import bessel_j, sphere_hat, sphere_hat_leading, sphere_vol, stiefel_mass

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
