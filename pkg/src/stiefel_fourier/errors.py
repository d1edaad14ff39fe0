"""Exception hierarchy shared by all evaluators."""


class StiefelFourierError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(StiefelFourierError, ValueError):
    """Shapes do not agree or violate ``rows >= cols >= 1``."""


class DomainError(StiefelFourierError, ValueError):
    """An argument lies outside the domain of the function (negative radius, NaN, ...)."""


class RankError(StiefelFourierError, ValueError):
    """A matrix that must have full column rank does not."""


class SamplingError(StiefelFourierError, RuntimeError):
    """Random sampling kept producing degenerate draws."""


class PreconditionError(StiefelFourierError, ValueError):
    """An input violates a documented geometric precondition (e.g. tangency)."""


class AccuracyError(StiefelFourierError, ArithmeticError):
    """A numerical method could not reach its tolerance.

    The best available estimate is attached as ``best`` so callers can
    still inspect it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DegenerateDirectionError(StiefelFourierError, ValueError):
    """The frequency is degenerate (``λi ≈ λj`` or ``λi ≈ 0``) for the requested method.

    ``report`` carries the :class:`~stiefel_fourier.asymptotics.DegeneracyReport`
    when one was computed, ``pair`` the offending 1-based index pair if known.
    """

    def __init__(self, message, report=None, pair=None):
        super().__init__(message)
        self.report = report
        self.pair = pair


class UnsupportedError(StiefelFourierError, ValueError):
    """The request is valid mathematically but outside what an evaluator supports."""
