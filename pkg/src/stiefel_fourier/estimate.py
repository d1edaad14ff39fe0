"""The value-plus-error record returned by every evaluator."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

METHODS = ("monte-carlo", "quadrature", "recursive", "stationary-phase", "closed-form")


@dataclass(frozen=True)
class FourierEstimate:
    """A real value of the transform with either a statistical or a truncation error.

    Monte Carlo estimates carry ``std_error``; deterministic methods carry
    ``trunc_error``.  ``total_mass`` is the mass of the measure the value
    refers to, so ``value / total_mass`` is the probability-normalized
    transform.
    """

    value: float
    method: str
    total_mass: float
    std_error: float | None = None
    trunc_error: float | None = None
    samples_or_nodes: int = 0
    trail: tuple = ()
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")
        if (self.std_error is None) == (self.trunc_error is None):
            raise ValueError("exactly one of std_error / trunc_error must be set")
        err = self.error
        if not err >= 0:
            raise ValueError(f"error estimate must be nonnegative, got {err}")

    @property
    def error(self):
        return self.std_error if self.std_error is not None else self.trunc_error

    @property
    def is_statistical(self):
        return self.std_error is not None

    def scaled(self, factor, note=None):
        """Multiply value, error and mass by ``factor > 0`` (used for zero-column reductions)."""
        kw = dict(value=self.value * factor, total_mass=self.total_mass * factor)
        if self.std_error is not None:
            kw["std_error"] = self.std_error * factor
        else:
            kw["trunc_error"] = self.trunc_error * factor
        if note:
            kw["trail"] = self.trail + (note,)
        return replace(self, **kw)

    def normalized(self):
        """The same estimate for the Haar probability measure."""
        f = 1.0 / self.total_mass
        out = self.scaled(f)
        return replace(out, total_mass=1.0)

    def with_trail(self, *notes):
        return replace(self, trail=tuple(notes) + self.trail)

    def to_dict(self):
        return {
            "value": self.value,
            "method": self.method,
            "std_error": self.std_error,
            "trunc_error": self.trunc_error,
            "samples_or_nodes": self.samples_or_nodes,
            "total_mass": self.total_mass,
            "trail": list(self.trail),
        }
