"""Exception hierarchy shared by the numerical modules."""

from __future__ import annotations


class FracSchrodError(Exception):
    """Base class for all library errors."""


class PoleError(FracSchrodError, ValueError):
    """A Gamma factor was evaluated on (or within 1e-12 of) one of its poles."""

    def __init__(self, message: str, location: complex | None = None, factor: int | None = None,
                 pole: str | None = None):
        super().__init__(message)
        self.location = location
        self.factor = factor
        self.pole = pole


class AccuracyError(FracSchrodError, ArithmeticError):
    """An internal error estimate exceeded the requested tolerance."""


class RegimeError(FracSchrodError, ValueError):
    """The hypotheses of the requested expansion or method do not hold.

    ``hypothesis`` names the violated condition so callers (and the CLI)
    can report it verbatim.
    """

    def __init__(self, message: str, hypothesis: str | None = None):
        super().__init__(message)
        self.hypothesis = hypothesis or message


class ContourError(RegimeError):
    """No vertical line separates the left and right pole families."""


class ConvergenceError(FracSchrodError, ArithmeticError):
    """A truncated series or tail bound failed to converge."""


class AllCoefficientsZero(FracSchrodError):
    """Every algebraic coefficient at infinity vanishes.

    Raised by the large-argument expansion when the H-function decays
    faster than any power; callers should switch to the exponential bound.
    """


class ValidityError(FracSchrodError, ValueError):
    """An exponent or parameter lies outside the range where an estimate holds."""


class NonContractionError(FracSchrodError, ArithmeticError):
    """Picard iteration distances failed to decrease."""

    def __init__(self, message: str, history: list[float] | None = None, suggested_T: float | None = None):
        super().__init__(message)
        self.history = history or []
        self.suggested_T = suggested_T
