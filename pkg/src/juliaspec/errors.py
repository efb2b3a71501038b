"""Exception types shared across the package.

Every error raised deliberately by this library derives from JuliaspecError,
so callers can catch one base class.  The CLI maps subclasses onto exit codes
(config -> 2, budget/overflow -> 3, invariant failure -> 4).
"""

from __future__ import annotations

__all__ = [
    "JuliaspecError",
    "ConfigError",
    "IntegerOverflowError",
    "DigitOutOfRangeError",
    "UndefinedForZeroError",
    "OutOfRangeError",
    "NotIrreducibleError",
    "BudgetExceededError",
    "DimensionMismatchError",
    "DivisionByZeroIotaError",
    "OriginEscapedError",
    "VerificationError",
]


class JuliaspecError(Exception):
    """Base class for all deliberate errors raised by this package."""


class ConfigError(JuliaspecError):
    """A run configuration (JSON document or CLI flags) is invalid."""


class IntegerOverflowError(JuliaspecError):
    """A state or place value exceeded the configured integer capacity."""


class DigitOutOfRangeError(JuliaspecError):
    """A digit lies outside [0, d_j - 1] for its position."""


class UndefinedForZeroError(JuliaspecError):
    """The requested quantity is undefined at zero (e.g. lowest nonzero digit)."""


class OutOfRangeError(JuliaspecError):
    """A scalar parameter lies outside its admissible range."""


class NotIrreducibleError(JuliaspecError):
    """The chain is not irreducible, so the requested classification is void."""


class BudgetExceededError(JuliaspecError):
    """An iteration or size budget was exceeded before a certificate was found."""


class DimensionMismatchError(JuliaspecError):
    """Vector length does not match the truncation size."""


class DivisionByZeroIotaError(JuliaspecError):
    """A dual eigenvector entry requires dividing by a vanishing factor."""


class OriginEscapedError(JuliaspecError):
    """The pixel containing the origin is classified as escaped."""


class VerificationError(JuliaspecError):
    """An internal invariant check failed."""
