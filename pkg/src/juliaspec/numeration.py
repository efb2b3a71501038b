"""Cantor (mixed-radix) numeration: place values, digit expansions, counters.

A base sequence d̄ = (d_0, d_1, d_2, ...) with d_0 = 1 and d_j >= 2 defines
place values q_j = d_0·d_1···d_j and a unique expansion of every n >= 0,

    n = Σ_{j>=1} a_j(n) · q_{j-1},      0 <= a_j(n) <= d_j - 1,

stored little-endian (lowest position first).  Two derived indices drive the
adding machine: the counter ζ_n (first position whose digit is below its
maximum — the number of digit writes an increment performs) and the lowest
nonzero position ξ_m of m >= 1.  They are linked by ξ_{m+1} = ζ_m.

All state arithmetic is exact integer arithmetic; exceeding the configured
capacity raises instead of wrapping.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from .errors import (
    DigitOutOfRangeError,
    IntegerOverflowError,
    OutOfRangeError,
    UndefinedForZeroError,
)
from .sequences import SequenceSpec, constant

__all__ = ["BaseSequence", "DigitExpansion"]


class BaseSequence:
    """Handle for one base sequence d̄ with memoized place values.

    The memo of place values q_j is append-only and guarded by a lock, so a
    single instance may serve concurrent readers.
    """

    def __init__(self, spec: SequenceSpec | int, capacity_bits: int = 64):
        if isinstance(spec, int):
            spec = constant(spec, "d")
        if spec.codomain != "d":
            raise OutOfRangeError("BaseSequence needs a base-sequence spec (codomain 'd')")
        if capacity_bits < 64:
            raise OutOfRangeError(f"capacity must be at least 64 bits, got {capacity_bits}")
        self.spec = spec
        self.capacity_bits = capacity_bits
        self.capacity = (1 << capacity_bits) - 1
        self._q = [1]  # q_0 = d_0 = 1
        self._lock = threading.Lock()

    def __repr__(self):
        return f"BaseSequence({self.spec!r}, capacity_bits={self.capacity_bits})"

    def __eq__(self, other):
        return (
            isinstance(other, BaseSequence)
            and self.spec == other.spec
            and self.capacity_bits == other.capacity_bits
        )

    def __hash__(self):
        return hash((self.spec, self.capacity_bits))

    def digit_base(self, j: int) -> int:
        """d_j for j >= 1 (d_0 = 1 is implicit and never queried)."""
        return int(self.spec.value_at(j))

    def place_value(self, j: int) -> int:
        """q_j = d_0·d_1···d_j, exact; raises on capacity overflow."""
        if j < 0:
            raise OutOfRangeError(f"place index must be >= 0, got {j}")
        if j >= len(self._q):
            with self._lock:
                while j >= len(self._q):
                    nxt = self._q[-1] * self.digit_base(len(self._q))
                    if nxt > self.capacity:
                        raise IntegerOverflowError(
                            f"place value q_{len(self._q)} exceeds {self.capacity_bits}-bit capacity"
                        )
                    self._q.append(nxt)
        return self._q[j]

    def _check_state(self, n: int, what: str = "state") -> int:
        if not isinstance(n, int):
            raise OutOfRangeError(f"{what} must be an integer, got {type(n).__name__}")
        if n < 0:
            raise OutOfRangeError(f"{what} must be >= 0, got {n}")
        if n > self.capacity:
            raise IntegerOverflowError(f"{what} {n} exceeds {self.capacity_bits}-bit capacity")
        return n

    def to_digits(self, n: int) -> tuple[int, ...]:
        """Little-endian digits (a_1, ..., a_L) of n, trailing zeros trimmed."""
        n = self._check_state(n)
        digits = []
        j = 1
        while n > 0:
            n, a = divmod(n, self.digit_base(j))
            digits.append(a)
            j += 1
        return tuple(digits)

    def from_digits(self, digits) -> int:
        """Exact value Σ a_j q_{j-1}; validates every digit against its base."""
        n = 0
        for j, a in enumerate(digits, start=1):
            d = self.digit_base(j)
            if not isinstance(a, int) or not 0 <= a < d:
                raise DigitOutOfRangeError(f"digit a_{j}={a!r} outside [0, {d - 1}]")
            if a:
                n += a * self.place_value(j - 1)
        return self._check_state(n, "value")

    def counter(self, n: int) -> int:
        """ζ_n: the first position j >= 1 with a_j(n) != d_j - 1.

        Equals the number of digit writes the deterministic increment n -> n+1
        performs (positions 1..ζ−1 reset to zero, position ζ incremented).
        """
        n = self._check_state(n)
        j = 1
        while True:
            d = self.digit_base(j)
            n, a = divmod(n, d)
            if a != d - 1:
                return j
            j += 1

    def first_nonzero(self, m: int) -> int:
        """ξ_m: the lowest position with a nonzero digit (m >= 1)."""
        m = self._check_state(m)
        if m == 0:
            raise UndefinedForZeroError("lowest nonzero digit is undefined for 0")
        j = 1
        while True:
            m, a = divmod(m, self.digit_base(j))
            if a != 0:
                return j
            j += 1

    def level_of(self, n: int) -> int:
        """Smallest L >= 0 with n < q_L (the number of digits of n)."""
        n = self._check_state(n)
        level = 0
        while n >= self.place_value(level):
            level += 1
        return level


@dataclass(frozen=True)
class DigitExpansion:
    """A validated little-endian digit vector bound to its base sequence."""

    base: BaseSequence
    digits: tuple[int, ...]

    def __post_init__(self):
        for j, a in enumerate(self.digits, start=1):
            d = self.base.digit_base(j)
            if not isinstance(a, int) or not 0 <= a < d:
                raise DigitOutOfRangeError(f"digit a_{j}={a!r} outside [0, {d - 1}]")

    @classmethod
    def of_int(cls, base: BaseSequence, n: int) -> "DigitExpansion":
        return cls(base, base.to_digits(n))

    @property
    def value(self) -> int:
        """The represented integer, recovered exactly."""
        return self.base.from_digits(self.digits)

    def __str__(self):
        return ";".join(str(a) for a in self.digits)
