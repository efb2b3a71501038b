"""Parameter sequences p̄ = (p_j) and d̄ = (d_j) with symbolic tail analysis.

A SequenceSpec describes an infinite sequence by a closed-form rule rather
than by a finite sample, so tail questions (does ∏ p_j vanish? does
Σ (1-p_j)^α diverge? is the sequence eventually ≥ some threshold?) can be
answered *analytically* per kind instead of being guessed from a prefix.
Numeric answers are exact `fractions.Fraction` values whenever the rule is
rational; only genuinely irrational quantities fall back to floats.

Kinds
-----
constant     value v                     (v ∈ (0,1] for p̄, integer ≥ 2 for d̄)
periodic     cyclic repetition of a finite tuple
geometric    p_j = 1 - c·γ^j  with 0 < γ < 1     (approaches 1 geometrically)
harmonic     p_j = 1 - c/(j+a)                    (approaches 1 harmonically)
prefix       finitely many explicit leading values, then another spec
random       i.i.d. values, a pure function of (seed, j):
             uniform on [low, high] ⊆ (0,1] for p̄, uniform on {2..max} for d̄

Indices are 1-based throughout: the first element of a sequence is j = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .errors import ConfigError, OutOfRangeError

__all__ = [
    "SequenceSpec",
    "ProductVerdict",
    "SumVerdict",
    "constant",
    "periodic",
    "geometric",
    "harmonic",
    "prefix_then",
    "random_uniform",
    "random_base",
    "product_verdict",
    "tail_product",
    "sum_alpha_verdict",
    "tail_sum_alpha",
    "monotone_increasing",
    "limit_is_one",
    "threshold_index",
    "limsup_below_one",
    "irreducible",
    "max_base",
    "spec_to_json",
    "spec_from_json",
]

_P_KINDS = ("constant", "periodic", "geometric", "harmonic", "prefix", "random")
_D_KINDS = ("constant", "periodic", "prefix", "random")

# Exact partial products/sums switch to floats beyond this horizon: rational
# partials of geometric specs acquire denominators like γ^(J(J+1)/2).
_EXACT_HORIZON_CAP = 512

# Scan cap for threshold_index on monotone kinds.
_SCAN_CAP = 100_000


def _rat(x) -> Fraction:
    """Coerce x to an exact Fraction; floats go through their decimal repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise OutOfRangeError(f"boolean is not a valid scalar: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise OutOfRangeError(f"cannot parse rational {x!r}") from exc
    raise OutOfRangeError(f"cannot coerce {type(x).__name__} to a rational")


class ProductVerdict(Enum):
    """Analytic fate of the infinite product ∏ p_j."""

    TENDS_TO_ZERO = "tends-to-zero"
    CONVERGES_POSITIVE = "converges-positive"
    INCONCLUSIVE = "inconclusive"


class SumVerdict(Enum):
    """Analytic fate of the series Σ (1-p_j)^α."""

    DIVERGES = "diverges"
    CONVERGES = "converges"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class SequenceSpec:
    """Closed-form description of one parameter sequence.

    Instances are immutable and hashable; construct them through the factory
    functions (`constant`, `periodic`, `geometric`, `harmonic`, `prefix_then`,
    `random_uniform`, `random_base`) which validate ranges eagerly.
    """

    codomain: str  # "p" (probabilities) or "d" (digit bases)
    kind: str
    value: Fraction | int | None = None
    values: tuple | None = None
    c: Fraction | None = None
    gamma: Fraction | None = None
    a: Fraction | None = None
    prefix: tuple | None = None
    tail: "SequenceSpec | None" = None
    low: Fraction | None = None
    high: Fraction | int | None = None
    seed: int | None = None
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.codomain not in ("p", "d"):
            raise ConfigError(f"unknown codomain {self.codomain!r}")
        allowed = _P_KINDS if self.codomain == "p" else _D_KINDS
        if self.kind not in allowed:
            raise ConfigError(
                f"kind {self.kind!r} is not admissible for codomain {self.codomain!r}"
            )

    # -- evaluation ---------------------------------------------------------

    def value_at(self, j: int):
        """Exact value of the sequence at 1-based index j.

        Returns a Fraction (p̄) or int (d̄) except for random probability
        specs, which return floats.  Raises OutOfRangeError for j < 1.
        """
        if not isinstance(j, int) or j < 1:
            raise OutOfRangeError(f"sequence index must be an integer >= 1, got {j!r}")
        k = self.kind
        if k == "constant":
            return self.value
        if k == "periodic":
            return self.values[(j - 1) % len(self.values)]
        if k == "geometric":
            return 1 - self.c * self.gamma**j
        if k == "harmonic":
            return 1 - self.c / (j + self.a)
        if k == "prefix":
            if j <= len(self.prefix):
                return self.prefix[j - 1]
            return self.tail.value_at(j - len(self.prefix))
        if k == "random":
            return self._draw(j)
        raise AssertionError(k)

    def float_at(self, j: int) -> float:
        """Value at index j as a float, avoiding huge exact intermediates."""
        if not isinstance(j, int) or j < 1:
            raise OutOfRangeError(f"sequence index must be an integer >= 1, got {j!r}")
        k = self.kind
        if k == "geometric":
            return 1.0 - float(self.c) * float(self.gamma) ** j
        if k == "harmonic":
            return 1.0 - float(self.c) / (j + float(self.a))
        if k == "prefix" and j > len(self.prefix):
            return self.tail.float_at(j - len(self.prefix))
        return float(self.value_at(j))

    def _draw(self, j: int):
        got = self._memo.get(j)
        if got is None:
            rng = np.random.default_rng([int(self.seed), int(j)])
            if self.codomain == "p":
                lo, hi = float(self.low), float(self.high)
                got = lo + (hi - lo) * float(rng.random())
            else:
                got = int(rng.integers(2, int(self.high) + 1))
            self._memo[j] = got
        return got

    def is_rational(self) -> bool:
        """True when value_at always returns exact rationals/integers."""
        if self.kind == "random":
            return self.codomain == "d"
        if self.kind == "prefix":
            return self.tail.is_rational()
        return True


# -- factories --------------------------------------------------------------


def _check_p(v: Fraction, what: str) -> Fraction:
    if not (0 < v <= 1):
        raise OutOfRangeError(f"{what} must lie in (0, 1], got {v}")
    return v


def _check_d(v, what: str) -> int:
    if isinstance(v, Fraction):
        if v.denominator != 1:
            raise OutOfRangeError(f"{what} must be an integer >= 2, got {v}")
        v = v.numerator
    if not isinstance(v, int) or v < 2:
        raise OutOfRangeError(f"{what} must be an integer >= 2, got {v!r}")
    return v


def constant(value, codomain: str = "p") -> SequenceSpec:
    """Constant sequence: probability in (0,1] or digit base >= 2."""
    if codomain == "p":
        return SequenceSpec("p", "constant", value=_check_p(_rat(value), "constant value"))
    return SequenceSpec("d", "constant", value=_check_d(value, "constant base"))


def periodic(values, codomain: str = "p") -> SequenceSpec:
    """Cyclic repetition of a nonempty finite tuple of values."""
    vals = tuple(values)
    if not vals:
        raise OutOfRangeError("periodic spec needs at least one value")
    if codomain == "p":
        vals = tuple(_check_p(_rat(v), "periodic value") for v in vals)
        return SequenceSpec("p", "periodic", values=vals)
    vals = tuple(_check_d(v, "periodic base") for v in vals)
    return SequenceSpec("d", "periodic", values=vals)


def geometric(c, gamma) -> SequenceSpec:
    """p_j = 1 - c·γ^j, approaching 1 geometrically; requires 0 < c·γ < 1."""
    c, gamma = _rat(c), _rat(gamma)
    if not (0 < gamma < 1):
        raise OutOfRangeError(f"geometric ratio must lie in (0, 1), got {gamma}")
    if c <= 0 or c * gamma >= 1:
        raise OutOfRangeError(f"geometric scale must satisfy 0 < c·γ < 1, got c={c}")
    return SequenceSpec("p", "geometric", c=c, gamma=gamma)


def harmonic(c, a) -> SequenceSpec:
    """p_j = 1 - c/(j+a), approaching 1 harmonically; requires 0 < c < 1 + a."""
    c, a = _rat(c), _rat(a)
    if a <= 0:
        raise OutOfRangeError(f"harmonic offset must be positive, got {a}")
    if not (0 < c < 1 + a):
        raise OutOfRangeError(f"harmonic scale must satisfy 0 < c < 1 + a, got {c}")
    return SequenceSpec("p", "harmonic", c=c, a=a)


def prefix_then(prefix, tail: SequenceSpec) -> SequenceSpec:
    """Finitely many explicit leading values, then `tail` (re-indexed from 1)."""
    if tail.kind == "prefix":
        # Flatten so tail analysis never recurses through nested prefixes.
        prefix = tuple(prefix) + tail.prefix
        tail = tail.tail
    if tail.codomain == "p":
        vals = tuple(_check_p(_rat(v), "prefix value") for v in prefix)
    else:
        vals = tuple(_check_d(v, "prefix base") for v in prefix)
    if not vals:
        return tail
    return SequenceSpec(tail.codomain, "prefix", prefix=vals, tail=tail)


def random_uniform(low, high, seed: int) -> SequenceSpec:
    """i.i.d. probabilities, uniform on [low, high] ⊆ (0, 1], seeded."""
    low, high = _rat(low), _rat(high)
    _check_p(low, "random low")
    _check_p(high, "random high")
    if low > high:
        raise OutOfRangeError(f"random bounds must satisfy low <= high, got {low} > {high}")
    return SequenceSpec("p", "random", low=low, high=high, seed=int(seed))


def random_base(d_max: int, seed: int) -> SequenceSpec:
    """i.i.d. digit bases, uniform on {2, ..., d_max}, seeded."""
    return SequenceSpec("d", "random", high=_check_d(d_max, "random base max"), seed=int(seed))


# -- tail analysis ----------------------------------------------------------


def product_verdict(spec: SequenceSpec) -> ProductVerdict:
    """Fate of ∏ p_j, provable from the spec kind alone.

    TENDS_TO_ZERO  iff Σ (1-p_j) provably diverges,
    CONVERGES_POSITIVE iff it provably converges,
    INCONCLUSIVE for non-degenerate random specs straddling 1.
    """
    _need_p(spec)
    k = spec.kind
    if k == "constant":
        return ProductVerdict.CONVERGES_POSITIVE if spec.value == 1 else ProductVerdict.TENDS_TO_ZERO
    if k == "periodic":
        return (
            ProductVerdict.CONVERGES_POSITIVE
            if all(v == 1 for v in spec.values)
            else ProductVerdict.TENDS_TO_ZERO
        )
    if k == "geometric":
        return ProductVerdict.CONVERGES_POSITIVE
    if k == "harmonic":
        return ProductVerdict.TENDS_TO_ZERO
    if k == "prefix":
        return product_verdict(spec.tail)
    # random
    if spec.high < 1:
        return ProductVerdict.TENDS_TO_ZERO
    if spec.low == spec.high == 1:
        return ProductVerdict.CONVERGES_POSITIVE
    return ProductVerdict.INCONCLUSIVE


def tail_product(spec: SequenceSpec, horizon: int | None = None):
    """Partial or limiting product of p_j.

    With an integer horizon J, returns (∏_{j<=J} p_j, verdict); the partial
    is exact when the spec is rational and J is moderate.  With horizon=None,
    returns the limit: exactly 0 when the product provably vanishes, a float
    when it provably converges to a positive value; raises ConfigError when
    the fate is inconclusive.
    """
    _need_p(spec)
    verdict = product_verdict(spec)
    if horizon is not None:
        if horizon < 0:
            raise OutOfRangeError(f"horizon must be >= 0, got {horizon}")
        if spec.is_rational() and horizon <= _EXACT_HORIZON_CAP:
            part = Fraction(1)
            for j in range(1, horizon + 1):
                part *= spec.value_at(j)
        else:
            part = 1.0
            for j in range(1, horizon + 1):
                part *= spec.float_at(j)
        return part, verdict
    if verdict is ProductVerdict.TENDS_TO_ZERO:
        return Fraction(0), verdict
    if verdict is ProductVerdict.CONVERGES_POSITIVE:
        part = 1.0
        j = 1
        while j <= _SCAN_CAP:
            q = spec.float_at(j)
            part *= q
            if 1.0 - q < 1e-17:
                break
            j += 1
        return part, verdict
    raise ConfigError("product limit is inconclusive for this spec; pass a finite horizon")


def sum_alpha_verdict(spec: SequenceSpec, alpha) -> SumVerdict:
    """Fate of Σ (1-p_j)^α for α >= 1, provable from the spec kind alone."""
    _need_p(spec)
    alpha = float(alpha)
    if alpha < 1:
        raise OutOfRangeError(f"alpha must be >= 1, got {alpha}")
    k = spec.kind
    if k == "constant":
        return SumVerdict.CONVERGES if spec.value == 1 else SumVerdict.DIVERGES
    if k == "periodic":
        return SumVerdict.CONVERGES if all(v == 1 for v in spec.values) else SumVerdict.DIVERGES
    if k == "geometric":
        return SumVerdict.CONVERGES
    if k == "harmonic":
        return SumVerdict.CONVERGES if alpha > 1 else SumVerdict.DIVERGES
    if k == "prefix":
        return sum_alpha_verdict(spec.tail, alpha)
    if spec.high < 1:
        return SumVerdict.DIVERGES
    if spec.low == spec.high == 1:
        return SumVerdict.CONVERGES
    return SumVerdict.INCONCLUSIVE


def tail_sum_alpha(spec: SequenceSpec, alpha, horizon: int | None = None):
    """Partial or limiting value of Σ (1-p_j)^α.

    Finite horizon: partial sum, exact for rational specs with integral α.
    horizon=None: closed-form limit where one exists (geometric series,
    Hurwitz zeta for harmonic tails with α > 1), +inf when the series
    provably diverges; ConfigError when inconclusive.
    """
    _need_p(spec)
    verdict = sum_alpha_verdict(spec, alpha)
    a_int = int(alpha) if float(alpha) == int(alpha) else None
    if horizon is not None:
        if horizon < 0:
            raise OutOfRangeError(f"horizon must be >= 0, got {horizon}")
        exact = spec.is_rational() and a_int is not None and horizon <= _EXACT_HORIZON_CAP
        if exact:
            part = Fraction(0)
            for j in range(1, horizon + 1):
                part += (1 - spec.value_at(j)) ** a_int
        else:
            part = 0.0
            for j in range(1, horizon + 1):
                part += (1.0 - spec.float_at(j)) ** float(alpha)
        return part, verdict
    if verdict is SumVerdict.DIVERGES:
        return float("inf"), verdict
    if verdict is SumVerdict.CONVERGES:
        return _sum_alpha_limit(spec, alpha, a_int), verdict
    raise ConfigError("series limit is inconclusive for this spec; pass a finite horizon")


def _sum_alpha_limit(spec: SequenceSpec, alpha, a_int):
    k = spec.kind
    if k in ("constant", "periodic", "random"):
        # Only the degenerate all-ones cases converge: the sum is 0.
        return Fraction(0) if spec.is_rational() else 0.0
    if k == "geometric":
        # Σ_j (c γ^j)^α = c^α γ^α / (1 - γ^α)
        if a_int is not None:
            g = spec.gamma**a_int
            return spec.c**a_int * g / (1 - g)
        g = float(spec.gamma) ** float(alpha)
        return float(spec.c) ** float(alpha) * g / (1.0 - g)
    if k == "harmonic":
        from scipy.special import zeta as hurwitz_zeta

        # Σ_j (c/(j+a))^α = c^α · ζ(α, 1+a)
        return float(spec.c) ** float(alpha) * float(
            hurwitz_zeta(float(alpha), 1.0 + float(spec.a))
        )
    if k == "prefix":
        head = sum((1 - _rat(v)) ** (a_int or 1) for v in spec.prefix) if a_int else None
        tail_val = _sum_alpha_limit(spec.tail, alpha, a_int)
        if head is not None and isinstance(tail_val, Fraction):
            return head + tail_val
        part = sum((1.0 - float(v)) ** float(alpha) for v in spec.prefix)
        return part + float(tail_val)
    raise AssertionError(k)


def monotone_increasing(spec: SequenceSpec) -> bool:
    """Certificate that p_j is monotone increasing (geometric/harmonic kinds)."""
    _need_p(spec)
    return spec.kind in ("geometric", "harmonic")


def limit_is_one(spec: SequenceSpec) -> bool:
    """Certificate that p_j -> 1 (False means: provably does not tend to 1)."""
    _need_p(spec)
    k = spec.kind
    if k == "constant":
        return spec.value == 1
    if k == "periodic":
        return all(v == 1 for v in spec.values)
    if k in ("geometric", "harmonic"):
        return True
    if k == "prefix":
        return limit_is_one(spec.tail)
    # i.i.d. sequences converge only when degenerate
    return spec.low == spec.high == 1


def threshold_index(spec: SequenceSpec, threshold: float) -> int | None:
    """Smallest certified j0 with p_j >= threshold for every j >= j0, or None."""
    _need_p(spec)
    thr = float(threshold)
    k = spec.kind
    if k == "constant":
        return 1 if float(spec.value) >= thr else None
    if k == "periodic":
        return 1 if min(float(v) for v in spec.values) >= thr else None
    if k in ("geometric", "harmonic"):
        for j in range(1, _SCAN_CAP + 1):
            if spec.float_at(j) >= thr:
                return j  # monotone increasing: all later indices qualify
        return None
    if k == "prefix":
        t = threshold_index(spec.tail, thr)
        if t is None:
            return None
        if t > 1:
            return len(spec.prefix) + t
        j0 = len(spec.prefix) + 1
        while j0 > 1 and float(spec.prefix[j0 - 2]) >= thr:
            j0 -= 1
        return j0
    return 1 if float(spec.low) >= thr else None


def limsup_below_one(spec: SequenceSpec) -> bool:
    """Certificate that limsup p_j < 1."""
    _need_p(spec)
    k = spec.kind
    if k == "constant":
        return spec.value < 1
    if k == "periodic":
        return max(spec.values) < 1
    if k in ("geometric", "harmonic"):
        return False
    if k == "prefix":
        return limsup_below_one(spec.tail)
    return spec.high < 1


def irreducible(spec: SequenceSpec) -> bool:
    """Certificate that p_j < 1 infinitely often (chain irreducibility)."""
    _need_p(spec)
    k = spec.kind
    if k == "constant":
        return spec.value < 1
    if k == "periodic":
        return any(v < 1 for v in spec.values)
    if k in ("geometric", "harmonic"):
        return True
    if k == "prefix":
        return irreducible(spec.tail)
    return not (spec.low == spec.high == 1)


def max_base(spec: SequenceSpec) -> int:
    """Upper bound for a digit-base sequence (every d̄ kind is bounded)."""
    if spec.codomain != "d":
        raise ConfigError("max_base applies to base sequences only")
    k = spec.kind
    if k == "constant":
        return int(spec.value)
    if k == "periodic":
        return max(int(v) for v in spec.values)
    if k == "prefix":
        return max(max(int(v) for v in spec.prefix), max_base(spec.tail))
    return int(spec.high)


def _need_p(spec: SequenceSpec):
    if spec.codomain != "p":
        raise ConfigError("this analysis applies to probability sequences only")


# -- JSON (de)serialization -------------------------------------------------


def _num_to_json(v):
    if isinstance(v, Fraction):
        return str(v)
    return v


def spec_to_json(spec: SequenceSpec) -> dict:
    """JSON-serializable description; rationals encoded as strings like "3/4"."""
    k = spec.kind
    if k == "constant":
        return {"kind": k, "value": _num_to_json(spec.value)}
    if k == "periodic":
        return {"kind": k, "values": [_num_to_json(v) for v in spec.values]}
    if k == "geometric":
        return {"kind": k, "c": _num_to_json(spec.c), "gamma": _num_to_json(spec.gamma)}
    if k == "harmonic":
        return {"kind": k, "c": _num_to_json(spec.c), "a": _num_to_json(spec.a)}
    if k == "prefix":
        return {
            "kind": k,
            "prefix": [_num_to_json(v) for v in spec.prefix],
            "tail": spec_to_json(spec.tail),
        }
    if spec.codomain == "p":
        return {
            "kind": "random",
            "low": _num_to_json(spec.low),
            "high": _num_to_json(spec.high),
            "seed": spec.seed,
        }
    return {"kind": "random", "max": int(spec.high), "seed": spec.seed}


def spec_from_json(obj, codomain: str) -> SequenceSpec:
    """Parse one sequence description; raises ConfigError on any defect."""
    if not isinstance(obj, dict):
        raise ConfigError(f"sequence spec must be an object, got {type(obj).__name__}")
    kind = obj.get("kind")
    try:
        if kind == "constant":
            return constant(obj["value"], codomain)
        if kind == "periodic":
            return periodic(obj["values"], codomain)
        if kind == "geometric":
            if codomain != "p":
                raise ConfigError("geometric kind is only valid for p")
            return geometric(obj["c"], obj["gamma"])
        if kind == "harmonic":
            if codomain != "p":
                raise ConfigError("harmonic kind is only valid for p")
            return harmonic(obj["c"], obj["a"])
        if kind == "prefix":
            return prefix_then(obj["prefix"], spec_from_json(obj["tail"], codomain))
        if kind == "random":
            if codomain == "p":
                return random_uniform(obj["low"], obj["high"], obj["seed"])
            return random_base(obj["max"], obj["seed"])
    except ConfigError:
        raise
    except KeyError as exc:
        raise ConfigError(f"sequence spec kind {kind!r} is missing field {exc}") from exc
    except (OutOfRangeError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid sequence spec: {exc}") from exc
    raise ConfigError(f"unknown sequence kind {kind!r}")
