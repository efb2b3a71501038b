"""The stochastic adding machine as a Markov chain on the nonnegative integers.

Incrementing n deterministically would zero the ζ_n - 1 maximal low digits and
then raise digit ζ_n by one.  The fallible counter attempts those ζ_n digit
writes in order, each succeeding independently with probability p_j; the first
failure aborts the procedure, leaving the earlier writes in place.  The result
is a Markov chain with transition probabilities

    s(n, n+1)            = p_1 ··· p_{ζ_n}
    s(n, n - (q_r - 1))  = (1 - p_{r+1}) · p_1 ··· p_r     (0 <= r < ζ_n)

(the r = 0 case is the self-loop with mass 1 - p_1; Σ_{j<=r} (d_j - 1) q_{j-1}
telescopes to q_r - 1).  Rows are exact rationals whenever the probability
spec is rational, and zero-probability entries are omitted.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import sqrt

import numpy as np

from .errors import IntegerOverflowError, NotIrreducibleError, OutOfRangeError
from .numeration import BaseSequence, DigitExpansion
from .sequences import ProductVerdict, SequenceSpec, irreducible, product_verdict

__all__ = [
    "ChainConfig",
    "TransitionRow",
    "Recurrence",
    "ReturnStatistics",
    "write_trajectory_csv",
]


class Recurrence(Enum):
    NULL_RECURRENT = "null-recurrent"
    TRANSIENT = "transient"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class TransitionRow:
    """One row of the transition matrix: sorted (target, probability) pairs."""

    source: int
    zeta: int
    entries: tuple[tuple[int, Fraction | float], ...]

    def as_dict(self) -> dict:
        return dict(self.entries)

    def probability_to(self, target: int):
        for m, s in self.entries:
            if m == target:
                return s
        return Fraction(0)

    def total(self):
        """Row sum (exactly 1 for exact rows)."""
        return sum(s for _, s in self.entries)


@dataclass(frozen=True)
class ReturnStatistics:
    """Monte Carlo summary of visits to state 0 within a horizon."""

    start: int
    trajectories: int
    horizon: int
    seed: int
    hits: int
    fraction: float
    ci_low: float
    ci_high: float


class ChainConfig:
    """Adding-machine chain over a base sequence d̄ with success spec p̄."""

    def __init__(self, base: BaseSequence, p: SequenceSpec):
        if p.codomain != "p":
            raise OutOfRangeError("ChainConfig needs a probability spec (codomain 'p')")
        self.base = base
        self.p = p
        self._pv = []  # exact values p_1, p_2, ...
        self._pf = []  # float mirrors, for sampling
        self._prefix = [Fraction(1)]  # ∏_{j<=r} p_j, exact

    # -- parameter access ---------------------------------------------------

    def p_at(self, j: int):
        """p_j, exact where the spec is rational."""
        if j < 1:
            raise OutOfRangeError(f"probability index must be >= 1, got {j}")
        while len(self._pv) < j:
            v = self.p.value_at(len(self._pv) + 1)
            self._pv.append(v)
            self._pf.append(float(v))
        return self._pv[j - 1]

    def p_float(self, j: int) -> float:
        self.p_at(j)
        return self._pf[j - 1]

    def success_prefix(self, r: int):
        """∏_{j<=r} p_j (empty product 1), exact where possible."""
        if r < 0:
            raise OutOfRangeError(f"prefix length must be >= 0, got {r}")
        while len(self._prefix) <= r:
            nxt = self._prefix[-1] * self.p_at(len(self._prefix))
            self._prefix.append(nxt)
        return self._prefix[r]

    # -- transition structure ----------------------------------------------

    def transition_row(self, n: int) -> TransitionRow:
        """Row n of the transition matrix, zero entries omitted."""
        zeta = self.base.counter(n)
        entries = []
        for r in range(zeta - 1, -1, -1):  # down-jumps and the self-loop, ascending targets
            mass = (1 - self.p_at(r + 1)) * self.success_prefix(r)
            if mass != 0:
                entries.append((n - (self.base.place_value(r) - 1), mass))
        up = self.success_prefix(zeta)
        if up != 0:
            succ = n + 1
            if succ > self.base.capacity:
                raise IntegerOverflowError(
                    f"successor of {n} exceeds {self.base.capacity_bits}-bit capacity"
                )
            entries.append((succ, up))
        return TransitionRow(source=n, zeta=zeta, entries=tuple(entries))

    # -- sampling -----------------------------------------------------------

    def step(self, n: int, rng: np.random.Generator) -> int:
        """One transition, drawn digit write by digit write.

        Attempt j succeeds when a fresh uniform is < p_j; the first failure
        after r successful writes aborts at n - (q_r - 1).
        """
        zeta = self.base.counter(n)
        for j in range(1, zeta + 1):
            if not rng.random() < self.p_float(j):
                return n - (self.base.place_value(j - 1) - 1)
        if n + 1 > self.base.capacity:
            raise IntegerOverflowError(
                f"successor of {n} exceeds {self.base.capacity_bits}-bit capacity"
            )
        return n + 1

    def simulate(self, start: int, steps: int, seed: int) -> list[int]:
        """Trajectory [X_0, ..., X_steps] from a seeded generator."""
        self.base._check_state(start, "start state")
        rng = np.random.default_rng(seed)
        traj = [start]
        n = start
        for _ in range(steps):
            n = self.step(n, rng)
            traj.append(n)
        return traj

    def return_statistics(
        self, start: int, trajectories: int, horizon: int, seed: int
    ) -> ReturnStatistics:
        """Fraction of independent trajectories that visit 0 within the horizon.

        Trajectory k draws its uniforms from the k-th spawned child of
        SeedSequence(seed), so each path is a pure function of (seed, k) and
        the result does not depend on scheduling or batch layout.  The engine
        advances all trajectories in lockstep using the first-failure inverse
        CDF (one uniform per step), which induces exactly the row law; the
        per-write sampler `step` is kept as the reference mechanism and the
        two are pinned together by a chi-square agreement test.
        """
        if trajectories < 1 or horizon < 0:
            raise OutOfRangeError("need trajectories >= 1 and horizon >= 0")
        self.base._check_state(start, "start state")
        hits = _count_hits_lockstep(self, start, trajectories, horizon, seed)
        frac = hits / trajectories
        lo, hi = _wilson_interval(hits, trajectories)
        return ReturnStatistics(
            start=start,
            trajectories=trajectories,
            horizon=horizon,
            seed=seed,
            hits=hits,
            fraction=frac,
            ci_low=lo,
            ci_high=hi,
        )

    # -- classification -----------------------------------------------------

    def classify_recurrence(self) -> Recurrence:
        """Null recurrent iff ∏ p_j = 0, transient iff ∏ p_j > 0.

        Requires irreducibility (p_j < 1 infinitely often); otherwise the
        dichotomy is void and NotIrreducibleError is raised.
        """
        if not irreducible(self.p):
            raise NotIrreducibleError("chain is not irreducible (p_j = 1 eventually)")
        verdict = product_verdict(self.p)
        if verdict is ProductVerdict.TENDS_TO_ZERO:
            return Recurrence.NULL_RECURRENT
        if verdict is ProductVerdict.CONVERGES_POSITIVE:
            return Recurrence.TRANSIENT
        return Recurrence.INCONCLUSIVE

    def harmonic_value(self, m: int):
        """Entry m >= 1 of the harmonic vector fixed by the chain off state 0.

        Piecewise constant on the blocks [q_l, q_{l+1}): equal to
        1 / (p_2 ··· p_{l+1}) there, with value 1 on [1, q_1).  In the
        transient regime this is (up to scale) the probability of never
        visiting 0.
        """
        if m < 1:
            raise OutOfRangeError(f"harmonic vector is indexed by m >= 1, got {m}")
        level = self.base.level_of(m)  # q_{level-1} <= m < q_level
        return 1 / self._harmonic_denominator(level)

    def _harmonic_denominator(self, level: int):
        den = Fraction(1) if self.p.is_rational() else 1.0
        for j in range(2, level + 1):
            den *= self.p_at(j)
        return den


def _wilson_interval(hits: int, n: int, z: float = 1.959963984540054):
    """Wilson 95% score interval for a binomial proportion."""
    phat = hits / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _count_hits_lockstep(
    cfg: ChainConfig, start: int, trajectories: int, horizon: int, seed: int
) -> int:
    """Vectorized count of trajectories visiting 0, per-trajectory substreams."""
    bound = start + horizon + 2  # states move up by at most 1 per step
    qs = [1]
    while qs[-1] <= bound:
        qs.append(qs[-1] * cfg.base.digit_base(len(qs)))
    jmax = len(qs) - 1
    qs = np.array(qs, dtype=np.int64)
    pref = np.array([float(cfg.success_prefix(r)) for r in range(jmax + 1)], dtype=float)

    children = np.random.SeedSequence(seed).spawn(trajectories)
    gens = [np.random.default_rng(c) for c in children]
    block = 512

    states = np.full(trajectories, start, dtype=np.int64)
    hit = states == 0
    uniforms = np.empty((trajectories, block))
    neg_pref = -pref[1:]  # ascending; searchsorted counts prefixes >= u

    for t in range(horizon):
        if t % block == 0:
            for k, g in enumerate(gens):
                uniforms[k] = g.random(block)
        u = uniforms[:, t % block]

        zeta = np.ones(trajectories, dtype=np.int64)
        mask = states % qs[1] == qs[1] - 1
        j = 1
        while mask.any():
            j += 1
            zeta[mask] = j
            mask &= states % qs[j] == qs[j] - 1

        advance = u <= pref[zeta]
        writes = np.searchsorted(neg_pref, -u, side="right")  # failures: successful writes
        states = np.where(advance, states + 1, states - (qs[writes] - 1))
        hit |= states == 0
        if hit.all():
            break
    return int(hit.sum())


def write_trajectory_csv(cfg: ChainConfig, trajectory, fileobj) -> None:
    """Write (step, state, zeta, digits) rows; digits little-endian, ';'-joined."""
    writer = csv.writer(fileobj)
    writer.writerow(["step", "state", "zeta", "digits"])
    for t, n in enumerate(trajectory):
        writer.writerow([t, n, cfg.base.counter(n), str(DigitExpansion.of_int(cfg.base, n))])
