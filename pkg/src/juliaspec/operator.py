"""Finite truncations of the transition operator and Weyl-type defect bounds.

The operator acts on sequences by (Ωv)(n) = Σ_m s(n, m) v(m).  A size-N
truncation keeps the top-left N×N block of the transition matrix exactly as
it is: probability mass that leaves the window is *dropped, never
renormalized*, so the truncation stays honest about being a sub-stochastic
approximation.  Entries are exact rationals whenever the success sequence
is rational.

The Weyl construction pads a candidate eigenvector (computed from the
factor products) with zeros and measures the α-norm defect of (A - λI)
against it on a window of twice the head length; the defect is small
because the only rows that feel the cut touch columns 0 and q_n, with
coefficient masses that telescope into closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chain import ChainConfig
from .dynamics import FiberedSystem, eigvec_entry, factor_values
from .errors import (
    BudgetExceededError,
    DimensionMismatchError,
    OutOfRangeError,
)
from .sequences import ProductVerdict, product_verdict, tail_product

__all__ = [
    "SparseTruncation",
    "build_truncation",
    "weyl_vector",
    "WeylDefect",
    "weyl_defect",
    "truncated_eigenvalues",
    "eigenvalue_report",
    "write_matrix_csv",
]

# Dense eigensolves beyond this size are refused rather than left to crawl.
_EIG_SIZE_CAP = 4096


@dataclass(frozen=True)
class SparseTruncation:
    """Top-left size×size block of the transition matrix, row-compressed.

    rows[n] lists (column, value) pairs in increasing column order; values
    are Fractions when `exact`, floats otherwise.  outflow[n] is the mass of
    row n that fell outside the window (kept for inspection, never folded
    back into the surviving entries).
    """

    size: int
    rows: tuple[tuple[tuple[int, Fraction | float], ...], ...]
    outflow: tuple[Fraction | float, ...]
    exact: bool

    def entry(self, n: int, m: int):
        """Matrix entry at (row n, column m); 0 when absent."""
        self._check_index(n)
        self._check_index(m)
        for col, val in self.rows[n]:
            if col == m:
                return val
        return Fraction(0) if self.exact else 0.0

    def row_sum(self, n: int):
        """In-window mass of row n (1 - outflow[n] for a stochastic source row)."""
        self._check_index(n)
        return sum((val for _, val in self.rows[n]), Fraction(0) if self.exact else 0.0)

    def to_dense(self) -> np.ndarray:
        """Dense float64 matrix (exact entries are rounded once, here)."""
        a = np.zeros((self.size, self.size))
        for n, row in enumerate(self.rows):
            for col, val in row:
                a[n, col] = float(val)
        return a

    def apply(self, vec) -> np.ndarray:
        """Row action (A v)(n) = Σ_m A[n, m] v(m) in complex floats."""
        v = np.asarray(vec, dtype=complex)
        if v.shape != (self.size,):
            raise DimensionMismatchError(
                f"vector of shape {v.shape} does not match truncation size {self.size}"
            )
        out = np.zeros(self.size, dtype=complex)
        for n, row in enumerate(self.rows):
            acc = 0j
            for col, val in row:
                acc += float(val) * v[col]
            out[n] = acc
        return out

    def apply_dual(self, vec) -> np.ndarray:
        """Column action (u A)(m) = Σ_n u(n) A[n, m] in complex floats."""
        u = np.asarray(vec, dtype=complex)
        if u.shape != (self.size,):
            raise DimensionMismatchError(
                f"vector of shape {u.shape} does not match truncation size {self.size}"
            )
        out = np.zeros(self.size, dtype=complex)
        for n, row in enumerate(self.rows):
            if u[n] != 0:
                for col, val in row:
                    out[col] += u[n] * float(val)
        return out

    def _check_index(self, i: int):
        if not (0 <= i < self.size):
            raise OutOfRangeError(f"index {i} outside truncation of size {self.size}")


def build_truncation(cfg: ChainConfig, size: int) -> SparseTruncation:
    """Truncate the transition matrix to states {0, ..., size-1}."""
    if size < 1:
        raise OutOfRangeError(f"truncation size must be >= 1, got {size}")
    exact = cfg.p.is_rational()
    zero = Fraction(0) if exact else 0.0
    rows = []
    outflow = []
    for n in range(size):
        row = cfg.transition_row(n)
        kept = tuple((t, v) for t, v in row.entries if t < size)
        lost = sum((v for t, v in row.entries if t >= size), zero)
        rows.append(kept)
        outflow.append(lost)
    return SparseTruncation(size=size, rows=tuple(rows), outflow=tuple(outflow), exact=exact)


# -- Weyl defect vectors -----------------------------------------------------


def weyl_vector(sys: FiberedSystem, lam: complex, level: int, size: int) -> np.ndarray:
    """Candidate eigenvector head padded with zeros.

    Entries 0..q_level carry the factor-product values v_λ(m); entries above
    are zero.  `size` must be at least q_level + 1.
    """
    if level < 1:
        raise OutOfRangeError(f"level must be >= 1, got {level}")
    k = sys.base.place_value(level)
    if size < k + 1:
        raise OutOfRangeError(f"size {size} cannot hold a head of length {k + 1}")
    factors = factor_values(sys, lam, level + 1)
    w = np.zeros(size, dtype=complex)
    for m in range(k + 1):
        w[m] = eigvec_entry(sys, lam, m, factors)
    return w


@dataclass(frozen=True)
class WeylDefect:
    """Measured α-norm defect of the padded eigenvector, with its closed-form bound.

    defect = ‖(A - λI) w‖_α / ‖w‖_α on the size-2q_level truncation.  The
    rows of the defect vector that survive touch only columns 0 and q_level
    of the head; their coefficient masses telescope to

      coeff_col0 = Σ_{i>=level+1} (1-p_{i+1}) Π_{j<=i} p_j
      coeff_colk = |1 - p_1 - λ| + p_1 - Π_{j<=level+1} p_j

    and bound = (C (coeff_col0 |w_0|^α + coeff_colk |w_k|^α))^{1/α} / ‖w‖_α
    with C = (1 + |λ|)^{α-1}.  coeff_col0 also covers the rows beyond the
    window, so the bound applies to the full operator, not just the block.
    """

    lam: complex
    alpha: float
    level: int
    k: int
    size: int
    defect: float
    bound: float
    coeff_col0: float
    coeff_colk: float
    head_norm: float

    def to_json(self) -> dict:
        return {
            "lambda": [self.lam.real, self.lam.imag],
            "alpha": self.alpha,
            "level": self.level,
            "k": self.k,
            "size": self.size,
            "defect": self.defect,
            "bound": self.bound,
            "coeff-col0": self.coeff_col0,
            "coeff-colk": self.coeff_colk,
            "head-norm": self.head_norm,
        }


def column0_coefficient(cfg: ChainConfig, level: int):
    """Σ_{i>=level+1} (1-p_{i+1}) Π_{j<=i} p_j, by telescoping.

    Equals Π_{j<=level+1} p_j minus the limit of the success products; exact
    Fraction when the sequence is rational and the limit is exactly 0.
    """
    if level < 0:
        raise OutOfRangeError(f"level must be >= 0, got {level}")
    head = cfg.success_prefix(level + 1)
    verdict = product_verdict(cfg.p)
    if verdict is ProductVerdict.TENDS_TO_ZERO:
        return head
    if verdict is ProductVerdict.CONVERGES_POSITIVE:
        limit, _ = tail_product(cfg.p, None)
        return float(head) - float(limit)
    # Inconclusive fate: fall back to a long partial product as the limit.
    partial, _ = tail_product(cfg.p, 4096)
    return float(head) - float(partial)


def weyl_defect(
    cfg: ChainConfig, sys: FiberedSystem, lam: complex, level: int, alpha: float = 2.0
) -> WeylDefect:
    """Measure the α-norm defect at truncation size 2 q_level and bound it."""
    alpha = float(alpha)
    if alpha < 1:
        raise OutOfRangeError(f"alpha must be >= 1, got {alpha}")
    lam = complex(lam)
    k = cfg.base.place_value(level)
    size = 2 * k
    trunc = build_truncation(cfg, size)
    w = weyl_vector(sys, lam, level, size)
    u = trunc.apply(w) - lam * w
    norm_w = float(np.linalg.norm(w, ord=alpha))
    defect = float(np.linalg.norm(u, ord=alpha)) / norm_w

    c0 = float(column0_coefficient(cfg, level))
    ck = abs(1.0 - cfg.p_float(1) - lam) + cfg.p_float(1) - float(
        cfg.success_prefix(level + 1)
    )
    big_c = (1.0 + abs(lam)) ** (alpha - 1.0)
    bound = (
        big_c * (c0 * abs(w[0]) ** alpha + ck * abs(w[k]) ** alpha)
    ) ** (1.0 / alpha) / norm_w
    return WeylDefect(
        lam=lam,
        alpha=alpha,
        level=level,
        k=k,
        size=size,
        defect=defect,
        bound=bound,
        coeff_col0=c0,
        coeff_colk=ck,
        head_norm=norm_w,
    )


# -- eigenvalue clouds -------------------------------------------------------


def truncated_eigenvalues(cfg: ChainConfig, size: int) -> np.ndarray:
    """Eigenvalues of the size×size truncation, sorted by decreasing modulus."""
    if size > _EIG_SIZE_CAP:
        raise BudgetExceededError(
            f"dense eigensolve refused for size {size} > {_EIG_SIZE_CAP}"
        )
    a = build_truncation(cfg, size).to_dense()
    vals = np.linalg.eigvals(a)
    order = np.lexsort((vals.imag, vals.real, -np.abs(vals)))
    return vals[order]


def eigenvalue_report(
    cfg: ChainConfig, sys: FiberedSystem, size: int, budget: int = 60
) -> list[dict]:
    """Eigenvalues of the truncation tagged with their escape-test verdicts.

    The tags show how the finite spectra accumulate on the filled set: as
    the size grows, the fraction of eigenvalues certified to escape the
    filled set shrinks.
    """
    from .dynamics import escape_classify

    out = []
    for z in truncated_eigenvalues(cfg, size):
        lam = complex(z)
        o = escape_classify(sys, lam, budget)
        if o.escaped:
            verdict = "escaped"
        elif o.certified_bounded:
            verdict = "certified-bounded"
        else:
            verdict = "bounded-at-budget"
        out.append(
            {"re": lam.real, "im": lam.imag, "modulus": abs(lam), "verdict": verdict}
        )
    return out


def write_matrix_csv(trunc: SparseTruncation, fileobj) -> None:
    """Write the nonzero entries in row-major order.

    Exact truncations use the header row,col,num,den; float ones row,col,value.
    """
    if trunc.exact:
        fileobj.write("row,col,num,den\n")
        for n, row in enumerate(trunc.rows):
            for col, val in row:
                f = Fraction(val)
                fileobj.write(f"{n},{col},{f.numerator},{f.denominator}\n")
    else:
        fileobj.write("row,col,value\n")
        for n, row in enumerate(trunc.rows):
            for col, val in row:
                fileobj.write(f"{n},{col},{val!r}\n")
