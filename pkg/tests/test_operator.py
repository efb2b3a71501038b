"""Finite truncations: exact sub-stochastic blocks, Weyl defects, eigenvalue clouds.

The load-bearing oracles: in-window mass plus outflow reproduces each
stochastic row exactly; the padded eigenvector annihilates every row whose
support fits in the head; the column-0 coefficient telescopes to a closed
form that a brute-force series sum must reproduce.
"""

import io
import json
from fractions import Fraction

import numpy as np
import pytest

from juliaspec.chain import ChainConfig
from juliaspec.dynamics import FiberedSystem, eigvec_entry
from juliaspec.errors import (
    BudgetExceededError,
    DimensionMismatchError,
    OutOfRangeError,
)
from juliaspec.numeration import BaseSequence
from juliaspec.operator import (
    build_truncation,
    column0_coefficient,
    eigenvalue_report,
    truncated_eigenvalues,
    weyl_defect,
    weyl_vector,
    write_matrix_csv,
)
from juliaspec.sequences import random_uniform


# -- truncation block --------------------------------------------------------


def test_rows_plus_outflow_restore_stochasticity(chains):
    for name, cfg in chains.items():
        tr = build_truncation(cfg, 40)
        assert tr.exact
        for n in range(40):
            assert tr.row_sum(n) + tr.outflow[n] == 1, (name, n)
            cols = [c for c, _ in tr.rows[n]]
            assert cols == sorted(set(cols))


def test_entries_match_transition_rows(chains):
    cfg = chains["mixed23-harmonic"]
    tr = build_truncation(cfg, 30)
    for n in range(30):
        row = cfg.transition_row(n)
        for m in range(30):
            assert tr.entry(n, m) == row.probability_to(m)
    assert tr.entry(5, 20) == Fraction(0)
    with pytest.raises(OutOfRangeError):
        tr.entry(30, 0)
    with pytest.raises(OutOfRangeError):
        tr.entry(0, -1)
    with pytest.raises(OutOfRangeError):
        build_truncation(cfg, 0)


def test_float_truncation_for_irrational_specs():
    cfg = ChainConfig(BaseSequence(2), random_uniform("1/2", "3/4", 7))
    tr = build_truncation(cfg, 12)
    assert not tr.exact
    for n in range(12):
        assert isinstance(tr.row_sum(n), float)
        assert tr.row_sum(n) + tr.outflow[n] == pytest.approx(1.0, abs=1e-12)


def test_dense_and_actions_agree(chains):
    cfg = chains["binary-geometric"]
    tr = build_truncation(cfg, 24)
    a = tr.to_dense()
    assert a.shape == (24, 24)
    rng = np.random.default_rng(3)
    v = rng.standard_normal(24) + 1j * rng.standard_normal(24)
    u = rng.standard_normal(24) + 1j * rng.standard_normal(24)
    np.testing.assert_allclose(tr.apply(v), a @ v, rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(tr.apply_dual(u), u @ a, rtol=1e-13, atol=1e-13)
    # Row and column actions are adjoint with respect to the bilinear pairing.
    assert np.dot(u, tr.apply(v)) == pytest.approx(np.dot(tr.apply_dual(u), v))
    with pytest.raises(DimensionMismatchError):
        tr.apply(np.ones(25))
    with pytest.raises(DimensionMismatchError):
        tr.apply_dual(np.ones(23))


# -- column pattern beyond the head ------------------------------------------


def test_rows_past_head_touch_only_columns_zero_and_q(chains):
    # A row at i >= q_n can reach a column <= q_n only by zeroing a full
    # prefix: the landing spots are exactly 0 and q_n.
    for name, cfg in chains.items():
        for level in (1, 2):
            q = cfg.base.place_value(level)
            tr = build_truncation(cfg, 2 * q)
            for i in range(q, 2 * q):
                low = {c for c, _ in tr.rows[i] if c <= q}
                assert low <= {0, q}, (name, level, i, low)


# -- Weyl vectors and defects ------------------------------------------------


def test_weyl_vector_head_and_padding(systems):
    sys = systems["binary-p34"]
    lam = 0.3 + 0.2j
    k = sys.base.place_value(3)
    w = weyl_vector(sys, lam, 3, 2 * k)
    assert w.shape == (2 * k,)
    for m in range(k + 1):
        assert w[m] == eigvec_entry(sys, lam, m)
    assert np.all(w[k + 1 :] == 0)
    with pytest.raises(OutOfRangeError):
        weyl_vector(sys, lam, 3, k)  # cannot hold entries 0..k
    with pytest.raises(OutOfRangeError):
        weyl_vector(sys, lam, 0, 64)


def test_weyl_defect_matches_dense_recomputation(chains, systems):
    cfg, sys = chains["binary-p34"], systems["binary-p34"]
    lam = 0.3 + 0.2j
    for alpha in (1.0, 2.0):
        d = weyl_defect(cfg, sys, lam, level=3, alpha=alpha)
        assert d.k == 8 and d.size == 16
        a = build_truncation(cfg, 16).to_dense()
        w = weyl_vector(sys, lam, 3, 16)
        u = a @ w - lam * w
        want = np.linalg.norm(u, ord=alpha) / np.linalg.norm(w, ord=alpha)
        assert d.defect == pytest.approx(want, rel=1e-12)
        assert d.head_norm == pytest.approx(np.linalg.norm(w, ord=alpha), rel=1e-12)
        json.dumps(d.to_json())


def test_weyl_rows_inside_head_are_annihilated(chains, systems):
    # (A - lambda I) w vanishes on every row n < q_level: those rows read
    # only head columns, where w satisfies the eigen identity exactly.
    cases = [("dendrite", 0.3), ("binary-p34", 0.3 + 0.2j), ("mixed23-harmonic", 0.1)]
    for name, lam in cases:
        cfg, sys = chains[name], systems[name]
        k = cfg.base.place_value(3)
        tr = build_truncation(cfg, 2 * k)
        w = weyl_vector(sys, lam, 3, 2 * k)
        u = tr.apply(w) - lam * w
        assert np.max(np.abs(u[:k])) < 1e-10, name


def test_weyl_defect_obeys_closed_form_bound(chains, systems):
    cfg, sys = chains["binary-p34"], systems["binary-p34"]
    for lam in (0.3 + 0.2j, 0.1, 0.4j):
        for alpha in (1.0, 2.0):
            for level in (2, 3, 4):
                d = weyl_defect(cfg, sys, lam, level, alpha)
                assert d.defect <= d.bound + 1e-12, (lam, alpha, level)
    with pytest.raises(OutOfRangeError):
        weyl_defect(cfg, sys, 0.3, level=3, alpha=0.5)


def test_weyl_coefficients(chains, systems):
    cfg, sys = chains["binary-p34"], systems["binary-p34"]
    lam = 0.3 + 0.2j
    d = weyl_defect(cfg, sys, lam, level=4, alpha=2.0)
    assert d.coeff_col0 == pytest.approx(float(cfg.success_prefix(5)))
    want_ck = abs(1 - 0.75 - lam) + 0.75 - float(cfg.success_prefix(5))
    assert d.coeff_colk == pytest.approx(want_ck)


def test_weyl_defect_decays_with_level(chains, systems):
    cfg, sys = chains["binary-p34"], systems["binary-p34"]
    for alpha in (1.0, 2.0):
        d3 = weyl_defect(cfg, sys, 0.3 + 0.2j, 3, alpha)
        d5 = weyl_defect(cfg, sys, 0.3 + 0.2j, 5, alpha)
        assert d5.defect < d3.defect


def test_column0_coefficient_closed_forms(chains):
    # Vanishing success product: the tail telescopes to the head product.
    dend = chains["dendrite"]
    for level in range(5):
        c = column0_coefficient(dend, level)
        assert isinstance(c, Fraction)
        assert c == Fraction(1, 2 ** (level + 1))
    # Positive limit: head minus limit, cross-checked by direct summation.
    geo = chains["binary-geometric"]
    c2 = column0_coefficient(geo, 2)
    brute = 0.0
    prod = 1.0
    for j in range(1, 401):
        prod *= geo.p_float(j)
        if j >= 3:
            brute += (1.0 - geo.p_float(j + 1)) * prod
    assert c2 == pytest.approx(brute, rel=1e-10)
    with pytest.raises(OutOfRangeError):
        column0_coefficient(dend, -1)


def test_column0_coefficient_inconclusive_fallback():
    cfg = ChainConfig(BaseSequence(2), random_uniform("1/2", 1, 11))
    c = column0_coefficient(cfg, 2)
    assert isinstance(c, float)
    assert 0.0 <= c <= float(cfg.success_prefix(3))


# -- eigenvalue clouds -------------------------------------------------------


def test_truncated_eigenvalues_shape_and_bounds(chains):
    vals = truncated_eigenvalues(chains["dendrite"], 32)
    assert vals.shape == (32,)
    mods = np.abs(vals)
    # Sub-stochastic real matrix: spectrum in the closed unit disk,
    # sorted by non-increasing modulus, closed under conjugation.
    assert np.all(mods <= 1 + 1e-8)
    assert np.all(np.diff(mods) <= 1e-12)
    np.testing.assert_allclose(
        np.sort_complex(vals), np.sort_complex(np.conj(vals)), atol=1e-9
    )


def test_truncated_eigenvalues_cap(chains):
    with pytest.raises(BudgetExceededError):
        truncated_eigenvalues(chains["dendrite"], 4097)


def test_eigenvalue_report_tags(chains, systems):
    rep = eigenvalue_report(chains["ternary-p12"], systems["ternary-p12"], 27)
    assert len(rep) == 27
    allowed = {"escaped", "certified-bounded", "bounded-at-budget"}
    for item in rep:
        assert set(item) == {"re", "im", "modulus", "verdict"}
        assert item["verdict"] in allowed
        assert item["modulus"] == pytest.approx(abs(complex(item["re"], item["im"])))
    json.dumps(rep)


# -- CSV output --------------------------------------------------------------


def test_matrix_csv_exact_golden(chains):
    buf = io.StringIO()
    write_matrix_csv(build_truncation(chains["dendrite"], 3), buf)
    assert buf.getvalue() == (
        "row,col,num,den\n"
        "0,0,1,2\n"
        "0,1,1,2\n"
        "1,0,1,4\n"
        "1,1,1,2\n"
        "1,2,1,4\n"
        "2,2,1,2\n"
    )


def test_matrix_csv_float_branch():
    cfg = ChainConfig(BaseSequence(2), random_uniform("1/2", "3/4", 7))
    buf = io.StringIO()
    tr = build_truncation(cfg, 4)
    write_matrix_csv(tr, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "row,col,value"
    assert len(lines) == 1 + sum(len(r) for r in tr.rows)
    n, c, val = lines[1].split(",")
    assert float(val) == float(tr.entry(int(n), int(c)))
