"""End-to-end acceptance gate: every release criterion at its stated size.

Each test prints one pass/fail line; run with `pytest -s tests/test_acceptance.py`
to watch them stream.
"""

import pytest

from qreach.selfcheck import (
    suite_bv_semantics, suite_cross_backend_bv, suite_exactness,
    suite_fixed_language, suite_float_language, suite_getbit, suite_lp,
    suite_mode_tables, suite_reduction_3sat,
)

SEED = 20260808


def _report(label, suite, budget=None):
    status = "PASS" if suite.ok else "FAIL"
    line = f"[{status}] {label}: {suite.total - suite.failures}/{suite.total} in {suite.seconds:.1f}s"
    if budget is not None:
        line += f" (budget {budget:.0f}s)"
    print(line)
    for case in suite.cases:
        if not case.ok:
            print(f"    failed: {case.case} {case.detail}")
    return suite


def test_criterion_1_cross_backend_agreement():
    # 200 random dynamically-quantised bit-vector instances, fixed point,
    # automata and brute-force backends must agree, witnesses must recheck.
    suite = _report("criterion 1, cross-backend agreement on 200 instances",
                    suite_cross_backend_bv(seed=SEED, count=200), budget=300)
    assert suite.failures == 0
    assert suite.seconds < 300


def test_criterion_2_fixed_language_equivalence():
    # Exact set equality of the fixed-point automaton language with the
    # evaluation relation on 200 instances from the same family.
    suite = _report("criterion 2, fixed-point automaton language equality on 200 instances",
                    suite_fixed_language(seed=SEED, count=200))
    assert suite.failures == 0


def test_criterion_3_float_language_equivalence():
    # Exhaustive set equality for the generated float family
    # (mantissa <= 3, exponent = 2, dims <= 2, depth <= 2).
    suite = _report("criterion 3, float automaton language equality",
                    suite_float_language(seed=SEED, per_shape=6))
    assert suite.failures == 0


def test_criterion_4_reduction_soundness():
    # >= 500 deduplicated 3CNF formulas over three variables, <= 4 clauses:
    # truth table == pattern-LP == brute-force quantised verdicts.
    suite = _report("criterion 4, 3SAT reduction soundness on 500 formulas",
                    suite_reduction_3sat(seed=SEED, count=500), budget=600)
    assert suite.failures == 0
    assert suite.seconds < 600


def test_criterion_5_bit_extraction():
    # 1000 fixed-point queries with |p|, q < 2^64 and |t| <= 2^20 against the
    # materialising oracle; 500 float-layout queries against encode bits.
    suite = _report("criterion 5, bit extraction against naive oracles",
                    suite_getbit(seed=SEED, fixed_count=1000, float_count=500),
                    budget=30)
    assert suite.failures == 0
    assert suite.seconds < 30


def test_criterion_6_bv_semantics():
    # 1000 model-check comparisons at width <= 8 plus 500 automata-vs-brute
    # satisfiability comparisons at width <= 6.
    suite = _report("criterion 6, bit-vector semantics",
                    suite_bv_semantics(seed=SEED, check_count=1000, sat_count=500))
    assert suite.failures == 0


def test_criterion_7_exact_lp():
    # 100 random small LPs against Fourier-Motzkin; witnesses recheck exactly.
    suite = _report("criterion 7, exact LP feasibility vs Fourier-Motzkin",
                    suite_lp(seed=SEED, count=100))
    assert suite.failures == 0


def test_criterion_8_quantised_rational_consistency():
    # Families whose intermediates all stay on the grid: quantised equals
    # rational on every representable input, exhaustively at b <= 5.
    suite = _report("criterion 8, quantised = rational on exact families",
                    suite_exactness(seed=SEED, count=40))
    assert suite.failures == 0


def test_criterion_9_mode_tables():
    # Directed rounding/overflow tables plus idempotence and monotonicity on
    # 10,000 random rationals per format (12 formats, 25 cases each).
    suite = _report("criterion 9, rounding and overflow mode properties",
                    suite_mode_tables(seed=SEED, count=300, samples=400))
    assert suite.failures == 0
