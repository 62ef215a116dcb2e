import random
from fractions import Fraction

import pytest

from qreach.errors import ParseError, UnboundVariable
from qreach.formats import FixedFormat
from qreach.linprog import (
    LinearProgram, check_lp, check_lp_quantised, conjoin, constraint,
    feasible, format_lp, parse_lp, quantise_lp,
)

from oracles import fm_feasible

F = Fraction


def lp(*rows, n=None):
    width = n if n is not None else max(len(r[0]) for r in rows)
    return LinearProgram(width, tuple(constraint(list(c) + [0] * (width - len(c)), rel, b)
                                      for c, rel, b in rows))


def test_parse_single_constraint():
    got = parse_lp("x1 + 2*x2 <= 3/2")
    assert got.n_vars == 2
    assert got.constraints == (constraint([1, 2], "<=", F(3, 2)),)


def test_parse_conjunction():
    got = parse_lp(r"x1 >= 0 /\ x1 <= 1")
    assert len(got.constraints) == 2
    got2 = parse_lp("x1 >= 0\nx1 <= 1")
    assert got == got2


def test_parse_variants():
    got = parse_lp("-x1 - 3/2*x2 + 1 = x2 - 2")
    assert got.constraints == (constraint([-1, F(-5, 2)], "=", -3),)
    assert parse_lp("x2 > 0").n_vars == 2
    assert parse_lp("x1 < 1", n_vars=3).n_vars == 3


def test_parse_errors():
    for bad in ("x1 ++ 2", "x1 <= ", "x0 <= 1", "x1 ? 2", "x1 <= 1 <= 2", "2 *"):
        with pytest.raises(ParseError):
            parse_lp(bad)


def test_format_roundtrip():
    rng = random.Random(3)
    for _ in range(30):
        rows = []
        n = rng.randint(1, 4)
        for _ in range(rng.randint(1, 5)):
            coeffs = [F(rng.randint(-5, 5), rng.choice([1, 2, 3])) for _ in range(n)]
            rows.append((coeffs, rng.choice(["<", "<=", "=", ">=", ">"]),
                         F(rng.randint(-5, 5), rng.choice([1, 2]))))
        prog = lp(*rows, n=n)
        assert parse_lp(format_lp(prog), n_vars=n) == prog


def test_check_lp_examples():
    box = lp(([1], ">=", 0), ([1], "<=", 1))
    assert check_lp(box, [F(1, 2)])
    assert not check_lp(lp(([1], ">", 0)), [F(0)])
    assert check_lp(lp(([1, 1], "=", 1)), [F(1, 3), F(2, 3)])
    with pytest.raises(UnboundVariable):
        check_lp(lp(([1, 1], "=", 1)), [F(1)])


def test_feasible_box():
    witness = feasible(lp(([1], ">=", 0), ([1], "<=", 1)))
    assert witness is not None
    assert check_lp(lp(([1], ">=", 0), ([1], "<=", 1)), witness)


def test_feasible_strict_contradiction():
    assert feasible(lp(([1], ">", 0), ([1], "<", 0))) is None
    assert feasible(lp(([1], ">", 0), ([1], "<", F(1, 1000000)))) is not None


def test_feasible_equalities():
    prog = lp(([1, 1], "=", 1), ([1, -1], "=", 0))
    w = feasible(prog)
    assert w == [F(1, 2), F(1, 2)]


def test_feasible_needs_simplex():
    prog = lp(([1, 1], "<=", 4), ([1, -1], ">=", 1), ([0, 1], ">", 0))
    w = feasible(prog)
    assert w is not None and check_lp(prog, w)
    prog = lp(([1, 1], ">=", 4), ([1], "<=", 1), ([0, 1], "<=", 1))
    assert feasible(prog) is None


def test_feasible_strict_via_simplex():
    # Strict row with two variables exercises the delta machinery.
    prog = lp(([1, 1], "<", 1), ([1, 1], ">", F(99, 100)),
              ([1, -1], "=", 0))
    w = feasible(prog)
    assert w is not None and check_lp(prog, w)


def test_infeasible_constant_row():
    prog = lp(([0], "=", 1), n=1)
    assert feasible(prog) is None
    assert feasible(lp(([0], "<=", 1), n=1)) == [F(0)]


def test_unconstrained_variables():
    assert feasible(LinearProgram(2, ())) == [0, 0]
    w = feasible(lp(([1, 0], ">", 5)))
    assert w is not None and w[0] > 5


def _random_lp(rng, max_vars=4, max_rows=6):
    n = rng.randint(1, max_vars)
    rows = []
    for _ in range(rng.randint(1, max_rows)):
        coeffs = [F(rng.randint(-5, 5)) for _ in range(n)]
        rel = rng.choice(["<", "<=", "=", ">=", ">"])
        rows.append((coeffs, rel, F(rng.randint(-5, 5))))
    return lp(*rows, n=n)


def test_feasible_matches_fourier_motzkin():
    rng = random.Random(101)
    agree = 0
    for _ in range(150):
        prog = _random_lp(rng)
        rows = [(list(c.coeffs), c.rel, c.bound) for c in prog.constraints]
        expect = fm_feasible(rows, prog.n_vars)
        witness = feasible(prog)
        assert (witness is not None) == expect
        if witness is not None:
            assert check_lp(prog, witness)
        agree += 1
    assert agree == 150


def test_witness_bit_sizes_stay_modest():
    rng = random.Random(59)
    for _ in range(60):
        prog = _random_lp(rng)
        w = feasible(prog)
        if w is None:
            continue
        for v in w:
            assert v.numerator.bit_length() + v.denominator.bit_length() < 64


def test_conjoin_pads():
    a = lp(([1], ">=", 0))
    b = lp(([0, 1], "<=", 3))
    both = conjoin(a, b)
    assert both.n_vars == 2
    assert check_lp(both, [F(0), F(3)])


def test_quantised_lp():
    fmt = FixedFormat(4, 1)
    prog = lp(([F(1, 3)], "<=", F(100)))
    q = quantise_lp(prog, fmt)
    assert q.constraints[0].coeffs == (F(1, 2),)
    assert q.constraints[0].bound == F(7, 2)
    # 1/10 and 2/10 both quantise to 0, so x*0 <= 0 comparisons collapse
    assert check_lp_quantised(lp(([1], "<=", F(2, 10))), [F(1, 10)], fmt)
    assert check_lp_quantised(lp(([1], ">=", F(2, 10))), [F(1, 10)], fmt)
