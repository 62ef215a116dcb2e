import itertools
import random
from fractions import Fraction

import pytest

from qreach.errors import ParseError
from qreach.formats import enumerate_values, is_representable
from qreach.linprog import check_lp
from qreach.network import eval_quantised, eval_rational, quantise
from qreach.reduction import (
    Cnf3, format_dimacs, parse_dimacs, reduce_quantised, reduce_to_reachability,
)

F = Fraction


def cnf(n_vars, *clauses):
    return Cnf3(n_vars, tuple(tuple(cl) for cl in clauses))


def test_parse_dimacs_padding():
    got = parse_dimacs("p cnf 2 1\n1 -2 0\n")
    assert got.n_vars == 2
    assert got.clauses == (((0, True), (1, False), (1, False)),)


def test_parse_dimacs_comments_and_multiline():
    got = parse_dimacs("c header\np cnf 3 2\n1 2 3 0 -1\n-2 0\n")
    assert got.clauses[0] == ((0, True), (1, True), (2, True))
    assert got.clauses[1] == ((0, False), (1, False), (1, False))


def test_parse_dimacs_errors():
    with pytest.raises(ParseError):
        parse_dimacs("p cnf 2 1\n0\n")  # empty clause
    with pytest.raises(ParseError):
        parse_dimacs("p cnf 4 1\n1 2 3 4 0\n")  # too wide
    with pytest.raises(ParseError):
        parse_dimacs("1 2 0\n")  # missing problem line
    with pytest.raises(ParseError):
        parse_dimacs("p cnf 2 1\n1 2\n")  # unterminated


def test_dimacs_roundtrip():
    got = parse_dimacs("p cnf 3 2\n1 -2 3 0\n-1 -3 -3 0\n")
    assert parse_dimacs(format_dimacs(got)) == got


def test_single_clause_gadget_semantics():
    phi = cnf(1, [(0, True), (0, True), (0, True)])
    net, l1, l2 = reduce_to_reachability(phi)
    # x=1 satisfies: conjunction output 1, binarity 0
    y = eval_rational(net, [F(1)])
    assert y[0] == 1 and y[1] == 0
    assert check_lp(l2, y)
    # x=0 falsifies: conjunction output 0
    y = eval_rational(net, [F(0)])
    assert y[0] == 0
    assert not check_lp(l2, y)


def test_clause_gadget_output_binary_on_binary_inputs():
    phi = cnf(2, [(0, True), (1, False), (1, False)])
    net, l1, l2 = reduce_to_reachability(phi)
    for bits in itertools.product((0, 1), repeat=2):
        y = eval_rational(net, [F(b) for b in bits])
        assert y[0] in (0, 1)
        assert y[0] == (1 if phi.evaluate(bits) else 0)
        assert all(v == 0 for v in y[1:])


def test_binarity_gadget_on_grid():
    phi = cnf(1, [(0, True), (0, True), (0, True)])
    net, l1, l2 = reduce_to_reachability(phi)
    for k in range(17):
        x = F(k, 16)
        y = eval_rational(net, [x])
        expected = min(x, 1 - x)
        assert y[1] == expected
        assert (y[1] == 0) == (x in (0, 1))


def test_printed_binarity_variant_departs_from_contract():
    phi = cnf(1, [(0, True), (0, True), (0, True)])
    net, _, _ = reduce_to_reachability(phi, printed_binarity=True)
    # As printed, the gadget emits 1/2 at x = 0 instead of 0.
    assert eval_rational(net, [F(0)])[1] == F(1, 2)
    assert eval_rational(net, [F(1)])[1] == 0


def test_half_input_violates_l2():
    phi = cnf(1, [(0, True), (0, True), (0, True)])
    net, l1, l2 = reduce_to_reachability(phi)
    y = eval_rational(net, [F(1, 2)])
    assert y[1] == F(1, 2)
    assert not check_lp(l2, y)
    assert check_lp(l1, [F(1, 2)])


def test_unsat_formula_has_no_binary_witness():
    phi = cnf(1, [(0, True)] * 1 + [(0, True), (0, True)],
              [(0, False), (0, False), (0, False)])
    net, l1, l2 = reduce_to_reachability(phi)
    for bits in itertools.product((0, 1), repeat=1):
        y = eval_rational(net, [F(b) for b in bits])
        assert not check_lp(l2, y)


def test_reduce_quantised_format_width():
    phi = cnf(1, [(0, True), (0, True), (0, True)])
    net, l1, l2, fmt = reduce_quantised(phi, 1)
    assert fmt.frac == 1
    assert fmt.bits == 3 + 1  # one clause: ceil(log2 2) + 2 = 3 integer bits
    three = Cnf3(3, tuple([((0, True), (1, True), (2, True))] * 3))
    fmt3 = reduce_quantised(three, 2)[3]
    assert fmt3.bits - fmt3.frac == 4  # >= 4 integer bits for n=3 clauses

    with pytest.raises(ValueError):
        reduce_quantised(phi, 0)


def test_gadget_constants_representable():
    rng = random.Random(3)
    for _ in range(10):
        n_vars = rng.randint(1, 3)
        clauses = [tuple((rng.randrange(n_vars), rng.random() < 0.5) for _ in range(3))
                   for _ in range(rng.randint(1, 4))]
        phi = cnf(n_vars, *clauses)
        net, l1, l2, fmt = reduce_quantised(phi, rng.randint(1, 3))
        for layer in net.layers:
            for row in layer.weights:
                assert all(is_representable(w, fmt) for w in row)
            assert all(is_representable(b, fmt) for b in layer.bias)
        assert quantise(net, fmt) == net


def test_quantised_evaluation_exact_on_binary_inputs():
    rng = random.Random(5)
    for _ in range(10):
        n_vars = rng.randint(1, 3)
        clauses = [tuple((rng.randrange(n_vars), rng.random() < 0.5) for _ in range(3))
                   for _ in range(rng.randint(1, 4))]
        phi = cnf(n_vars, *clauses)
        net, l1, l2, fmt = reduce_quantised(phi, 1)
        for bits in itertools.product((0, 1), repeat=n_vars):
            x = [F(b) for b in bits]
            assert eval_quantised(net, x, fmt) == eval_rational(net, x)


def test_quantised_bruteforce_matches_truth_table_small():
    # Direct enumeration over the format grid: reachable iff satisfiable.
    phi = cnf(1, [(0, True), (0, True), (0, True)])
    net, l1, l2, fmt = reduce_quantised(phi, 1)
    reachable = False
    for x in enumerate_values(fmt):
        if not check_lp(l1, [x]):
            continue
        if check_lp(l2, eval_quantised(net, [x], fmt)):
            reachable = True
            break
    assert reachable  # x = 1 works

    unsat = cnf(1, [(0, True), (0, True), (0, True)],
                [(0, False), (0, False), (0, False)])
    net, l1, l2, fmt = reduce_quantised(unsat, 1)
    for x in enumerate_values(fmt):
        if check_lp(l1, [x]):
            assert not check_lp(l2, eval_quantised(net, [x], fmt))
