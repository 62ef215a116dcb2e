"""Compiling 3CNF formulas into network reachability instances.

Each propositional component becomes a small ReLU gadget: literals map to
relu(x) / relu(1-x), a clause to relu(relu(S) - relu(S-1)) for the literal
sum S, the conjunction to relu(sum of clause outputs - (n-1)), and every
input additionally runs through a binarity gadget that is 0 exactly on
{0, 1} within [0, 1].  Gadget outputs are carried to the final layer through
identity ReLU chains (their values are non-negative by construction).  The
input spec L1 boxes every input into [0, 1]; the output spec L2 pins the
conjunction output to 1 and all binarity outputs to 0, so the instance is
reachable iff the formula is satisfiable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError
from .formats import FixedFormat, Overflow, Rounding
from .linprog import LinearProgram, constraint
from .network import Network, make_network

F = Fraction


@dataclass(frozen=True)
class Cnf3:
    """Clauses of exactly three (variable index, polarity) literals;
    variables are 0-based, polarity True for positive."""

    n_vars: int
    clauses: tuple[tuple[tuple[int, bool], ...], ...]

    def __post_init__(self):
        if self.n_vars < 1:
            raise ValueError("at least one variable required")
        if not self.clauses:
            raise ValueError("at least one clause required")
        for cl in self.clauses:
            if len(cl) != 3:
                raise ValueError("clauses must have exactly three literals")
            for var, _ in cl:
                if not 0 <= var < self.n_vars:
                    raise ValueError(f"variable index {var} out of range")

    def evaluate(self, assignment) -> bool:
        return all(
            any(bool(assignment[var]) == pol for var, pol in clause)
            for clause in self.clauses)


def parse_dimacs(text: str) -> Cnf3:
    """DIMACS CNF with at most three literals per clause; shorter clauses are
    padded by repeating their last literal."""
    n_vars = None
    clauses = []
    pending: list[int] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("expected 'p cnf <vars> <clauses>'", line_no)
            try:
                n_vars = int(parts[2])
            except ValueError:
                raise ParseError("bad variable count", line_no) from None
            continue
        try:
            lits = [int(tok) for tok in line.split()]
        except ValueError:
            raise ParseError(f"bad clause line {line!r}", line_no) from None
        pending.extend(lits)
        while 0 in pending:
            cut = pending.index(0)
            clause, pending = pending[:cut], pending[cut + 1:]
            if not clause:
                raise ParseError("empty clause", line_no)
            if len(clause) > 3:
                raise ParseError(f"clause has {len(clause)} literals; at most 3 allowed",
                                 line_no)
            while len(clause) < 3:
                clause.append(clause[-1])
            clauses.append(tuple((abs(l) - 1, l > 0) for l in clause))
    if pending:
        raise ParseError("clause not terminated by 0")
    if n_vars is None:
        raise ParseError("missing problem line")
    if not clauses:
        raise ParseError("no clauses")
    seen = max(v for cl in clauses for v, _ in cl) + 1
    return Cnf3(max(n_vars, seen), tuple(clauses))


def format_dimacs(cnf: Cnf3) -> str:
    lines = [f"p cnf {cnf.n_vars} {len(cnf.clauses)}"]
    for clause in cnf.clauses:
        lines.append(" ".join(str(v + 1 if pol else -(v + 1)) for v, pol in clause) + " 0")
    return "\n".join(lines) + "\n"


def reduce_to_reachability(cnf: Cnf3, printed_binarity: bool = False
                           ) -> tuple[Network, LinearProgram, LinearProgram]:
    """Build (network, L1, L2).

    printed_binarity swaps in the gadget exactly as printed in its source,
    relu(relu(1/2-x) + relu(1/2-x) - 1/2), which fails its own contract at
    x = 0 (it outputs 1/2 there); kept for archaeology only.  The default is
    relu(1/2 - relu(x-1/2) - relu(1/2-x)) = min(x, 1-x) on [0, 1].
    """
    d = cnf.n_vars
    m = len(cnf.clauses)

    # Layer 1, from the d raw inputs.  Per variable, in order:
    #   relu(x), relu(1-x), relu(x-1/2), relu(1/2-x)
    # (printed variant replaces the last two with two copies of relu(1/2-x)).
    l1_rows, l1_bias = [], []

    def unit(j, coeff, bias):
        row = [F(0)] * d
        row[j] = F(coeff)
        l1_rows.append(row)
        l1_bias.append(F(bias))

    for j in range(d):
        unit(j, 1, 0)
        unit(j, -1, 1)
        if printed_binarity:
            unit(j, -1, F(1, 2))
            unit(j, -1, F(1, 2))
        else:
            unit(j, 1, F(-1, 2))
            unit(j, -1, F(1, 2))
    w1 = len(l1_rows)  # 4d

    def lit_index(var, pol):
        return 4 * var + (0 if pol else 1)

    # Layer 2: per clause relu(S) and relu(S-1); per variable the binarity
    # combiner relu(1/2 - u - v) (printed: relu(u + v - 1/2)).
    l2_rows, l2_bias = [], []
    for clause in cnf.clauses:
        row = [F(0)] * w1
        for var, pol in clause:
            row[lit_index(var, pol)] += 1
        l2_rows.append(list(row))
        l2_bias.append(F(0))
        l2_rows.append(list(row))
        l2_bias.append(F(-1))
    for j in range(d):
        row = [F(0)] * w1
        if printed_binarity:
            row[4 * j + 2] = F(1)
            row[4 * j + 3] = F(1)
            l2_bias.append(F(-1, 2))
        else:
            row[4 * j + 2] = F(-1)
            row[4 * j + 3] = F(-1)
            l2_bias.append(F(1, 2))
        l2_rows.append(row)
    w2 = len(l2_rows)  # 2m + d

    # Layer 3: clause outputs relu(u - v); binarity passthrough.
    l3_rows, l3_bias = [], []
    for i in range(m):
        row = [F(0)] * w2
        row[2 * i] = F(1)
        row[2 * i + 1] = F(-1)
        l3_rows.append(row)
        l3_bias.append(F(0))
    for j in range(d):
        row = [F(0)] * w2
        row[2 * m + j] = F(1)
        l3_rows.append(row)
        l3_bias.append(F(0))
    w3 = len(l3_rows)  # m + d

    # Layer 4 (final): conjunction, then binarity passthroughs.
    l4_rows, l4_bias = [], []
    row = [F(0)] * w3
    for i in range(m):
        row[i] = F(1)
    l4_rows.append(row)
    l4_bias.append(F(-(m - 1)))
    for j in range(d):
        row = [F(0)] * w3
        row[m + j] = F(1)
        l4_rows.append(row)
        l4_bias.append(F(0))

    net = make_network([
        (l1_rows, l1_bias),
        (l2_rows, l2_bias),
        (l3_rows, l3_bias),
        (l4_rows, l4_bias),
    ])

    box = []
    for j in range(d):
        coeffs = [F(0)] * d
        coeffs[j] = F(1)
        box.append(constraint(coeffs, ">=", 0))
        box.append(constraint(coeffs, "<=", 1))
    l1 = LinearProgram(d, tuple(box))

    out_dim = 1 + d
    pins = []
    coeffs = [F(0)] * out_dim
    coeffs[0] = F(1)
    pins.append(constraint(coeffs, "=", 1))
    for j in range(d):
        coeffs = [F(0)] * out_dim
        coeffs[1 + j] = F(1)
        pins.append(constraint(coeffs, "=", 0))
    l2 = LinearProgram(out_dim, tuple(pins))
    return net, l1, l2


def reduce_quantised(cnf: Cnf3, frac_bits: int,
                     rounding: Rounding = Rounding.NEAREST_HALF_UP
                     ) -> tuple[Network, LinearProgram, LinearProgram, FixedFormat]:
    """The same instance plus a fixed-point format wide enough that the
    gadget arithmetic on binary inputs is exact: ceil(log2(n+1)) + 2 integer
    bits for n clauses, plus the requested fractional bits (at least one so
    that 1/2 is on the grid)."""
    if frac_bits < 1:
        raise ValueError("at least one fractional bit is needed for 1/2")
    net, l1, l2 = reduce_to_reachability(cnf)
    int_bits = math.ceil(math.log2(len(cnf.clauses) + 1)) + 2
    fmt = FixedFormat(int_bits + frac_bits, frac_bits, rounding, Overflow.SATURATE)
    return net, l1, l2, fmt
