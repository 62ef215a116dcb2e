"""Linear-constraint specifications and exact rational feasibility.

Constraints are conjunctions of `a . x ~ b` over positional variables
x1..xn.  Feasibility is decided exactly: a presolve pass handles constant
and single-variable rows, and a two-phase simplex with Bland's smallest-index
rule (no cycling in exact arithmetic) decides the rest.  Strict inequalities
are folded in by maximising a slack delta in [0, 1]; the system is feasible
with its strict constraints iff the optimum is positive.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError, UnboundVariable
from .formats import ArithmeticFormat, fmt_compare, format_rational, to_format

RELATIONS = ("<", "<=", "=", ">=", ">")


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[Fraction, ...]
    rel: str
    bound: Fraction

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")


@dataclass(frozen=True)
class LinearProgram:
    n_vars: int
    constraints: tuple[Constraint, ...]

    def __post_init__(self):
        if self.n_vars < 0:
            raise ValueError("variable count must be non-negative")
        for c in self.constraints:
            if len(c.coeffs) != self.n_vars:
                raise ValueError("constraint width must match variable count")


def constraint(coeffs, rel: str, bound) -> Constraint:
    return Constraint(tuple(Fraction(c) for c in coeffs), rel, Fraction(bound))


def conjoin(*lps: LinearProgram) -> LinearProgram:
    n = max(lp.n_vars for lp in lps)
    rows = []
    for lp in lps:
        for c in lp.constraints:
            rows.append(Constraint(c.coeffs + (Fraction(0),) * (n - len(c.coeffs)),
                                   c.rel, c.bound))
    return LinearProgram(n, tuple(rows))


_REL_TRUTH = {
    "<": lambda l, r: l < r,
    "<=": lambda l, r: l <= r,
    "=": lambda l, r: l == r,
    ">=": lambda l, r: l >= r,
    ">": lambda l, r: l > r,
}


def check_lp(lp: LinearProgram, assignment) -> bool:
    """Exact satisfaction of every constraint."""
    x = [Fraction(v) for v in assignment]
    if len(x) < lp.n_vars:
        raise UnboundVariable(f"assignment covers {len(x)} of {lp.n_vars} variables")
    for c in lp.constraints:
        lhs = sum((a * v for a, v in zip(c.coeffs, x)), start=Fraction(0))
        if not _REL_TRUTH[c.rel](lhs, c.bound):
            return False
    return True


def quantise_lp(lp: LinearProgram, fmt: ArithmeticFormat) -> LinearProgram:
    """Round every coefficient and bound into the format."""
    rows = tuple(
        Constraint(tuple(to_format(a, fmt) for a in c.coeffs), c.rel,
                   to_format(c.bound, fmt))
        for c in lp.constraints)
    return LinearProgram(lp.n_vars, rows)


def check_lp_quantised(lp: LinearProgram, assignment, fmt: ArithmeticFormat) -> bool:
    """Satisfaction under the format: coefficients and bounds quantised, each
    left-hand side evaluated exactly and compared via the format comparison."""
    x = [Fraction(v) for v in assignment]
    if len(x) < lp.n_vars:
        raise UnboundVariable(f"assignment covers {len(x)} of {lp.n_vars} variables")
    q = quantise_lp(lp, fmt)
    for c in q.constraints:
        lhs = sum((a * v for a, v in zip(c.coeffs, x)), start=Fraction(0))
        if not fmt_compare(c.rel, lhs, c.bound, fmt):
            return False
    return True


# ---------------------------------------------------------------------------
# Feasibility
# ---------------------------------------------------------------------------

def feasible(lp: LinearProgram):
    """An exact satisfying point, or None."""
    # Normal form: every row as (coeffs, bound, strict) meaning a.x <= b,
    # strictly when flagged; equalities become two rows.
    rows = []
    for c in lp.constraints:
        a, b = list(c.coeffs), c.bound
        if c.rel in ("<", "<="):
            rows.append((a, b, c.rel == "<"))
        elif c.rel in (">", ">="):
            rows.append(([-v for v in a], -b, c.rel == ">"))
        else:
            rows.append((a, b, False))
            rows.append(([-v for v in a], -b, False))
    return _solve_rows(rows, lp.n_vars)


def _solve_rows(rows, n):
    # Presolve: constant rows decide themselves; single-variable rows become
    # interval bounds; the rest go to simplex with the surviving bounds.
    lo = [None] * n  # (value, strict)
    hi = [None] * n
    general = []
    for a, b, strict in rows:
        support = [j for j, v in enumerate(a) if v != 0]
        if not support:
            if strict and not Fraction(0) < b:
                return None
            if not strict and not Fraction(0) <= b:
                return None
            continue
        if len(support) == 1:
            j = support[0]
            v = a[j]
            bound = b / v
            if v > 0:  # x_j <= bound
                cur = hi[j]
                if cur is None or bound < cur[0] or (bound == cur[0] and strict):
                    hi[j] = (bound, strict)
            else:  # x_j >= bound
                cur = lo[j]
                if cur is None or bound > cur[0] or (bound == cur[0] and strict):
                    lo[j] = (bound, strict)
            continue
        general.append((a, b, strict))

    for j in range(n):
        if lo[j] and hi[j]:
            (lv, ls), (hv, hs) = lo[j], hi[j]
            if lv > hv or (lv == hv and (ls or hs)):
                return None

    if not general:
        return [_pick_in_interval(lo[j], hi[j]) for j in range(n)]

    for a, b, strict in general:
        # Interval check: fail fast when the row cannot be satisfied anywhere
        # inside the bounds.  Unbounded directions leave it undecided.
        best = Fraction(0)
        open_best = False
        for j, v in enumerate(a):
            if v == 0:
                continue
            dn = lo[j][0] if v > 0 and lo[j] else (hi[j][0] if v < 0 and hi[j] else None)
            if dn is None:
                open_best = True
                break
            best += v * dn
        if not open_best and (best > b or (strict and best == b)):
            return None
    return _simplex_feasible(lo, hi, general, n)


def _pick_in_interval(lo, hi):
    if lo is None and hi is None:
        return Fraction(0)
    if lo is None:
        return hi[0] - 1 if hi[1] else hi[0]
    if hi is None:
        return lo[0] + 1 if lo[1] else lo[0]
    if not lo[1] and not hi[1]:
        return lo[0]
    return (lo[0] + hi[0]) / 2


def _simplex_feasible(lo, hi, general, n):
    """Feasibility of the general rows inside the variable bounds.

    Variables are shifted to be non-negative (x = lo + z, or hi - z when
    only an upper bound exists; unbounded ones split into u - v), which
    avoids gratuitous artificial variables.  Strict rows and strict bounds
    are enforced by maximising a margin delta in (0, 1]."""
    has_strict = any(strict for _, _, strict in general) \
        or any(v is not None and v[1] for v in lo) \
        or any(v is not None and v[1] for v in hi)
    # Per variable: (columns, base, factor): x_j = base + factor * z_cols.
    plan = []
    cols = 0
    extra_rows = []  # over z columns, appended after transformation
    for j in range(n):
        if lo[j] is not None:
            plan.append(((cols,), lo[j][0], Fraction(1)))
            if lo[j][1]:  # x_j > lo: require z_j >= delta
                extra_rows.append(({cols: Fraction(-1)}, Fraction(0), True))
            if hi[j] is not None:
                span = hi[j][0] - lo[j][0]
                extra_rows.append(({cols: Fraction(1)}, span, hi[j][1]))
            cols += 1
        elif hi[j] is not None:
            plan.append(((cols,), hi[j][0], Fraction(-1)))
            if hi[j][1]:
                extra_rows.append(({cols: Fraction(-1)}, Fraction(0), True))
            cols += 1
        else:
            plan.append(((cols, cols + 1), Fraction(0), Fraction(1)))
            cols += 2

    width = cols + (1 if has_strict else 0)
    a_rows, b_vec = [], []

    def add_row(coeff_map, bound, strict):
        row = [Fraction(0)] * width
        for c, v in coeff_map.items():
            row[c] = v
        if strict:
            row[cols] = Fraction(1)
        a_rows.append(row)
        b_vec.append(Fraction(bound))

    for a, b, strict in general:
        coeff_map: dict[int, Fraction] = {}
        shifted = Fraction(b)
        for j, v in enumerate(a):
            if v == 0:
                continue
            columns, base, factor = plan[j]
            shifted -= v * base
            if len(columns) == 1:
                c = columns[0]
                coeff_map[c] = coeff_map.get(c, Fraction(0)) + v * factor
            else:
                cp, cn = columns
                coeff_map[cp] = coeff_map.get(cp, Fraction(0)) + v
                coeff_map[cn] = coeff_map.get(cn, Fraction(0)) - v
        add_row(coeff_map, shifted, strict)
    for coeff_map, bound, strict in extra_rows:
        add_row(coeff_map, bound, strict)
    if has_strict:
        add_row({cols: Fraction(0)}, Fraction(1), True)  # delta <= 1

    objective = [Fraction(0)] * width
    if has_strict:
        objective[cols] = Fraction(1)
    result = _simplex_max(a_rows, b_vec, objective)
    if result is None:
        return None
    value, z = result
    if has_strict and value <= 0:
        return None
    out = []
    for j in range(n):
        columns, base, factor = plan[j]
        if len(columns) == 1:
            out.append(base + factor * z[columns[0]])
        else:
            out.append(z[columns[0]] - z[columns[1]])
    return out


def _simplex_max(a_rows, b_vec, objective):
    """Maximise objective.z subject to A z <= b, z >= 0, exactly.

    Returns (optimum, z) or None when infeasible.  The objective here is
    always bounded (it is 0 or a slack capped at 1), so unboundedness is not
    reachable; a defensive error guards it anyway.
    """
    m, n = len(a_rows), len(objective)
    # Tableau columns: z (n) | slacks (m) | artificials (k) | rhs
    rows = []
    basis = []
    art_cols = []
    n_total = n + m
    for i in range(m):
        row = list(a_rows[i]) + [Fraction(0)] * m + [b_vec[i]]
        row[n + i] = Fraction(1)
        rows.append(row)
        basis.append(n + i)
    for i in range(m):
        if rows[i][-1] < 0:
            rows[i] = [-v for v in rows[i]]
            rows[i].insert(len(rows[i]) - 1, Fraction(1))
            for k in range(m):
                if k != i:
                    rows[k].insert(len(rows[k]) - 1, Fraction(0))
            art_cols.append(n_total)
            basis[i] = n_total
            n_total += 1

    def pivot(rows, basis, r, c):
        piv = rows[r][c]
        rows[r] = [v / piv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [v - f * w for v, w in zip(rows[i], rows[r])]
        basis[r] = c

    def run(rows, basis, cost, max_col=None):
        # cost: maximisation vector over current columns (rhs excluded);
        # columns at or beyond max_col may not enter the basis.
        width = len(rows[0]) - 1
        limit = width if max_col is None else max_col
        while True:
            # reduced costs: c_j - c_B . B^-1 A_j over the tableau
            reduced = list(cost)
            for i, bi in enumerate(basis):
                cb = cost[bi]
                if cb != 0:
                    reduced = [rc - cb * v for rc, v in zip(reduced, rows[i][:width])]
            entering = -1
            for j in range(limit):
                if j not in basis and reduced[j] > 0:
                    entering = j
                    break
            if entering < 0:
                return
            leaving, best = -1, None
            for i in range(len(rows)):
                col = rows[i][entering]
                if col > 0:
                    ratio = rows[i][-1] / col
                    if best is None or ratio < best or \
                       (ratio == best and basis[i] < basis[leaving]):
                        leaving, best = i, ratio
            if leaving < 0:
                raise RuntimeError("objective unexpectedly unbounded")
            pivot(rows, basis, leaving, entering)

    if art_cols:
        width = len(rows[0]) - 1
        cost1 = [Fraction(0)] * width
        for c in art_cols:
            cost1[c] = Fraction(-1)
        run(rows, basis, cost1)
        total = sum(rows[i][-1] for i, bi in enumerate(basis) if bi in set(art_cols))
        if total != 0:
            return None
        # Drive leftover degenerate artificials out of the basis.
        art_set = set(art_cols)
        for i in range(m):
            if basis[i] in art_set:
                for j in range(width):
                    if j not in art_set and rows[i][j] != 0:
                        pivot(rows, basis, i, j)
                        break

    width = len(rows[0]) - 1
    cost2 = list(objective) + [Fraction(0)] * (width - n)
    run(rows, basis, cost2, max_col=n + m)  # artificials may not re-enter
    z = [Fraction(0)] * n
    for i, bi in enumerate(basis):
        if bi < n:
            z[bi] = rows[i][-1]
    value = sum(c * v for c, v in zip(objective, z))
    return value, z


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<var>x\d+)|(?P<op>\*|\+|-|<=|>=|==|=|<|>))")


def _parse_expr(tokens, pos):
    """Parse a linear expression into ({var_index: coeff}, constant, pos)."""
    coeffs: dict[int, Fraction] = {}
    const = Fraction(0)
    sign = Fraction(1)
    expect_term = True
    while pos < len(tokens):
        kind, value = tokens[pos]
        if expect_term:
            if kind == "op" and value == "-":
                sign = -sign
                pos += 1
                continue
            if kind == "op" and value == "+":
                pos += 1
                continue
            if kind == "num":
                num = Fraction(value)
                pos += 1
                if pos < len(tokens) and tokens[pos] == ("op", "*"):
                    pos += 1
                    if pos >= len(tokens) or tokens[pos][0] != "var":
                        raise ParseError("expected variable after '*'")
                    j = int(tokens[pos][1][1:]) - 1
                    coeffs[j] = coeffs.get(j, Fraction(0)) + sign * num
                    pos += 1
                else:
                    const += sign * num
                sign = Fraction(1)
                expect_term = False
                continue
            if kind == "var":
                j = int(value[1:]) - 1
                coeffs[j] = coeffs.get(j, Fraction(0)) + sign
                pos += 1
                sign = Fraction(1)
                expect_term = False
                continue
            raise ParseError(f"unexpected token {value!r}")
        else:
            if kind == "op" and value in ("+", "-"):
                sign = Fraction(1) if value == "+" else Fraction(-1)
                pos += 1
                expect_term = True
                continue
            break
    if expect_term:
        raise ParseError("dangling operator in expression")
    return coeffs, const, pos


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ParseError(f"bad token at {text[pos:].strip()[:10]!r}")
            break
        if m.group("num"):
            tokens.append(("num", m.group("num")))
        elif m.group("var"):
            tokens.append(("var", m.group("var")))
        else:
            tokens.append(("op", m.group("op")))
        pos = m.end()
    return tokens


def parse_constraint(text: str) -> tuple[dict[int, Fraction], str, Fraction]:
    tokens = _tokenize(text)
    lhs, lconst, pos = _parse_expr(tokens, 0)
    if pos >= len(tokens) or tokens[pos][0] != "op" or \
       tokens[pos][1] not in ("<", "<=", "=", "==", ">=", ">"):
        raise ParseError(f"expected relation in {text!r}")
    rel = tokens[pos][1]
    rel = "=" if rel == "==" else rel
    rhs, rconst, end = _parse_expr(tokens, pos + 1)
    if end != len(tokens):
        raise ParseError(f"trailing tokens in {text!r}")
    coeffs = dict(lhs)
    for j, v in rhs.items():
        coeffs[j] = coeffs.get(j, Fraction(0)) - v
    return coeffs, rel, rconst - lconst


def parse_lp(text: str, n_vars: int | None = None) -> LinearProgram:
    """Parse constraints separated by newlines or `/\\`; variables are
    `x<i>`, 1-based, bound positionally."""
    chunks = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        for piece in re.split(r"/\\|&&", line):
            if piece.strip():
                chunks.append((line_no, piece.strip()))
    parsed = []
    max_var = 0
    for line_no, chunk in chunks:
        try:
            coeffs, rel, bound = parse_constraint(chunk)
        except ParseError as exc:
            raise ParseError(str(exc), line_no) from None
        if any(j < 0 for j in coeffs):
            raise ParseError("variable indices are 1-based", line_no)
        parsed.append((coeffs, rel, bound))
        if coeffs:
            max_var = max(max_var, max(coeffs) + 1)
    n = n_vars if n_vars is not None else max_var
    if max_var > n:
        raise ParseError(f"constraint mentions x{max_var} but only {n} variables exist")
    rows = tuple(
        Constraint(tuple(coeffs.get(j, Fraction(0)) for j in range(n)), rel, bound)
        for coeffs, rel, bound in parsed)
    return LinearProgram(n, rows)


def format_lp(lp: LinearProgram) -> str:
    lines = []
    for c in lp.constraints:
        terms = []
        for j, a in enumerate(c.coeffs):
            if a == 0:
                continue
            coeff = "" if a == 1 else ("-" if a == -1 else format_rational(a) + "*")
            if terms and not coeff.startswith("-"):
                terms.append("+")
                terms.append(f"{coeff}x{j + 1}")
            else:
                terms.append(f"{coeff}x{j + 1}")
        lhs = " ".join(terms) if terms else "0"
        lines.append(f"{lhs} {c.rel} {format_rational(c.bound)}")
    return "\n".join(lines) + ("\n" if lines else "")
