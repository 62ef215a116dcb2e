"""Independent reference implementations used only by the test suite.

Everything here deliberately recomputes results along a different path from
the library: candidate enumeration instead of arithmetic shortcuts, literal
big-integer expansion instead of modular exponentiation, Fourier-Motzkin
instead of simplex, per-bit list manipulation instead of masked ints.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from qreach.formats import FixedFormat, FloatFormat, Overflow, Rounding


# ---------------------------------------------------------------------------
# Rounding / overflow oracles
# ---------------------------------------------------------------------------

def pick_rounded(x: Fraction, below: Fraction, above: Fraction, mode: Rounding) -> Fraction:
    """Choose between the two neighbouring grid points by the mode's
    definition, given below <= x <= above."""
    if below == above:
        return below
    if mode is Rounding.TOWARD_NEGATIVE:
        return below
    if mode is Rounding.TOWARD_ZERO:
        return below if x >= 0 else above
    d_lo = x - below
    d_hi = above - x
    if d_lo < d_hi:
        return below
    if d_hi < d_lo:
        return above
    return above  # tie toward +inf


def fixed_round_oracle(x: Fraction, fmt: FixedFormat) -> Fraction:
    step = Fraction(1, 1 << fmt.frac)
    k = x / step
    below = (k.numerator // k.denominator) * step
    above = below if below == x else below + step
    return pick_rounded(x, below, above, fmt.rounding)


def fixed_overflow_oracle(x: Fraction, fmt: FixedFormat) -> Fraction:
    n = x * (1 << fmt.frac)
    assert n.denominator == 1
    n = n.numerator
    if fmt.overflow is Overflow.SATURATE:
        n = max(fmt.min_scaled, min(fmt.max_scaled, n))
    else:
        while n > fmt.max_scaled:
            n -= 1 << fmt.bits
        while n < fmt.min_scaled:
            n += 1 << fmt.bits
    return Fraction(n, 1 << fmt.frac)


def float_grid_near(x: Fraction, fmt: FloatFormat) -> list[Fraction]:
    """Unbounded-exponent grid points surrounding |x|'s binade, signed."""
    assert x != 0
    mag = abs(x)
    v = 0
    while Fraction(2) ** (v + 1) <= mag:
        v += 1
    while Fraction(2) ** v > mag:
        v -= 1
    step = Fraction(2) ** (v - fmt.mantissa)
    points = [m * step for m in range(1 << fmt.mantissa, (1 << (fmt.mantissa + 1)) + 1)]
    if x < 0:
        points = [-p for p in points]
    return sorted(points)


def float_round_oracle(x: Fraction, fmt: FloatFormat) -> Fraction:
    if x == 0:
        return x
    grid = float_grid_near(x, fmt)
    below = max(g for g in grid if g <= x)
    above = min(g for g in grid if g >= x)
    return pick_rounded(x, below, above, fmt.rounding)


def float_values_oracle(mantissa: int, exponent: int) -> list[Fraction]:
    """The representable set built straight from its set-builder form."""
    bias = 2 ** (exponent - 1) - 1
    emin, emax = -(2 ** (exponent - 1) - 2), 2 ** (exponent - 1) - 1
    assert emin == 1 - bias and emax == 2 ** exponent - 2 - bias
    values = {Fraction(0)}
    for s, e, k in itertools.product((0, 1), range(emin, emax + 1), range(2 ** mantissa)):
        v = (-1) ** s * (1 + Fraction(k, 2 ** mantissa)) * Fraction(2) ** e
        values.add(v)
    return sorted(values)


def to_format_oracle(x: Fraction, fmt) -> Fraction:
    """Quantisation by enumeration: round on the unbounded grid by candidate
    comparison, then clamp/flush by comparing against the range bounds."""
    if isinstance(fmt, FixedFormat):
        return fixed_overflow_oracle(fixed_round_oracle(x, fmt), fmt)
    y = float_round_oracle(x, fmt)
    if y == 0:
        return y
    if abs(y) < fmt.min_normal:
        return Fraction(0)
    if y > fmt.max_value:
        return fmt.max_value
    if y < -fmt.max_value:
        return -fmt.max_value
    return y


# ---------------------------------------------------------------------------
# Bit-expansion oracles
# ---------------------------------------------------------------------------

def bit_oracle_materialised(p: int, q: int, t: int) -> int:
    """Bit of weight 2^t of p/q, building the full shifted integer; the very
    thing the library avoids doing."""
    if t >= 0:
        return ((p // q) >> t) & 1
    return ((p << -t) // q) & 1


def bit_oracle_long_division(p: int, q: int, t: int) -> int:
    """Schoolbook long division; only usable for small |t|."""
    if t >= 0:
        a = p // q
        window = a % (1 << (t + 1))
        return window >> t
    rem = p % q  # fractional part of the floor expansion, in [0, q)
    bit = 0
    for _ in range(-t):
        rem *= 2
        bit, rem = divmod(rem, q)
    return bit


def float_word_oracle(x: Fraction, fmt: FloatFormat) -> list[int]:
    """Word layout built by explicit normalise-and-shift."""
    assert x != 0
    sign = 1 if x < 0 else 0
    mag = abs(x)
    v = 0
    while Fraction(2) ** (v + 1) <= mag:
        v += 1
    while Fraction(2) ** v > mag:
        v -= 1
    significand = mag / Fraction(2) ** v
    stored = v + fmt.bias
    word = [sign]
    word += [(stored >> i) & 1 for i in range(fmt.exponent)]
    rest = significand - 1
    for _ in range(fmt.mantissa):
        rest *= 2
        b = 1 if rest >= 1 else 0
        word.append(b)
        rest -= b
    return word


# ---------------------------------------------------------------------------
# Fourier-Motzkin feasibility oracle
# ---------------------------------------------------------------------------

def fm_feasible(constraints: list[tuple[list[Fraction], str, Fraction]], n_vars: int) -> bool:
    """Decide feasibility of a conjunction of rational linear constraints by
    Fourier-Motzkin elimination, strictness tracked per constraint.

    Each constraint is (coeffs, rel, bound) with rel in <,<=,=,>=,>.
    """
    rows = []
    for coeffs, rel, bound in constraints:
        c = list(coeffs) + [Fraction(0)] * (n_vars - len(coeffs))
        if rel in ("<", "<="):
            rows.append((c, bound, rel == "<"))
        elif rel in (">", ">="):
            rows.append(([-a for a in c], -bound, rel == ">"))
        elif rel == "=":
            rows.append((c, bound, False))
            rows.append(([-a for a in c], -bound, False))
        else:
            raise ValueError(rel)

    for var in range(n_vars - 1, -1, -1):
        uppers, lowers, rest = [], [], []
        for c, b, strict in rows:
            a = c[var]
            if a > 0:
                uppers.append(([x / a for x in c], b / a, strict))
            elif a < 0:
                lowers.append(([x / a for x in c], b / a, strict))
            else:
                rest.append((c, b, strict))
        new_rows = rest
        for (cu, bu, su), (cl, bl, sl) in itertools.product(uppers, lowers):
            # lower: x >= lhs_l, upper: x <= lhs_u -> combined constraint
            c = [u - l for u, l in zip(cu, cl)]
            c[var] = Fraction(0)
            new_rows.append((c, bu - bl, su or sl))
        rows = new_rows

    for c, b, strict in rows:
        assert all(a == 0 for a in c)
        if strict:
            if not Fraction(0) < b:
                return False
        else:
            if not Fraction(0) <= b:
                return False
    return True


# ---------------------------------------------------------------------------
# Bit-vector oracle
# ---------------------------------------------------------------------------

def bv_term_bits(term, assignment: dict[str, int], width: int) -> list[int]:
    """Evaluate a term to an explicit bit list, lowest bit first."""
    from qreach import bitvec

    if isinstance(term, bitvec.BvVar):
        value = assignment[term.name]
        return [(value >> i) & 1 for i in range(width)]
    if isinstance(term, bitvec.BvConst):
        return [(term.value >> i) & 1 for i in range(width)]
    if isinstance(term, bitvec.BvNot):
        return [1 - b for b in bv_term_bits(term.operand, assignment, width)]
    lhs = bv_term_bits(term.left, assignment, width)
    rhs = bv_term_bits(term.right, assignment, width)
    if isinstance(term, bitvec.BvAnd):
        return [a & b for a, b in zip(lhs, rhs)]
    if isinstance(term, bitvec.BvOr):
        return [a | b for a, b in zip(lhs, rhs)]
    if isinstance(term, bitvec.BvXor):
        return [a ^ b for a, b in zip(lhs, rhs)]
    raise TypeError(term)


def bv_check_oracle(formula, assignment: dict[str, int], width: int) -> bool:
    from qreach import bitvec

    if isinstance(formula, bitvec.BvEq):
        return (bv_term_bits(formula.left, assignment, width)
                == bv_term_bits(formula.right, assignment, width))
    if isinstance(formula, bitvec.BvNeg):
        return not bv_check_oracle(formula.operand, assignment, width)
    if isinstance(formula, bitvec.BvConj):
        return (bv_check_oracle(formula.left, assignment, width)
                and bv_check_oracle(formula.right, assignment, width))
    raise TypeError(formula)
