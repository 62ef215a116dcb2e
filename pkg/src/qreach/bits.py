"""Single-bit extraction from rational numbers without expanding them.

`getbit_fixed` answers "what is the bit of weight 2^t in the two's-complement
binary expansion of p/q truncated toward minus infinity", for arbitrarily
large |t|, in time polynomial in the bit lengths of p, q and t.  Fractional
bits are obtained through modular exponentiation so 2^|t| is never built.
`getbit_float` layers the sign/exponent/mantissa word layout on top of it.
"""

from __future__ import annotations

from .formats import FloatFormat


def getbit_fixed(p: int, q: int, t: int) -> int:
    """Bit of weight 2^t of the two's-complement expansion of p/q.

    For t >= 0 this is bit t of floor(p/q), sign-extended indefinitely.
    For t < 0 it is fractional bit i = -t, i.e. floor(p * 2^i / q) mod 2.
    """
    if q <= 0:
        raise ValueError("denominator must be positive")
    if t >= 0:
        # Python's >> on negative ints is an arithmetic shift, which is
        # exactly the infinite two's-complement expansion.
        return ((p // q) >> t) & 1
    i = -t
    # floor(p * 2^i / q) mod 2 == [2 * (p * 2^(i-1) mod q) >= q]; the modular
    # power keeps the intermediate below q even for huge i.
    r = (p * pow(2, i - 1, q)) % q
    return 1 if 2 * r >= q else 0


def float_exponent(p: int, q: int) -> int:
    """The unique V with 2^V <= |p/q| < 2^(V+1), for p != 0."""
    if p == 0:
        raise ValueError("zero has no normalised exponent")
    a = abs(p)
    v = a.bit_length() - q.bit_length()
    if v >= 0:
        if (q << v) > a:
            v -= 1
        elif (q << (v + 1)) <= a:
            v += 1
    else:
        if q > (a << -v):
            v -= 1
        elif q <= (a << -(v + 1)):
            v += 1
    return v


def getbit_float(p: int, q: int, fmt: FloatFormat, t: int) -> int:
    """Bit t of the float-format word of p/q (sign first, then stored
    exponent LSB-first, then mantissa MSB-first).

    p must be nonzero; callers handle the reserved zero word themselves.
    When the normalised exponent falls outside the stored range, exponent
    positions answer 1 on overflow and 0 on underflow, mantissa positions 0.
    The mantissa of an in-range value is truncated, which coincides with the
    exact bits whenever p/q is representable.
    """
    if p == 0:
        raise ValueError("zero word is handled by the caller")
    if not 0 <= t < fmt.word_length:
        raise IndexError(f"bit index {t} outside word of length {fmt.word_length}")
    if t == 0:
        return 1 if p < 0 else 0
    v = float_exponent(p, q)
    stored = v + fmt.bias
    too_big = stored > (1 << fmt.exponent) - 2
    too_small = stored < 1
    if t <= fmt.exponent:
        if too_big:
            return 1
        if too_small:
            return 0
        return (stored >> (t - 1)) & 1
    if too_big or too_small:
        return 0
    j = t - fmt.exponent  # mantissa index, weight 2^-j in the significand
    return getbit_fixed(abs(p), q, v - j)
