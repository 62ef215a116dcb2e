"""Finite-width number formats: fixed point and floating point.

Values are carried as exact `fractions.Fraction` everywhere; a format only
enters the picture when a value is rounded onto its grid, clamped or wrapped
into its range, or serialised to a bit word.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import NotRepresentable, ParseError


class Rounding(enum.Enum):
    TOWARD_NEGATIVE = "floor"
    TOWARD_ZERO = "trunc"
    NEAREST_HALF_UP = "nearest"


class Overflow(enum.Enum):
    SATURATE = "sat"
    WRAP = "wrap"


@dataclass(frozen=True)
class FixedFormat:
    """Two's-complement fixed point: values n / 2**frac with n a signed
    `bits`-wide integer."""

    bits: int
    frac: int
    rounding: Rounding = Rounding.NEAREST_HALF_UP
    overflow: Overflow = Overflow.SATURATE

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("total bit width must be positive")
        if not 0 <= self.frac <= self.bits:
            raise ValueError("fractional width must satisfy 0 <= f <= b")

    @property
    def min_scaled(self) -> int:
        return -(1 << (self.bits - 1))

    @property
    def max_scaled(self) -> int:
        return (1 << (self.bits - 1)) - 1

    @property
    def min_value(self) -> Fraction:
        return Fraction(self.min_scaled, 1 << self.frac)

    @property
    def max_value(self) -> Fraction:
        return Fraction(self.max_scaled, 1 << self.frac)

    @property
    def word_length(self) -> int:
        return self.bits

    def descriptor(self) -> str:
        return (f"fix:b={self.bits},f={self.frac},"
                f"round={self.rounding.value},ovf={self.overflow.value}")


@dataclass(frozen=True)
class FloatFormat:
    """Sign/exponent/mantissa format with `mantissa` fraction bits and
    `exponent` stored-exponent bits.

    The value set is the normal numbers (-1)^s * (1 + k/2^p) * 2^E for
    0 <= k < 2^p and emin <= E <= emax, plus a single zero.  The stored
    exponent is biased by 2^(e-1) - 1; the all-zero exponent field is
    reserved for the zero word and the all-ones field is unused, so
    emin = -(2^(e-1) - 2) and emax = 2^(e-1) - 1.  No subnormals, no
    infinities: rounding a nonzero value below 2^emin flushes to zero and
    values beyond the largest finite saturate to it.
    """

    mantissa: int
    exponent: int
    rounding: Rounding = Rounding.NEAREST_HALF_UP

    def __post_init__(self):
        if self.mantissa < 1:
            raise ValueError("mantissa width must be positive")
        if self.exponent < 2:
            # e = 1 leaves no stored exponent between the reserved all-zero
            # and all-ones fields, i.e. an empty value set.
            raise ValueError("exponent width must be at least 2")

    @property
    def bias(self) -> int:
        return (1 << (self.exponent - 1)) - 1

    @property
    def emin(self) -> int:
        return -((1 << (self.exponent - 1)) - 2)

    @property
    def emax(self) -> int:
        return (1 << (self.exponent - 1)) - 1

    @property
    def min_normal(self) -> Fraction:
        return pow2(self.emin)

    @property
    def max_value(self) -> Fraction:
        return (2 - Fraction(1, 1 << self.mantissa)) * pow2(self.emax)

    @property
    def word_length(self) -> int:
        return 1 + self.exponent + self.mantissa

    def descriptor(self) -> str:
        return (f"float:m={self.mantissa},e={self.exponent},"
                f"round={self.rounding.value}")


ArithmeticFormat = FixedFormat | FloatFormat


def pow2(k: int) -> Fraction:
    return Fraction(1 << k) if k >= 0 else Fraction(1, 1 << -k)


def _round_scaled(x: Fraction, step: Fraction, mode: Rounding) -> Fraction:
    """Round x to a multiple of step (a power of two)."""
    q = x / step
    if mode is Rounding.TOWARD_NEGATIVE:
        n = q.numerator // q.denominator
    elif mode is Rounding.TOWARD_ZERO:
        n = abs(q.numerator) // q.denominator
        if q < 0:
            n = -n
    elif mode is Rounding.NEAREST_HALF_UP:
        h = q + Fraction(1, 2)
        n = h.numerator // h.denominator
    else:  # pragma: no cover
        raise ValueError(mode)
    return n * step


def round_to_grid(x: Fraction, fmt: ArithmeticFormat) -> Fraction:
    """Round onto the format's unbounded grid; no range handling.

    Fixed point: the nearest (per mode) multiple of 2^-f.  Floating point:
    the nearest value with a p-bit significand at x's own binade, exponent
    unrestricted.  Idempotent in both cases.
    """
    x = Fraction(x)
    if isinstance(fmt, FixedFormat):
        return _round_scaled(x, pow2(-fmt.frac), fmt.rounding)
    if x == 0:
        return x
    v = _floor_log2(abs(x))
    step = pow2(v - fmt.mantissa)
    return _round_scaled(x, step, fmt.rounding)


def apply_overflow(x: Fraction, fmt: FixedFormat) -> Fraction:
    """Map a grid value into the representable range (saturate or wrap)."""
    x = Fraction(x)
    scaled = x * (1 << fmt.frac)
    if scaled.denominator != 1:
        raise ValueError("overflow handling requires a grid multiple of 2^-f")
    n = scaled.numerator
    if fmt.overflow is Overflow.SATURATE:
        n = min(max(n, fmt.min_scaled), fmt.max_scaled)
    else:
        span = 1 << fmt.bits
        n = (n - fmt.min_scaled) % span + fmt.min_scaled
    return Fraction(n, 1 << fmt.frac)


def to_format(x: Fraction, fmt: ArithmeticFormat) -> Fraction:
    """The total quantisation map: round onto the grid, then handle range.

    For floats the range handling is saturation to the largest finite value
    and flush-to-zero below the smallest normal.
    """
    y = round_to_grid(x, fmt)
    if isinstance(fmt, FixedFormat):
        return apply_overflow(y, fmt)
    if y == 0:
        return y
    if abs(y) < fmt.min_normal:
        return Fraction(0)
    if abs(y) > fmt.max_value:
        return fmt.max_value if y > 0 else -fmt.max_value
    return y


def is_representable(x: Fraction, fmt: ArithmeticFormat) -> bool:
    return to_format(Fraction(x), fmt) == x


def fmt_op(op: str, x: Fraction, y: Fraction, fmt: ArithmeticFormat) -> Fraction:
    """An arithmetic operation carried out under the format: exact result,
    then the format's quantisation map."""
    x, y = Fraction(x), Fraction(y)
    if op == "add":
        z = x + y
    elif op == "mul":
        z = x * y
    elif op == "div":
        if y == 0:
            raise ZeroDivisionError("format division by zero")
        z = x / y
    else:
        raise ValueError(f"unknown operation {op!r}")
    return to_format(z, fmt)


def fmt_compare(rel: str, x: Fraction, y: Fraction, fmt: ArithmeticFormat) -> bool:
    """A comparison carried out under the format: both sides are quantised,
    then compared exactly."""
    a = to_format(Fraction(x), fmt)
    b = to_format(Fraction(y), fmt)
    if rel == "<":
        return a < b
    if rel == "<=":
        return a <= b
    if rel == "=":
        return a == b
    if rel == ">=":
        return a >= b
    if rel == ">":
        return a > b
    raise ValueError(f"unknown relation {rel!r}")


def _floor_log2(x: Fraction) -> int:
    """Largest v with 2^v <= x, for x > 0."""
    p, q = x.numerator, x.denominator
    v = p.bit_length() - q.bit_length()
    # v is within 1 of the answer; fix up exactly.
    if v >= 0:
        if (q << v) > p:
            v -= 1
        if (q << (v + 1)) <= p:
            v += 1
    else:
        if q > (p << -v):
            v -= 1
        if q <= (p << -(v + 1)):
            v += 1
    return v


# ---------------------------------------------------------------------------
# Bit words
# ---------------------------------------------------------------------------

def encode(x: Fraction, fmt: ArithmeticFormat) -> tuple[int, ...]:
    """Serialise a representable value to its bit word.

    Fixed point: `bits` two's-complement bits of the scaled integer,
    least-significant first.  Float: sign, then the stored exponent
    least-significant bit first, then mantissa bits most-significant first;
    zero is the all-zero word.
    """
    x = Fraction(x)
    if isinstance(fmt, FixedFormat):
        scaled = x * (1 << fmt.frac)
        if scaled.denominator != 1:
            raise NotRepresentable(f"{x} is not on the 2^-{fmt.frac} grid")
        n = scaled.numerator
        if not fmt.min_scaled <= n <= fmt.max_scaled:
            raise NotRepresentable(f"{x} is out of range for {fmt.descriptor()}")
        u = n & ((1 << fmt.bits) - 1)
        return tuple((u >> i) & 1 for i in range(fmt.bits))

    if x == 0:
        return (0,) * fmt.word_length
    sign = 1 if x < 0 else 0
    mag = abs(x)
    v = _floor_log2(mag)
    if not fmt.emin <= v <= fmt.emax:
        raise NotRepresentable(f"{x} is out of range for {fmt.descriptor()}")
    frac = mag / pow2(v) - 1
    k = frac * (1 << fmt.mantissa)
    if k.denominator != 1:
        raise NotRepresentable(f"{x} needs more than {fmt.mantissa} mantissa bits")
    k = k.numerator
    stored = v + fmt.bias
    exp_bits = tuple((stored >> i) & 1 for i in range(fmt.exponent))
    man_bits = tuple((k >> (fmt.mantissa - j)) & 1 for j in range(1, fmt.mantissa + 1))
    return (sign,) + exp_bits + man_bits


def decode(bits: tuple[int, ...], fmt: ArithmeticFormat) -> Fraction:
    """Inverse of `encode`; rejects words outside its image."""
    if len(bits) != fmt.word_length:
        raise NotRepresentable(
            f"word length {len(bits)} != {fmt.word_length} for {fmt.descriptor()}")
    if any(b not in (0, 1) for b in bits):
        raise NotRepresentable("word bits must be 0 or 1")
    if isinstance(fmt, FixedFormat):
        u = sum(b << i for i, b in enumerate(bits))
        if bits[-1]:
            u -= 1 << fmt.bits
        return Fraction(u, 1 << fmt.frac)

    sign = bits[0]
    stored = sum(b << i for i, b in enumerate(bits[1:1 + fmt.exponent]))
    man = bits[1 + fmt.exponent:]
    k = sum(b << (fmt.mantissa - j) for j, b in enumerate(man, start=1))
    if stored == 0:
        if k != 0 or sign != 0:
            raise NotRepresentable("only the all-zero word encodes zero")
        return Fraction(0)
    if stored == (1 << fmt.exponent) - 1:
        raise NotRepresentable("all-ones exponent field is reserved")
    value = (1 + Fraction(k, 1 << fmt.mantissa)) * pow2(stored - fmt.bias)
    return -value if sign else value


def enumerate_values(fmt: ArithmeticFormat) -> list[Fraction]:
    """All representable values, ascending."""
    if isinstance(fmt, FixedFormat):
        scale = 1 << fmt.frac
        return [Fraction(n, scale) for n in range(fmt.min_scaled, fmt.max_scaled + 1)]
    out = [Fraction(0)]
    for e in range(fmt.emin, fmt.emax + 1):
        for k in range(1 << fmt.mantissa):
            v = (1 + Fraction(k, 1 << fmt.mantissa)) * pow2(e)
            out.append(v)
            out.append(-v)
    out.sort()
    return out


# ---------------------------------------------------------------------------
# Text forms
# ---------------------------------------------------------------------------

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def parse_rational(text: str) -> Fraction:
    """Parse `p/q` or an integer literal."""
    text = text.strip()
    if not _RATIONAL_RE.match(text):
        raise ParseError(f"not a rational literal: {text!r}")
    return Fraction(text)


def format_rational(x: Fraction) -> str:
    return str(Fraction(x))


_ROUNDING_NAMES = {m.value: m for m in Rounding}
_OVERFLOW_NAMES = {m.value: m for m in Overflow}


def parse_format(text: str) -> ArithmeticFormat:
    """Parse an arithmetic descriptor.

    Grammar: `fix:b=<int>,f=<int>[,round=<floor|trunc|nearest>][,ovf=<sat|wrap>]`
    or `float:m=<int>,e=<int>[,round=<...>]`.  Rounding defaults to nearest,
    overflow to sat.
    """
    text = text.strip()
    kind, sep, rest = text.partition(":")
    if not sep:
        raise ParseError(f"missing ':' in format descriptor {text!r}")
    fields = {}
    for item in rest.split(","):
        key, sep, value = item.partition("=")
        if not sep:
            raise ParseError(f"bad descriptor field {item!r}")
        fields[key.strip()] = value.strip()
    try:
        rounding = _ROUNDING_NAMES[fields.pop("round", "nearest")]
    except KeyError:
        raise ParseError(f"unknown rounding mode in {text!r}") from None
    if kind == "fix":
        try:
            overflow = _OVERFLOW_NAMES[fields.pop("ovf", "sat")]
            b = int(fields.pop("b"))
            f = int(fields.pop("f"))
        except KeyError as exc:
            raise ParseError(f"missing or unknown field in {text!r}: {exc}") from None
        if fields:
            raise ParseError(f"unexpected fields {sorted(fields)} in {text!r}")
        try:
            return FixedFormat(b, f, rounding, overflow)
        except ValueError as exc:
            raise ParseError(str(exc)) from None
    if kind == "float":
        try:
            m = int(fields.pop("m"))
            e = int(fields.pop("e"))
        except KeyError as exc:
            raise ParseError(f"missing field in {text!r}: {exc}") from None
        if fields:
            raise ParseError(f"unexpected fields {sorted(fields)} in {text!r}")
        try:
            return FloatFormat(m, e, rounding)
        except ValueError as exc:
            raise ParseError(str(exc)) from None
    raise ParseError(f"unknown format kind {kind!r}")
