import itertools
import random
from fractions import Fraction

import pytest

from qreach.errors import NotRepresentable, ParseError
from qreach.formats import (
    FixedFormat, FloatFormat, Overflow, Rounding, apply_overflow, decode,
    encode, enumerate_values, fmt_compare, fmt_op, format_rational,
    is_representable, parse_format, parse_rational, round_to_grid, to_format,
)

from oracles import (
    fixed_overflow_oracle, fixed_round_oracle, float_round_oracle,
    float_values_oracle, to_format_oracle,
)

F41 = FixedFormat(4, 1)
F41_FLOOR = FixedFormat(4, 1, Rounding.TOWARD_NEGATIVE)
F41_TRUNC = FixedFormat(4, 1, Rounding.TOWARD_ZERO)
F42 = FixedFormat(4, 2)
F41_WRAP = FixedFormat(4, 1, overflow=Overflow.WRAP)

SMALL_FIXED = [
    FixedFormat(b, f, r, o)
    for b in (1, 2, 3, 4, 5)
    for f in range(0, b + 1)
    for r in Rounding
    for o in Overflow
]
SMALL_FLOAT = [
    FloatFormat(p, e, r)
    for p, e in [(1, 2), (2, 2), (3, 2), (4, 2), (1, 3), (2, 3), (3, 3), (1, 4), (2, 4)]
    for r in Rounding
]


def random_rationals(rng, count, num_range=64, den_range=32):
    out = []
    for _ in range(count):
        num = rng.randint(-num_range, num_range)
        den = rng.randint(1, den_range)
        out.append(Fraction(num, den))
    return out


def test_round_fixed_examples():
    assert round_to_grid(Fraction(3, 10), F41) == Fraction(1, 2)
    assert round_to_grid(Fraction(1, 4), F41_TRUNC) == 0
    assert round_to_grid(Fraction(-1, 4), F41) == 0  # negative tie goes up


def test_round_float_example_against_enumeration():
    fmt = FloatFormat(2, 2)
    # Nearest unbounded-grid point around 1/3 lives at binade 2^-2.
    assert round_to_grid(Fraction(1, 3), fmt) == Fraction(5, 16)
    assert float_round_oracle(Fraction(1, 3), fmt) == Fraction(5, 16)
    # The full quantisation map then flushes it below the smallest normal.
    assert to_format(Fraction(1, 3), fmt) == 0


def test_overflow_examples():
    assert apply_overflow(Fraction(5), F41) == Fraction(7, 2)
    assert apply_overflow(Fraction(7, 2), F41) == Fraction(7, 2)
    assert apply_overflow(Fraction(4), F41_WRAP) == Fraction(-4)


def test_fmt_op_examples():
    assert fmt_op("add", Fraction(1, 2), Fraction(1, 2), F41) == 1
    assert fmt_op("mul", Fraction(1, 4), Fraction(1, 4), F42) == 0
    assert fmt_op("add", Fraction(3), Fraction(3), F41) == Fraction(7, 2)


def test_fmt_op_division():
    assert fmt_op("div", Fraction(1), Fraction(3), F42) == Fraction(1, 4)
    with pytest.raises(ZeroDivisionError):
        fmt_op("div", Fraction(1), Fraction(0), F42)


def test_fmt_compare_examples():
    assert fmt_compare("<", Fraction(1, 10), Fraction(2, 10), F41) is False
    assert fmt_compare("=", Fraction(1, 10), Fraction(2, 10), F41) is True
    for x in (Fraction(3, 7), Fraction(-5, 3)):
        assert fmt_compare("=", x, x, F41)
    assert fmt_compare("<=", Fraction(-4), Fraction(7, 2), F41)


@pytest.mark.parametrize("fmt", SMALL_FIXED, ids=lambda f: f.descriptor())
def test_fixed_round_matches_oracle(fmt):
    rng = random.Random(7)
    for x in random_rationals(rng, 60):
        assert round_to_grid(x, fmt) == fixed_round_oracle(x, fmt)


@pytest.mark.parametrize("fmt", SMALL_FIXED, ids=lambda f: f.descriptor())
def test_fixed_overflow_matches_oracle(fmt):
    step = Fraction(1, 1 << fmt.frac)
    for n in range(-40, 40):
        x = n * step
        assert apply_overflow(x, fmt) == fixed_overflow_oracle(x, fmt)


@pytest.mark.parametrize("fmt", SMALL_FLOAT, ids=lambda f: f.descriptor())
def test_float_round_matches_oracle(fmt):
    rng = random.Random(11)
    for x in random_rationals(rng, 60):
        assert round_to_grid(x, fmt) == float_round_oracle(x, fmt)
        assert to_format(x, fmt) == to_format_oracle(x, fmt)


def test_float_value_set_matches_set_builder():
    for fmt in (FloatFormat(1, 2), FloatFormat(2, 2), FloatFormat(3, 2),
                FloatFormat(2, 3), FloatFormat(1, 4)):
        assert enumerate_values(fmt) == float_values_oracle(fmt.mantissa, fmt.exponent)


@pytest.mark.parametrize("fmt", SMALL_FIXED + SMALL_FLOAT, ids=lambda f: f.descriptor())
def test_identity_on_representables(fmt):
    for x in enumerate_values(fmt):
        assert round_to_grid(x, fmt) == x
        assert to_format(x, fmt) == x
        if isinstance(fmt, FixedFormat):
            assert apply_overflow(x, fmt) == x


@pytest.mark.parametrize("fmt", SMALL_FIXED, ids=lambda f: f.descriptor())
def test_round_error_within_one_step(fmt):
    rng = random.Random(3)
    step = Fraction(1, 1 << fmt.frac)
    for x in random_rationals(rng, 40):
        assert abs(round_to_grid(x, fmt) - x) < step or abs(round_to_grid(x, fmt) - x) == step * 0


def test_round_idempotent_random():
    rng = random.Random(5)
    for fmt in SMALL_FIXED + SMALL_FLOAT:
        for x in random_rationals(rng, 10):
            once = round_to_grid(x, fmt)
            assert round_to_grid(once, fmt) == once
            quantised = to_format(x, fmt)
            assert to_format(quantised, fmt) == quantised


def test_saturate_monotone():
    fmt = F41
    values = [Fraction(n, 2) for n in range(-30, 30)]
    mapped = [apply_overflow(v, fmt) for v in values]
    assert all(a <= b for a, b in zip(mapped, mapped[1:]))


def test_encode_examples():
    assert encode(Fraction(-4), F41) == (0, 0, 0, 1)
    assert decode((0, 0, 0, 1), F41) == Fraction(-4)
    assert decode((0,) * 4, F41) == 0
    assert decode((0,) * 5, FloatFormat(2, 2)) == 0
    # 3/2 = 1.1b * 2^0: sign 0, stored exponent 1 (bias 1), mantissa "1"
    assert encode(Fraction(3, 2), FloatFormat(1, 2)) == (0, 1, 0, 1)


def test_fixed_decode_formula():
    # Word b_f..b_1 a_0..a_(b-1) read least-significant first: frac part at
    # negative weights, top integer bit at -2^(b-f-1)... realised via scaling.
    fmt = FixedFormat(4, 1)
    word = (1, 0, 0, 1)  # scaled integer: 1 + 0 + 0 - 8 = -7 -> -7/2
    assert decode(word, fmt) == Fraction(-7, 2)


@pytest.mark.parametrize("fmt", [FixedFormat(b, f) for b in range(1, 9) for f in (0, b // 2, b)],
                         ids=lambda f: f.descriptor())
def test_fixed_roundtrip_exhaustive(fmt):
    for x in enumerate_values(fmt):
        assert decode(encode(x, fmt), fmt) == x
    for word in itertools.product((0, 1), repeat=fmt.word_length):
        assert encode(decode(word, fmt), fmt) == word


@pytest.mark.parametrize("fmt", [FloatFormat(p, e) for p, e in
                                 [(1, 2), (2, 2), (3, 2), (4, 2), (1, 3), (2, 3), (3, 3), (1, 4), (2, 4), (1, 5)]],
                         ids=lambda f: f.descriptor())
def test_float_roundtrip_exhaustive(fmt):
    for x in enumerate_values(fmt):
        assert decode(encode(x, fmt), fmt) == x
    good = bad = 0
    for word in itertools.product((0, 1), repeat=fmt.word_length):
        try:
            x = decode(word, fmt)
        except NotRepresentable:
            bad += 1
            continue
        good += 1
        assert encode(x, fmt) == word
    assert good == len(enumerate_values(fmt))
    assert bad > 0  # negative zero, subnormal patterns, all-ones exponent


def test_encode_rejects_unrepresentable():
    with pytest.raises(NotRepresentable):
        encode(Fraction(1, 3), F41)
    with pytest.raises(NotRepresentable):
        encode(Fraction(100), F41)
    with pytest.raises(NotRepresentable):
        encode(Fraction(1, 3), FloatFormat(2, 2))


def test_fmt_op_lands_in_format():
    rng = random.Random(13)
    for fmt in (F41, F42, FixedFormat(3, 0), FloatFormat(2, 2), FloatFormat(3, 3)):
        values = enumerate_values(fmt)
        for _ in range(200):
            x, y = rng.choice(values), rng.choice(values)
            for op in ("add", "mul"):
                encode(fmt_op(op, x, y, fmt), fmt)  # raises if not a member
            if y != 0:
                encode(fmt_op("div", x, y, fmt), fmt)


def test_is_representable():
    assert is_representable(Fraction(7, 2), F41)
    assert not is_representable(Fraction(4), F41)
    assert not is_representable(Fraction(1, 4), F41)
    assert is_representable(Fraction(0), FloatFormat(2, 2))
    assert not is_representable(Fraction(1, 3), FloatFormat(2, 2))


def test_parse_format_roundtrip():
    for text, cls in [
        ("fix:b=4,f=1,round=nearest,ovf=sat", FixedFormat),
        ("fix:b=6,f=3,round=floor,ovf=wrap", FixedFormat),
        ("float:m=2,e=3,round=nearest", FloatFormat),
    ]:
        fmt = parse_format(text)
        assert isinstance(fmt, cls)
        assert parse_format(fmt.descriptor()) == fmt
    assert parse_format("fix:b=4,f=1") == FixedFormat(4, 1)


def test_parse_format_rejects_garbage():
    for bad in ("fix", "fix:b=4", "fix:b=4,f=9", "float:m=2,e=1",
                "fix:b=4,f=1,round=up", "int:b=4,f=1", "fix:b=4,f=1,zzz=1"):
        with pytest.raises(ParseError):
            parse_format(bad)


def test_parse_rational():
    assert parse_rational("3/2") == Fraction(3, 2)
    assert parse_rational("-7") == Fraction(-7)
    assert format_rational(Fraction(-3, 2)) == "-3/2"
    for bad in ("1.5", "a", "1/0x2", ""):
        with pytest.raises(ParseError):
            parse_rational(bad)


def test_format_validation():
    with pytest.raises(ValueError):
        FixedFormat(2, 3)
    with pytest.raises(ValueError):
        FixedFormat(0, 0)
    with pytest.raises(ValueError):
        FloatFormat(0, 2)
    with pytest.raises(ValueError):
        FloatFormat(2, 1)
