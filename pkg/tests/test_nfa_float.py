import itertools
import random
from fractions import Fraction

import pytest

from qreach.errors import NotRepresentable, UnsupportedFormat
from qreach.formats import FloatFormat, Rounding, encode, enumerate_values
from qreach.network import eval_quantised, make_network, quantise
from qreach.nfa import enumerate_language, is_empty
from qreach.nfa_float import (
    build_float_nfa, language_equals_relation, relation_words,
)

F = Fraction


def random_float_net(rng, fmt, dims=(1, 2), layers=(1, 2), width=(1, 2)):
    d = rng.randint(*dims)
    depth = rng.randint(*layers)
    values = enumerate_values(fmt)
    spec = []
    prev = d
    for _ in range(depth):
        w = rng.randint(*width)
        a = [[rng.choice(values) for _ in range(prev)] for _ in range(w)]
        b = [rng.choice(values) for _ in range(w)]
        spec.append((a, b))
        prev = w
    return make_network(spec)


def test_identity_neuron_language():
    fmt = FloatFormat(2, 2)
    net = make_network([([[F(1)]], [F(0)])])
    assert language_equals_relation(net, fmt) is None


def test_zero_input_maps_to_relu_bias():
    fmt = FloatFormat(2, 2)
    net = make_network([([[F(1)]], [F(3, 2)])])
    nfa = build_float_nfa(net, fmt)
    zero_word = encode(F(0), fmt)
    outs = [w for w in enumerate_language(nfa)
            if tuple(s[0] for s in w) == zero_word]
    assert len(outs) == 1
    y_word = tuple(s[1] for s in outs[0])
    assert y_word == encode(F(3, 2), fmt)


def test_alignment_gap_two():
    # Exponent gap forces a two-position alignment in the exact residual.
    fmt = FloatFormat(3, 2)
    net = quantise(make_network([([[F(1), F(1)]], [F(0)])]), fmt)
    assert language_equals_relation(net, fmt) is None


def test_rounding_and_saturation_paths():
    fmt = FloatFormat(2, 2)
    # Weight 3.5 pushes products past the largest finite value 3.5.
    net = quantise(make_network([([[F(7, 2)]], [F(1, 4)])]), fmt)
    assert language_equals_relation(net, fmt) is None


def test_flush_to_zero_path():
    fmt = FloatFormat(2, 2)
    # Small weight drives results below the smallest normal 1.
    net = quantise(make_network([([[F(1, 4)]], [F(0)])]), fmt)
    # 1/4 is itself below the smallest normal, so it quantises to 0: the
    # network is the constant relu(0) map.  Use a bias to keep it nontrivial.
    net2 = quantise(make_network([([[F(1)]], [F(-5, 4)])]), fmt)
    assert language_equals_relation(net, fmt) is None
    assert language_equals_relation(net2, fmt) is None


def test_two_layer_language():
    fmt = FloatFormat(2, 2)
    net = quantise(make_network([
        ([[F(1)], [F(-1)]], [F(0), F(3, 2)]),
        ([[F(1), F(1)]], [F(-1)]),
    ]), fmt)
    assert language_equals_relation(net, fmt) is None


def test_exhaustive_family():
    rng = random.Random(777)
    done = 0
    while done < 25:
        p = rng.randint(1, 3)
        net = quantise(random_float_net(rng, FloatFormat(p, 2)), FloatFormat(p, 2))
        fmt = FloatFormat(p, 2)
        assert language_equals_relation(net, fmt) is None, (p, net)
        done += 1


def test_state_count_growth_subexponential_in_mantissa():
    # The residual window prune keeps reachable states nearly flat in p.
    from qreach.nfa import ExplorationStats

    rng = random.Random(11)
    net_spec = [([[F(3, 2)]], [F(-1, 2)])]
    counts = []
    for p in (2, 3, 4):
        fmt = FloatFormat(p, 2)
        net = quantise(make_network(net_spec), fmt)
        nfa = build_float_nfa(net, fmt)
        stats = ExplorationStats()
        is_empty(nfa, stats=stats)
        counts.append(stats.explored)
    assert counts[2] < counts[0] * 8  # far below the 4^2 blowup of the word space


def test_descriptor_bound_holds_everywhere():
    fmt = FloatFormat(2, 2)
    net = quantise(make_network([([[F(3, 2)], [F(1)]], [F(0), F(1)]),
                                 ([[F(1), F(1)]], [F(0)])]), fmt)
    nfa = build_float_nfa(net, fmt)
    bound = nfa.state_size_bound()
    frontier = set(nfa.initial_states())
    for _ in range(nfa.word_length):
        nxt = set()
        for q in frontier:
            for sym in nfa.symbols():
                for succ in nfa.successors(q, sym):
                    assert len(nfa.encode_state(succ)) <= bound
                    nxt.add(succ)
        frontier = nxt
    assert frontier


def test_build_rejections():
    net = make_network([([[F(1)]], [F(0)])])
    with pytest.raises(UnsupportedFormat):
        build_float_nfa(net, FloatFormat(2, 4), e_cap=3)
    with pytest.raises(UnsupportedFormat):
        build_float_nfa(net, FloatFormat(2, 2, Rounding.TOWARD_ZERO))
    deep = make_network([([[F(1)]], [F(0)])] * 3)
    with pytest.raises(UnsupportedFormat):
        build_float_nfa(deep, FloatFormat(2, 2))
    no_relu = make_network([([[F(1)]], [F(0)])], final_relu=False)
    with pytest.raises(UnsupportedFormat):
        build_float_nfa(no_relu, FloatFormat(2, 2))
    with pytest.raises(NotRepresentable):
        build_float_nfa(make_network([([[F(1, 3)]], [F(0)])]), FloatFormat(2, 2))


def test_witness_decodes_and_rechecks():
    from qreach.formats import decode

    fmt = FloatFormat(2, 2)
    net = quantise(make_network([([[F(3, 2)]], [F(1)])]), fmt)
    nfa = build_float_nfa(net, fmt)
    word = is_empty(nfa)
    assert word is not None
    x = decode(tuple(s[0] for s in word), fmt)
    y_word = tuple(s[1] for s in word)
    assert encode(eval_quantised(net, [x], fmt)[0], fmt) == y_word
