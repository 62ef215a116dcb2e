"""The succinct automaton recognising a network's fixed-point input-output
relation.

Everything is scaled by 2^f so each neuron's exact affine sum becomes the
integer T = sum_j W_j X_j + B 2^f over scaled-integer words read
least-significant bit first (two's complement, so the top position carries
negative weight; the bias word is fed one bit per step at weight 2^f since
the products carry two scale factors and the bias only one).  A serial adder
per neuron tracks a bounded carry; the f low emitted bits are the sub-grid
tail r that justifies the rounding increment c_init, which is injected at
position f - by then the tail is complete, so c_init is computed, stored,
and still audited against r at acceptance.

The neuron's visible output m = relu(saturate(R)), R = floor(T/2^f) + c_init,
cannot be produced causally (bit tau of R emerges only at step tau + f), so
the automaton instead consumes the claimed output word - read from the
symbol for the last layer, guessed bit-by-bit for hidden layers - per the
per-neuron behaviour guessed up front:

  FEED  m = R: the claimed bits are fed into the adder at weight -2^f, which
        then computes T + c_init 2^f - m 2^f; the claim holds exactly when
        every emitted bit from position f up is 0 and the final carry is 0.
        An active-ReLU claim additionally pins the sign bit to 0.
  ZERO  the ReLU is inactive (R <= 0, covering negative saturation): the
        visible word is constant 0 and the final carry must certify R <= 0.
  MAX / MIN  positive/negative saturation: the visible word is the extreme
        constant and the final carry must certify R beyond the range.
"""

from __future__ import annotations

import itertools

from .bits import getbit_fixed
from .errors import NotRepresentable, UnsupportedFormat
from .formats import FixedFormat, Overflow, Rounding
from .network import Network, is_quantised
from .nfa import SuccinctNfa

KIND_FEED, KIND_ZERO, KIND_MAX, KIND_MIN = 0, 1, 2, 3
_NO_CINIT = -1


def weight_bit(net: Network, fmt: FixedFormat, layer: int, row: int, col: int,
               t: int) -> int:
    """Bit t of the scaled quantised weight's two's-complement word."""
    if not 0 <= layer < net.depth:
        raise IndexError(f"layer {layer} out of range")
    weights = net.layers[layer].weights
    if not (0 <= row < len(weights) and 0 <= col < len(weights[0])):
        raise IndexError(f"weight ({row}, {col}) out of range")
    if not 0 <= t < fmt.bits:
        raise IndexError(f"bit index {t} outside the {fmt.bits}-bit word")
    scaled = weights[row][col] * (1 << fmt.frac)
    if scaled.denominator != 1:
        raise NotRepresentable("weight is not on the format grid")
    return getbit_fixed(scaled.numerator, 1, t)


def bias_bit(net: Network, fmt: FixedFormat, layer: int, row: int, t: int) -> int:
    """Bit t of the scaled quantised bias, same layout as weight_bit."""
    if not 0 <= layer < net.depth:
        raise IndexError(f"layer {layer} out of range")
    bias = net.layers[layer].bias
    if not 0 <= row < len(bias):
        raise IndexError(f"bias row {row} out of range")
    if not 0 <= t < fmt.bits:
        raise IndexError(f"bit index {t} outside the {fmt.bits}-bit word")
    scaled = bias[row] * (1 << fmt.frac)
    if scaled.denominator != 1:
        raise NotRepresentable("bias is not on the format grid")
    return getbit_fixed(scaled.numerator, 1, t)


class _Neuron:
    __slots__ = ("layer", "index", "weights", "bias_word", "relu", "final",
                 "kinds", "carry_bound")

    def __init__(self, layer, index, weights, bias_word, relu, final):
        self.layer = layer
        self.index = index
        self.weights = weights
        self.bias_word = bias_word
        self.relu = relu
        self.final = final
        self.kinds = ()
        self.carry_bound = 0


class FixedFnnNfa(SuccinctNfa):
    """States are (t, kinds, per-neuron (carry, tail, hi_zero, last, c_init))."""

    def __init__(self, net: Network, fmt: FixedFormat):
        if fmt.rounding not in (Rounding.TOWARD_NEGATIVE, Rounding.NEAREST_HALF_UP):
            raise UnsupportedFormat(f"rounding {fmt.rounding.value} has no rounding audit")
        if fmt.overflow is not Overflow.SATURATE:
            raise UnsupportedFormat("only saturating overflow is recognised")
        if not is_quantised(net, fmt):
            raise NotRepresentable("quantise the network to the format first")
        self.net = net
        self.fmt = fmt
        self.word_length = fmt.bits
        self.symbol_bits = net.input_dim + net.output_dim
        self._in_dim = net.input_dim
        scale = 1 << fmt.frac
        self.neurons: list[_Neuron] = []
        relu_layers = set(net.relu_layer_indices())
        for li, layer in enumerate(net.layers):
            for row in range(layer.out_dim):
                weights = [int(w * scale) for w in layer.weights[row]]
                word = tuple(bias_bit(net, fmt, li, row, t) for t in range(fmt.bits))
                self.neurons.append(_Neuron(
                    li, row, weights, word, li in relu_layers, li == net.depth - 1))
        self._layer_slices = []
        pos = 0
        for layer in net.layers:
            self._layer_slices.append((pos, pos + layer.out_dim))
            pos += layer.out_dim
        self._prepare_kinds()
        # Layer transitions recur across states, subsets and pinned inputs;
        # memoising them dominates exploration cost.  Bounded, never evicted.
        self._layer_memo: dict = {}
        self._layer_memo_cap = 1 << 21

    # -- static analysis -------------------------------------------------------

    def _prepare_kinds(self):
        """Per-neuron behaviour guesses, pruned by exact interval bounds on
        the rounded pre-activation."""
        fmt = self.fmt
        scale = 1 << fmt.frac
        c_init_max = 1 if fmt.rounding is Rounding.NEAREST_HALF_UP and fmt.frac > 0 else 0
        for n in self.neurons:
            if n.layer == 0:
                lo_in, hi_in = fmt.min_scaled, fmt.max_scaled
            else:
                lo_in, hi_in = 0, fmt.max_scaled  # hidden values are post-ReLU
            bias_scaled = sum(b << t for t, b in enumerate(n.bias_word[:-1]))
            bias_scaled -= n.bias_word[-1] << (fmt.bits - 1)
            t_lo = sum(min(w * lo_in, w * hi_in) for w in n.weights) + bias_scaled * scale
            t_hi = sum(max(w * lo_in, w * hi_in) for w in n.weights) + bias_scaled * scale
            r_lo = t_lo >> fmt.frac
            r_hi = (t_hi >> fmt.frac) + c_init_max
            kinds = []
            if n.relu:
                if r_hi >= 0 and r_lo <= fmt.max_scaled:
                    kinds.append(KIND_FEED)
                if r_lo <= 0:
                    kinds.append(KIND_ZERO)
                if r_hi > fmt.max_scaled:
                    kinds.append(KIND_MAX)
            else:
                if r_hi >= fmt.min_scaled and r_lo <= fmt.max_scaled:
                    kinds.append(KIND_FEED)
                if r_hi > fmt.max_scaled:
                    kinds.append(KIND_MAX)
                if r_lo < fmt.min_scaled:
                    kinds.append(KIND_MIN)
            n.kinds = tuple(kinds)
            # |carry| never exceeds the largest per-step addend: weights, the
            # bias bit and the output feed (both at weight 2^f), and c_init.
            n.carry_bound = sum(abs(w) for w in n.weights) + 2 * scale + 2

    def _c_init_from_tail(self, rho: int) -> int:
        if self.fmt.rounding is Rounding.NEAREST_HALF_UP and self.fmt.frac > 0:
            return 1 if 2 * rho >= (1 << self.fmt.frac) else 0
        return 0

    def _const_bit(self, kind: int, t: int) -> int:
        last = self.word_length - 1
        if kind == KIND_MAX:
            return 1 if t < last else 0  # the maximum word 0111...1 (sign last)
        if kind == KIND_MIN:
            return 0 if t < last else 1  # the minimum word 1000...0
        return 0

    # -- oracles ---------------------------------------------------------------

    def initial_states(self):
        zeros = ((0, 0, True, 0, _NO_CINIT),) * len(self.neurons)
        return [(0, combo, zeros)
                for combo in itertools.product(*(n.kinds for n in self.neurons))]

    def _neuron_step(self, n, kind, dyn_entry, a, t, v):
        """One serial-adder step; returns the next dyn entry or None (dead)."""
        f = self.fmt.frac
        scale = 1 << f
        c, rho, hi_zero, last, c_init = dyn_entry
        if t == self.word_length - 1:
            a = -a
        d = c + a
        if t == f and f < self.word_length:
            c_init = self._c_init_from_tail(rho)
            d += c_init
        if kind == KIND_FEED:
            d += (scale if t == self.word_length - 1 else -scale) * v
        e = d & 1
        carry = d >> 1
        if t < f:
            return (carry, rho | (e << t), hi_zero, last, c_init)
        if kind == KIND_FEED and e:
            return None
        return (carry, rho, hi_zero and e == 0, e, c_init)

    def _layer_step(self, t, li, layer_kinds, layer_dyn, prev_bits, y_slice):
        """All alternatives (visible bits, next dyn) for one layer at step t.

        y_slice is the symbol's output part for the last layer, None below
        it.  Hidden FEED neurons guess their visible bit, except that with
        f = 0 the feed flips the emitted parity immediately, forcing it, and
        at the sign position an active-ReLU output is pinned to 0.
        """
        key = (t, li, layer_kinds, layer_dyn, prev_bits, y_slice)
        memo = self._layer_memo
        hit = memo.get(key)
        if hit is not None:
            return hit
        fmt = self.fmt
        f = fmt.frac
        scale = 1 << f
        b = self.word_length
        neg = t == b - 1
        inject = t == f and f < b
        lo, hi = self._layer_slices[li]
        alts = [((), ())]  # (visible bits so far, dyn entries so far)
        for offset, i in enumerate(range(lo, hi)):
            n = self.neurons[i]
            kind = layer_kinds[offset]
            a = sum(w for w, u in zip(n.weights, prev_bits) if u) \
                + n.bias_word[t] * scale
            nxt = []
            for vis, acc in alts:
                entry = layer_dyn[offset]
                if kind == KIND_FEED:
                    if y_slice is not None:
                        candidates = (y_slice[n.index],)
                    elif neg and n.relu:
                        candidates = (0,)
                    elif f == 0:
                        base = entry[0] + (-a if neg else a)
                        if inject:
                            base += self._c_init_from_tail(entry[1])
                        candidates = (base & 1,)
                    else:
                        candidates = (0, 1)
                    for v in candidates:
                        if neg and n.relu and v != 0:
                            continue
                        stepped = self._neuron_step(n, kind, entry, a, t, v)
                        if stepped is not None:
                            nxt.append((vis + (v,), acc + (stepped,)))
                else:
                    v = self._const_bit(kind, t)
                    if y_slice is not None and y_slice[n.index] != v:
                        continue
                    stepped = self._neuron_step(n, kind, entry, a, t, v)
                    if stepped is not None:
                        nxt.append((vis + (v,), acc + (stepped,)))
            alts = nxt
            if not alts:
                break
        if len(memo) < self._layer_memo_cap:
            memo[key] = alts
        return alts

    def successors(self, state, symbol):
        t, kinds, dyn = state
        if t >= self.word_length:
            return []
        x_bits = symbol[:self._in_dim]
        y_bits = symbol[self._in_dim:]
        partials = [((), x_bits)]  # (dyn entries so far, previous layer bits)
        last_layer = len(self._layer_slices) - 1
        for li, (lo, hi) in enumerate(self._layer_slices):
            y_slice = y_bits if li == last_layer else None
            nxt = []
            for acc, prev_bits in partials:
                for vis, stepped in self._layer_step(
                        t, li, kinds[lo:hi], dyn[lo:hi], prev_bits, y_slice):
                    nxt.append((acc + stepped, vis))
            partials = nxt
            if not partials:
                return []
        return [(t + 1, kinds, acc) for acc, _ in partials]

    def is_final(self, state):
        t, kinds, dyn = state
        b = self.word_length
        if t != b:
            return False
        f = self.fmt.frac
        half_tail = 1 << (f - 1) if f else 0
        for kind, (c, rho, hi_zero, last, c_init) in zip(kinds, dyn):
            if f == b:
                c_init = self._c_init_from_tail(rho)  # never injected mid-word
                c_eff = c + c_init
            else:
                c_eff = c
            # Rounding audit: the tail must justify the injected increment.
            if c_init != self._c_init_from_tail(rho):
                return False
            if kind == KIND_FEED:
                if c_eff != 0:
                    return False
            elif kind == KIND_ZERO:
                # R <= 0 (negative saturation included: ReLU hides it)
                if not (c_eff <= -1 or (c_eff == 0 and hi_zero)):
                    return False
            elif kind == KIND_MAX:
                if f >= 1:
                    if not c_eff >= half_tail:
                        return False
                elif not (c_eff >= 1 or (c_eff == 0 and last == 1)):
                    return False
            else:  # KIND_MIN
                if f >= 1:
                    if not c_eff <= -half_tail - 1:
                        return False
                elif not (c_eff <= -2 or (c_eff == -1 and last == 0)):
                    return False
        return True

    def encode_state(self, state):
        t, kinds, dyn = state
        parts = [str(t)]
        for kind, (c, rho, hi_zero, last, c_init) in zip(kinds, dyn):
            parts.append(f"{kind}{int(hi_zero)}{last}{c_init + 1}:{c}:{rho}")
        return "|".join(parts)

    def state_size_bound(self):
        per = sum(len(str(-n.carry_bound)) + len(str(1 << self.fmt.frac)) + 8
                  for n in self.neurons)
        return per + len(str(self.word_length)) + 4


def build_fixed_nfa(net: Network, fmt: FixedFormat) -> FixedFnnNfa:
    """Automaton over (input bits, output bits) symbols, word length b,
    accepting exactly the encode pairs of the quantised evaluation map."""
    return FixedFnnNfa(net, fmt)


def relation_pairs(net: Network, fmt: FixedFormat):
    """The brute-force reference relation: per representable input vector,
    its sliced input word and the full joint word."""
    from .formats import encode, enumerate_values
    from .network import eval_quantised

    for combo in itertools.product(enumerate_values(fmt), repeat=net.input_dim):
        x_words = [encode(v, fmt) for v in combo]
        y = eval_quantised(net, list(combo), fmt)
        y_words = [encode(v, fmt) for v in y]
        x_word = tuple(tuple(w[t] for w in x_words) for t in range(fmt.bits))
        full = tuple(
            tuple(w[t] for w in x_words) + tuple(w[t] for w in y_words)
            for t in range(fmt.bits))
        yield x_word, full


def relation_words(net: Network, fmt: FixedFormat):
    """The brute-force reference relation as a word set."""
    return {full for _, full in relation_pairs(net, fmt)}


def language_equals_relation(net: Network, fmt: FixedFormat,
                             nfa: FixedFnnNfa | None = None,
                             max_states: int = 1 << 22):
    """Exact set equality of the automaton's language with the evaluation
    relation.  None means equal; otherwise a counterexample description.

    Enumerates the whole language through the subset construction; if that
    outgrows its budget, falls back to checking input word by input word
    against a pinned-input product.
    """
    from .errors import BudgetExceeded
    from .nfa import enumerate_language, io_language_matches

    if nfa is None:
        nfa = build_fixed_nfa(net, fmt)
    expected = relation_words(net, fmt)
    try:
        lang = enumerate_language(nfa, max_words=len(expected) + 8,
                                  max_states=max_states)
    except BudgetExceeded:
        return io_language_matches(nfa, net.input_dim, relation_pairs(net, fmt))
    if lang == expected:
        return None
    return ("symmetric difference", lang.symmetric_difference(expected))
