"""The succinct automaton for floating-point evaluation at small constant
exponent width.

Words follow the encode layout per dimension: sign, stored exponent bits
least-significant first, mantissa bits most-significant first.  Exponents
live in the word prefix, so by the time mantissa bits stream in, every
operand's scale is known and each arriving bit contributes an exact, known
weight.  Per neuron the state keeps one exact residual

    delta = (partial exact pre-activation) - (partial claimed output value)

where the claimed output word is read from the symbol for the last layer and
guessed bit-by-bit for hidden neurons (hidden claims also feed the next
layer's residuals).  At the end delta = pre - claim exactly, and acceptance
is a window check: the claim must be what round-with-flush-and-saturate
followed by ReLU makes of pre.  Alignment never needs a shift buffer because
the residual is exact; normalisation is absorbed by the claimed exponent;
the rounding decision is the final window comparison.

A residual that provably cannot reach its window given the largest possible
remaining contributions is dropped early, which keeps the reachable state
count flat as the mantissa width grows.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .errors import NotRepresentable, UnsupportedFormat
from .formats import FloatFormat, Rounding, pow2
from .network import Network, is_quantised
from .nfa import SuccinctNfa

DEFAULT_EXPONENT_CAP = 3


class FloatFnnNfa(SuccinctNfa):
    """States: (t, input signs, input stored exponents, claim descriptors,
    residuals)."""

    def __init__(self, net: Network, fmt: FloatFormat,
                 e_cap: int = DEFAULT_EXPONENT_CAP):
        if fmt.rounding is not Rounding.NEAREST_HALF_UP:
            raise UnsupportedFormat("float automaton supports nearest rounding only")
        if fmt.exponent > e_cap:
            raise UnsupportedFormat(
                f"exponent width {fmt.exponent} exceeds the cap {e_cap}")
        if net.depth > 2:
            raise UnsupportedFormat(
                "float pipelining beyond two layers is not reconstructed; "
                "route deeper networks to the brute-force backend")
        if not net.final_relu:
            raise UnsupportedFormat("float automaton expects ReLU on every layer")
        if not is_quantised(net, fmt):
            raise NotRepresentable("quantise the network to the format first")
        self.net = net
        self.fmt = fmt
        self.word_length = fmt.word_length
        self._in_dim = net.input_dim
        self.symbol_bits = net.input_dim + net.output_dim
        self.neurons = []  # (layer, index, weights, bias)
        for li, layer in enumerate(net.layers):
            for row in range(layer.out_dim):
                self.neurons.append(
                    (li, row, layer.weights[row], layer.bias[row]))
        self._hidden = [i for i, (li, *_brace) in enumerate(self.neurons)
                        if li < net.depth - 1]
        self._all_ones = (1 << fmt.exponent) - 1
        # Forward weights: hidden neuron index -> [(neuron pos, weight)]
        self._forward: dict[int, list] = {i: [] for i in self._hidden}
        if net.depth == 2:
            w1 = net.layers[0].out_dim
            for k in range(net.layers[1].out_dim):
                for h in range(w1):
                    self._forward[h].append(
                        (w1 + k, net.layers[1].weights[k][h]))
        self._size_bound = self._descriptor_bound()

    def _descriptor_bound(self):
        mx = self.fmt.max_value
        worst = Fraction(0)
        for _, _, weights, bias in self.neurons:
            worst = max(worst, sum((abs(w) for w in weights), start=Fraction(0)) * mx
                        + abs(bias) + mx)
        digits = len(str(worst.numerator)) + (self.fmt.bias + 2 * self.fmt.mantissa + 4)
        return (digits + 8) * len(self.neurons) \
            + 4 * self._in_dim + 6 * len(self.neurons) + 16

    # -- phases ------------------------------------------------------------

    def _phase(self, t):
        if t == 0:
            return "sign", None
        if t <= self.fmt.exponent:
            return "exponent", t - 1
        return "mantissa", t - self.fmt.exponent

    def initial_states(self):
        biases = tuple(bias for *_ignore, bias in self.neurons)
        claims = ((0, True, True),) * len(self.neurons)  # (S, allones, allzeros)
        return [(0, (0,) * self._in_dim, (0,) * self._in_dim, claims, biases)]

    def successors(self, state, symbol):
        t, signs, s_in, claims, deltas = state
        if t >= self.word_length:
            return []
        phase, pos = self._phase(t)
        x_bits = symbol[:self._in_dim]
        y_bits = symbol[self._in_dim:]
        fmt = self.fmt
        out = []

        hidden_domains = []
        for i in self._hidden:
            if phase == "sign":
                hidden_domains.append((0,))  # ReLU outputs are non-negative
            elif phase == "mantissa" and claims[i][0] == 0:
                hidden_domains.append((0,))  # zero claims have zero mantissas
            else:
                hidden_domains.append((0, 1))

        for combo in itertools.product(*hidden_domains):
            claim_bits = [0] * len(self.neurons)
            for i, v in zip(self._hidden, combo):
                claim_bits[i] = v
            dead = False
            for i, (li, idx, *_w) in enumerate(self.neurons):
                if li == self.net.depth - 1:
                    claim_bits[i] = y_bits[idx]

            if phase == "sign":
                if any(b for i, b in enumerate(claim_bits)
                       if self.neurons[i][0] == self.net.depth - 1):
                    continue  # ReLU outputs cannot be negative
                new_state = (1, tuple(x_bits), s_in, claims, deltas)
                out.append(new_state)
                continue

            if phase == "exponent":
                new_s_in = tuple(s + (b << pos) for s, b in zip(s_in, x_bits))
                new_claims = tuple(
                    (s + (claim_bits[i] << pos), ones, zeros)
                    for i, (s, ones, zeros) in enumerate(claims))
                if t == fmt.exponent:
                    stepped = self._close_prefix(signs, new_s_in, new_claims, deltas)
                    if stepped is None:
                        continue
                    out.append((t + 1,) + stepped)
                else:
                    out.append((t + 1, signs, new_s_in, new_claims, deltas))
                continue

            # mantissa phase
            j = pos
            new_deltas = list(deltas)
            new_claims = list(claims)
            for dim in range(self._in_dim):
                bit = x_bits[dim]
                if s_in[dim] == 0:
                    if bit:  # non-canonical zero word
                        dead = True
                        break
                    continue
                if bit:
                    value = pow2(s_in[dim] - fmt.bias - j)
                    if signs[dim]:
                        value = -value
                    for i, (li, _idx, weights, _b) in enumerate(self.neurons):
                        if li == 0:
                            new_deltas[i] = new_deltas[i] + weights[dim] * value
            if dead:
                continue
            for i in range(len(self.neurons)):
                s_y, ones, zeros = new_claims[i]
                bit = claim_bits[i]
                if s_y == 0:
                    if bit:
                        dead = True
                        break
                    continue
                if bit:
                    value = pow2(s_y - fmt.bias - j)
                    new_deltas[i] = new_deltas[i] - value
                    for k, w in self._forward.get(i, ()):
                        new_deltas[k] = new_deltas[k] + w * value
                new_claims[i] = (s_y, ones and bit == 1, zeros and bit == 0)
            if dead:
                continue
            nxt = (t + 1, signs, s_in, tuple(new_claims), tuple(new_deltas))
            if self._viable(nxt):
                out.append(nxt)
        return out

    def _close_prefix(self, signs, s_in, claims, deltas):
        """End of the exponent fields: reject reserved patterns, then add
        every nonzero stream's hidden leading-one contribution."""
        fmt = self.fmt
        for dim, s in enumerate(s_in):
            if s == self._all_ones:
                return None
            if s == 0 and signs[dim]:
                return None  # zero has the all-zero word only
        for s, _ones, _zeros in claims:
            if s == self._all_ones:
                return None
        new_deltas = list(deltas)
        for dim in range(self._in_dim):
            if s_in[dim] == 0:
                continue
            value = pow2(s_in[dim] - fmt.bias)
            if signs[dim]:
                value = -value
            for i, (li, _idx, weights, _b) in enumerate(self.neurons):
                if li == 0:
                    new_deltas[i] = new_deltas[i] + weights[dim] * value
        for i, (s_y, _ones, _zeros) in enumerate(claims):
            if s_y == 0:
                continue
            value = pow2(s_y - fmt.bias)
            new_deltas[i] = new_deltas[i] - value
            for k, w in self._forward.get(i, ()):
                new_deltas[k] = new_deltas[k] + w * value
        return signs, s_in, claims, tuple(new_deltas)

    # -- early residual pruning ---------------------------------------------

    def _stream_tail(self, stored, consumed):
        """Largest possible value of the remaining mantissa bits of a stream
        with stored exponent `stored` after `consumed` mantissa steps."""
        fmt = self.fmt
        if stored == 0 or consumed >= fmt.mantissa:
            return Fraction(0)
        return pow2(stored - fmt.bias) * (
            pow2(-consumed) - pow2(-fmt.mantissa))

    def _viable(self, state):
        t, signs, s_in, claims, deltas = state
        fmt = self.fmt
        # A state at time t has consumed positions 0..t-1, of which the
        # mantissa ones are e+1..t-1.
        consumed = t - fmt.exponent - 1
        in_tails = [self._stream_tail(s, consumed) for s in s_in]
        claim_tails = [self._stream_tail(s, consumed) for s, _o, _z in claims]
        for i, (li, _idx, weights, _b) in enumerate(self.neurons):
            s_y, ones, zeros = claims[i]
            if li == 0:
                fut_pre = sum((abs(w) * tl for w, tl in zip(weights, in_tails)),
                              start=Fraction(0))
            else:
                w1 = self.net.layers[0].out_dim
                fut_pre = sum((abs(weights[h]) * claim_tails[h] for h in range(w1)),
                              start=Fraction(0))
            delta = deltas[i]
            if s_y == 0:
                thr = fmt.min_normal - pow2(fmt.emin - fmt.mantissa - 2)
                if delta - fut_pre >= thr:
                    return False
                continue
            fut = fut_pre + claim_tails[i]
            ulp = pow2(s_y - fmt.bias - fmt.mantissa)
            max_eligible = ones and (s_y - fmt.bias == fmt.emax)
            if delta + fut < -ulp / 2:
                return False
            if not max_eligible and delta - fut >= ulp / 2:
                return False
        return True

    # -- acceptance -----------------------------------------------------------

    def is_final(self, state):
        t, signs, s_in, claims, deltas = state
        if t != self.word_length:
            return False
        fmt = self.fmt
        for (s_y, ones, zeros), delta in zip(claims, deltas):
            # delta = pre - claim_value exactly; claim_value = 0 when s_y = 0.
            if s_y == 0:
                # relu(to_format(pre)) = 0 iff pre rounds below the smallest
                # normal (the tie at the threshold rounds up, away from 0).
                thr = fmt.min_normal - pow2(fmt.emin - fmt.mantissa - 2)
                if not delta < thr:
                    return False
                continue
            e_val = s_y - fmt.bias
            ulp = pow2(e_val - fmt.mantissa)
            # Gap to the next grid point toward zero halves at a power of two.
            d_lo = ulp / 2 if zeros else ulp
            if ones and e_val == fmt.emax:
                # The largest finite value also absorbs everything that
                # rounds beyond it (saturation).
                if not delta >= -d_lo / 2:
                    return False
            else:
                if not (-d_lo / 2 <= delta < ulp / 2):
                    return False
        return True

    def encode_state(self, state):
        t, signs, s_in, claims, deltas = state
        parts = [str(t), "".join(map(str, signs)),
                 ",".join(map(str, s_in))]
        for (s_y, ones, zeros), delta in zip(claims, deltas):
            parts.append(f"{s_y}{int(ones)}{int(zeros)}:{delta}")
        return "|".join(parts)

    def state_size_bound(self):
        return self._size_bound


def build_float_nfa(net: Network, fmt: FloatFormat,
                    e_cap: int = DEFAULT_EXPONENT_CAP) -> FloatFnnNfa:
    """Automaton over (input bits, output bits) symbols in the float word
    layout, accepting exactly the encode pairs of the quantised evaluation."""
    return FloatFnnNfa(net, fmt, e_cap)


def relation_pairs(net: Network, fmt: FloatFormat):
    """Per representable input vector, the sliced input word and full word."""
    from .formats import encode, enumerate_values
    from .network import eval_quantised

    for combo in itertools.product(enumerate_values(fmt), repeat=net.input_dim):
        x_words = [encode(v, fmt) for v in combo]
        y = eval_quantised(net, list(combo), fmt)
        y_words = [encode(v, fmt) for v in y]
        length = fmt.word_length
        x_word = tuple(tuple(w[t] for w in x_words) for t in range(length))
        full = tuple(
            tuple(w[t] for w in x_words) + tuple(w[t] for w in y_words)
            for t in range(length))
        yield x_word, full


def relation_words(net: Network, fmt: FloatFormat):
    return {full for _, full in relation_pairs(net, fmt)}


def language_equals_relation(net: Network, fmt: FloatFormat,
                             nfa: FloatFnnNfa | None = None,
                             max_states: int = 1 << 22):
    """None when the automaton's language equals the evaluation relation."""
    from .errors import BudgetExceeded
    from .nfa import enumerate_language, io_language_matches

    if nfa is None:
        nfa = build_float_nfa(net, fmt, e_cap=max(fmt.exponent, DEFAULT_EXPONENT_CAP))
    expected = relation_words(net, fmt)
    try:
        lang = enumerate_language(nfa, max_words=len(expected) + 8,
                                  max_states=max_states)
    except BudgetExceeded:
        return io_language_matches(nfa, net.input_dim, relation_pairs(net, fmt))
    if lang == expected:
        return None
    return ("symmetric difference", lang.symmetric_difference(expected))
