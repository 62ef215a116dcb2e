"""Succinct nondeterministic finite automata over fixed-length bit words.

An automaton is given implicitly: an initial-state enumerator, a transition
oracle, a successor enumerator and a final oracle over compact hashable state
descriptors.  All accepted words share one announced length.  Closure under
intersection and union goes through the synchronous product (union components
are completed with a dead sink so a run can survive a component dying);
emptiness is an explicit breadth-first reachability over exactly word_length
steps with parent links for witness extraction and hard state/time budgets.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

from .errors import BudgetExceeded, DimensionMismatch


class SuccinctNfa:
    """Base interface.  Subclasses fill in the oracles.

    States must be hashable and immutable; `encode_state` returns the compact
    descriptor whose length is audited against `state_size_bound` during
    exploration.
    """

    symbol_bits: int
    word_length: int

    def initial_states(self):
        raise NotImplementedError

    def successors(self, state, symbol):
        raise NotImplementedError

    def transition(self, state, symbol, target) -> bool:
        return target in set(self.successors(state, symbol))

    def is_final(self, state) -> bool:
        raise NotImplementedError

    def encode_state(self, state) -> str:
        return repr(state)

    def state_size_bound(self) -> int:
        return 10_000

    def symbols(self):
        return itertools.product((0, 1), repeat=self.symbol_bits)

    def accepts(self, word) -> bool:
        """Frontier simulation of a single word."""
        if len(word) != self.word_length:
            return False
        frontier = set(self.initial_states())
        for symbol in word:
            frontier = {t for q in frontier for t in self.successors(q, tuple(symbol))}
            if not frontier:
                return False
        return any(self.is_final(q) for q in frontier)


class ExplicitNfa(SuccinctNfa):
    """A table-defined automaton wrapped in the succinct interface; used by
    tests and as the lifted form of tiny languages."""

    def __init__(self, symbol_bits, word_length, initial, transitions, finals):
        self.symbol_bits = symbol_bits
        self.word_length = word_length
        self._initial = list(initial)
        self._transitions = {
            (q, tuple(sym)): set(targets) for (q, sym), targets in transitions.items()}
        self._finals = set(finals)

    @classmethod
    def from_words(cls, symbol_bits, words, word_length=None):
        """The automaton accepting exactly the given equal-length words, as a
        prefix tree."""
        words = [tuple(tuple(s) for s in w) for w in words]
        lengths = {len(w) for w in words}
        if len(lengths) > 1:
            raise DimensionMismatch("words must share one length")
        length = lengths.pop() if lengths else (word_length or 0)
        if word_length is not None and length != word_length:
            raise DimensionMismatch("words disagree with the declared length")
        transitions = {}
        finals = set()
        for word in words:
            prefix = ()
            for sym in word:
                transitions.setdefault((prefix, sym), set()).add(prefix + (sym,))
                prefix = prefix + (sym,)
            finals.add(prefix)
        return cls(symbol_bits, length, [()], transitions, finals)

    def initial_states(self):
        return list(self._initial)

    def successors(self, state, symbol):
        return sorted(self._transitions.get((state, tuple(symbol)), ()))

    def is_final(self, state):
        return state in self._finals


def universal_nfa(symbol_bits, word_length) -> ExplicitNfa:
    return ExplicitNfa(symbol_bits, word_length, ["*"],
                       {(("*"), sym): {"*"} for sym in
                        itertools.product((0, 1), repeat=symbol_bits)},
                       ["*"])


_SINK = "<dead>"


class ProductNfa(SuccinctNfa):
    """Synchronous product; intersection accepts when every component is
    final, union when at least one is.  Union runs components past their
    death through a dead sink so the others can still accept."""

    def __init__(self, components, mode="intersection"):
        if mode not in ("intersection", "union"):
            raise ValueError(mode)
        widths = {c.symbol_bits for c in components}
        lengths = {c.word_length for c in components}
        if len(widths) != 1 or len(lengths) != 1:
            raise DimensionMismatch("components must share alphabet and word length")
        self.components = list(components)
        self.mode = mode
        self.symbol_bits = widths.pop()
        self.word_length = lengths.pop()

    def initial_states(self):
        inits = []
        for c in self.components:
            states = list(c.initial_states())
            if not states:
                if self.mode == "intersection":
                    return []
                states = [_SINK]
            inits.append(states)
        return [tuple(combo) for combo in itertools.product(*inits)]

    def successors(self, state, symbol):
        per_component = []
        for c, q in zip(self.components, state):
            nxt = [] if q is _SINK else list(c.successors(q, symbol))
            if not nxt:
                if self.mode == "intersection":
                    return []
                nxt = [_SINK]
            per_component.append(nxt)
        return [tuple(combo) for combo in itertools.product(*per_component)]

    def transition(self, state, symbol, target):
        for c, q, t in zip(self.components, state, target):
            if q is _SINK or t is _SINK:
                dead = q is _SINK or not c.successors(q, symbol)
                if not (self.mode == "union" and dead and t is _SINK):
                    return False
            elif not c.transition(q, symbol, t):
                return False
        return True

    def is_final(self, state):
        flags = (q is not _SINK and c.is_final(q)
                 for c, q in zip(self.components, state))
        return all(flags) if self.mode == "intersection" else any(flags)

    def encode_state(self, state):
        return "|".join("-" if q is _SINK else c.encode_state(q)
                        for c, q in zip(self.components, state))

    def state_size_bound(self):
        # The combined descriptor is the sum of the parts (plus separators).
        return sum(c.state_size_bound() for c in self.components) + len(self.components)


def intersect(a: SuccinctNfa, b: SuccinctNfa, *rest) -> ProductNfa:
    return ProductNfa([a, b, *rest], "intersection")


def union(a: SuccinctNfa, b: SuccinctNfa, *rest) -> ProductNfa:
    return ProductNfa([a, b, *rest], "union")


class ProjectionNfa(SuccinctNfa):
    """Lift an automaton onto a wider joint alphabet: it reads only the bits
    at `indices` of each joint symbol and ignores the rest."""

    def __init__(self, inner: SuccinctNfa, indices, symbol_bits):
        if len(indices) != inner.symbol_bits:
            raise DimensionMismatch("index list must match the inner alphabet")
        if any(not 0 <= i < symbol_bits for i in indices):
            raise DimensionMismatch("projection index out of range")
        self.inner = inner
        self.indices = tuple(indices)
        self.symbol_bits = symbol_bits
        self.word_length = inner.word_length

    def _narrow(self, symbol):
        return tuple(symbol[i] for i in self.indices)

    def initial_states(self):
        return self.inner.initial_states()

    def successors(self, state, symbol):
        return self.inner.successors(state, self._narrow(symbol))

    def transition(self, state, symbol, target):
        return self.inner.transition(state, self._narrow(symbol), target)

    def is_final(self, state):
        return self.inner.is_final(state)

    def encode_state(self, state):
        return self.inner.encode_state(state)

    def state_size_bound(self):
        return self.inner.state_size_bound()


@dataclass
class ExplorationStats:
    explored: int = 0
    frontier_peak: int = 0
    seconds: float = 0.0


def is_empty(nfa: SuccinctNfa, max_states: int = 1 << 24,
             max_seconds: float | None = None, stats: ExplorationStats | None = None):
    """Return an accepted word, or None when the language is empty.

    Breadth-first over (depth, state) for exactly word_length steps,
    deduplicating by encoded descriptor; every returned witness is
    re-validated by stepping the transition oracle before being handed out.
    Exceeding a budget raises BudgetExceeded, distinct from both answers.
    """
    start = time.monotonic()
    bound = nfa.state_size_bound()
    explored = 0

    def admit(enc):
        nonlocal explored
        if len(enc) > bound:
            raise AssertionError(
                f"state descriptor of length {len(enc)} exceeds the declared bound {bound}")
        explored += 1
        if explored > max_states:
            raise BudgetExceeded(f"more than {max_states} states explored")
        if max_seconds is not None and time.monotonic() - start > max_seconds:
            raise BudgetExceeded(f"exploration exceeded {max_seconds} seconds")

    # parents[depth][enc] = (state, prev_enc, symbol)
    parents: list[dict] = [{}]
    for q in nfa.initial_states():
        enc = nfa.encode_state(q)
        if enc not in parents[0]:
            admit(enc)
            parents[0][enc] = (q, None, None)

    accept = None
    for depth in range(nfa.word_length):
        layer = {}
        for enc, (q, _, _) in parents[depth].items():
            for symbol in nfa.symbols():
                for target in nfa.successors(q, symbol):
                    tenc = nfa.encode_state(target)
                    if tenc not in layer:
                        admit(tenc)
                        layer[tenc] = (target, enc, symbol)
        parents.append(layer)
        if stats is not None:
            stats.frontier_peak = max(stats.frontier_peak, len(layer))
        if not layer:
            break

    if stats is not None:
        stats.explored = explored
        stats.seconds = time.monotonic() - start

    final_layer = parents[nfa.word_length] if len(parents) > nfa.word_length else {}
    for enc, (q, prev, symbol) in final_layer.items():
        if nfa.is_final(q):
            accept = (enc, q)
            break
    if accept is None:
        return None

    # Reconstruct the word, then audit it against the transition oracle.
    word = []
    states = [accept[1]]
    enc = accept[0]
    for depth in range(nfa.word_length, 0, -1):
        state, prev, symbol = parents[depth][enc]
        word.append(symbol)
        states.append(parents[depth - 1][prev][0])
        enc = prev
    word.reverse()
    states.reverse()
    for i, symbol in enumerate(word):
        if not nfa.transition(states[i], symbol, states[i + 1]):
            raise AssertionError("witness failed transition-oracle re-validation")
    if not nfa.is_final(states[-1]):
        raise AssertionError("witness does not end in a final state")
    return word


def io_language_matches(nfa: SuccinctNfa, input_bits: int, pairs,
                        max_states: int = 1 << 24):
    """Exact language check for relation automata, grouped by input word.

    `pairs` yields (input word over the first input_bits symbol positions,
    expected full word).  Every input word must admit exactly its expected
    full word - the union over all input words is the whole language, since
    each accepted word projects onto some input word.  Returns None when the
    languages agree, else a (input word, accepted set) counterexample.
    """
    for x_word, expected in pairs:
        pin = ExplicitNfa.from_words(input_bits, [x_word])
        # The pin component goes first so symbols off the pinned input die
        # before the expensive component is consulted.
        lifted = ProjectionNfa(pin, list(range(input_bits)), nfa.symbol_bits)
        got = enumerate_language(intersect(lifted, nfa), max_words=1 << 12,
                                 max_states=max_states)
        if got != {tuple(tuple(s) for s in expected)}:
            return (x_word, got)
    return None


def enumerate_language(nfa: SuccinctNfa, max_words: int = 1 << 20,
                       max_states: int = 1 << 24) -> set:
    """The accepted word set, via an on-the-fly subset construction.

    Builds the deterministic reachability DAG of state subsets level by
    level, marks the subsets that can still accept, and walks accepting
    paths.  Intended for desk-scale language-equality checks.
    """
    init = frozenset(nfa.initial_states())
    levels = [{init: []}]  # subset -> list of (parent subset, symbol)
    seen_states = 0
    for depth in range(nfa.word_length):
        nxt: dict = {}
        for subset in levels[depth]:
            for symbol in nfa.symbols():
                targets = frozenset(
                    t for q in subset for t in nfa.successors(q, symbol))
                if not targets:
                    continue
                seen_states += len(targets)
                if seen_states > max_states:
                    raise BudgetExceeded("language enumeration exceeded the state budget")
                nxt.setdefault(targets, []).append((subset, symbol))
        levels.append(nxt)

    accepting = {subset for subset in levels[nfa.word_length]
                 if any(nfa.is_final(q) for q in subset)}
    # Backward marking: which subsets at each level can reach acceptance.
    alive = [set() for _ in range(nfa.word_length + 1)]
    alive[nfa.word_length] = accepting
    for depth in range(nfa.word_length, 0, -1):
        for subset in alive[depth]:
            for parent, _ in levels[depth][subset]:
                alive[depth - 1].add(parent)

    words: set = set()

    def walk(depth, subset, suffix):
        if len(words) >= max_words:
            raise BudgetExceeded(f"language has more than {max_words} words")
        if depth == 0:
            words.add(tuple(reversed(suffix)))
            return
        for parent, symbol in levels[depth][subset]:
            if parent in alive[depth - 1]:
                walk(depth - 1, parent, suffix + [symbol])

    for subset in accepting:
        walk(nfa.word_length, subset, [])
    return words
