"""Succinct automata accepting the models of a bit-vector formula.

The formula is brought into negation normal form; each (possibly negated)
equality atom becomes a two-field automaton state (bit counter, equality
flag), and the NNF tree is mirrored by automaton union/intersection.
Symbols are bit-slices of the declared variables, position j carrying bit j
of every variable's word.
"""

from __future__ import annotations

from .bitvec import BvConst, BvNot, BvSpec, BvVar, NnfAtom, to_nnf
from .nfa import ProductNfa, SuccinctNfa


def eval_slice(term, j: int, slice_bits, variables) -> int:
    """Bit j of a term's value, from the j-th bit-slice of the variables.

    Purely bitwise operators act slice-locally, which is what makes the
    automaton's per-step transition well defined.
    """
    if isinstance(term, BvVar):
        return slice_bits[variables.index(term.name)]
    if isinstance(term, BvConst):
        return (term.value >> j) & 1
    if isinstance(term, BvNot):
        return 1 - eval_slice(term.operand, j, slice_bits, variables)
    left = eval_slice(term.left, j, slice_bits, variables)
    right = eval_slice(term.right, j, slice_bits, variables)
    name = type(term).__name__
    if name == "BvAnd":
        return left & right
    if name == "BvOr":
        return left | right
    return left ^ right


class BvAtomNfa(SuccinctNfa):
    """Recogniser for one equality atom (t1 = t2) or its negation.

    State (j, f_eq): after j slices, f_eq says whether the terms agreed on
    every position so far.  f_eq is monotone non-increasing (a sink once 0).
    Acceptance at j = width wants f_eq = 1 for an equality and 0 for a
    negated one.
    """

    def __init__(self, atom: NnfAtom, width: int, variables: tuple[str, ...]):
        self.atom = atom
        self.word_length = width
        self.variables = variables
        self.symbol_bits = len(variables)

    def initial_states(self):
        return [(0, 1)]

    def successors(self, state, symbol):
        j, f_eq = state
        if j >= self.word_length:
            return []
        same = (eval_slice(self.atom.left, j, symbol, self.variables)
                == eval_slice(self.atom.right, j, symbol, self.variables))
        return [(j + 1, f_eq & (1 if same else 0))]

    def transition(self, state, symbol, target):
        return target in self.successors(state, symbol)

    def is_final(self, state):
        j, f_eq = state
        if j != self.word_length:
            return False
        return f_eq == (0 if self.atom.negated else 1)

    def encode_state(self, state):
        return f"{state[0]}:{state[1]}"

    def state_size_bound(self):
        return len(str(self.word_length)) + 2


def build_bv_nfa(spec: BvSpec) -> SuccinctNfa:
    """An automaton whose language is exactly the model set of the formula,
    as words of `width` slices over the declared variable order."""
    nnf = to_nnf(spec.formula)

    def build(node):
        if isinstance(node, NnfAtom):
            return BvAtomNfa(node, spec.width, spec.variables)
        parts = [build(child) for child in node.children]
        mode = "intersection" if node.op == "and" else "union"
        return ProductNfa(parts, mode)

    return build(nnf)


def assignment_to_word(spec: BvSpec, assignment: dict[str, int]):
    """Serialise an assignment as the slice word the automaton reads."""
    return [tuple((assignment[name] >> j) & 1 for name in spec.variables)
            for j in range(spec.width)]


def word_to_assignment(spec: BvSpec, word) -> dict[str, int]:
    values = {name: 0 for name in spec.variables}
    for j, slice_bits in enumerate(word):
        for name, bit in zip(spec.variables, slice_bits):
            values[name] |= bit << j
    return values
