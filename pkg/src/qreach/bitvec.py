"""Fixed-width bit-vector logic: terms, formulas, parsing, model checking.

Terms are purely bitwise (not/and/or/xor) over variables and constants of a
shared width; formulas are equalities, negation and conjunction.  Bit i of a
word is the coefficient of 2^i, so assignments are plain ints in [0, 2^l).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError, SearchSpaceTooLarge, UnboundVariable, WidthMismatch


@dataclass(frozen=True)
class BvVar:
    name: str


@dataclass(frozen=True)
class BvConst:
    value: int


@dataclass(frozen=True)
class BvNot:
    operand: "BvTerm"


@dataclass(frozen=True)
class BvAnd:
    left: "BvTerm"
    right: "BvTerm"


@dataclass(frozen=True)
class BvOr:
    left: "BvTerm"
    right: "BvTerm"


@dataclass(frozen=True)
class BvXor:
    # Not part of the minimal grammar but handled natively by the slice
    # evaluator; desugar_xor gives the equivalent and/or/not form.
    left: "BvTerm"
    right: "BvTerm"


BvTerm = BvVar | BvConst | BvNot | BvAnd | BvOr | BvXor


@dataclass(frozen=True)
class BvEq:
    left: BvTerm
    right: BvTerm


@dataclass(frozen=True)
class BvNeg:
    operand: "BvFormula"


@dataclass(frozen=True)
class BvConj:
    left: "BvFormula"
    right: "BvFormula"


BvFormula = BvEq | BvNeg | BvConj


@dataclass(frozen=True)
class BvSpec:
    """A formula together with its width and ordered variable list."""

    width: int
    variables: tuple[str, ...]
    formula: BvFormula

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("width must be positive")
        mentioned = term_variables(self.formula)
        missing = mentioned - set(self.variables)
        if missing:
            raise UnboundVariable(f"undeclared variables: {sorted(missing)}")
        for c in _constants(self.formula):
            if not 0 <= c < (1 << self.width):
                raise WidthMismatch(f"constant {c} does not fit in {self.width} bits")


def term_variables(node) -> set[str]:
    if isinstance(node, BvVar):
        return {node.name}
    if isinstance(node, BvConst):
        return set()
    if isinstance(node, (BvNot, BvNeg)):
        return term_variables(node.operand)
    return term_variables(node.left) | term_variables(node.right)


def _constants(node):
    if isinstance(node, BvConst):
        yield node.value
    elif isinstance(node, (BvNot, BvNeg)):
        yield from _constants(node.operand)
    elif not isinstance(node, BvVar):
        yield from _constants(node.left)
        yield from _constants(node.right)


def term_value(term, assignment: dict[str, int], width: int) -> int:
    mask = (1 << width) - 1
    if isinstance(term, BvVar):
        try:
            return assignment[term.name] & mask
        except KeyError:
            raise UnboundVariable(term.name) from None
    if isinstance(term, BvConst):
        return term.value & mask
    if isinstance(term, BvNot):
        return ~term_value(term.operand, assignment, width) & mask
    lhs = term_value(term.left, assignment, width)
    rhs = term_value(term.right, assignment, width)
    if isinstance(term, BvAnd):
        return lhs & rhs
    if isinstance(term, BvOr):
        return lhs | rhs
    if isinstance(term, BvXor):
        return lhs ^ rhs
    raise TypeError(term)


def model_check(spec: BvSpec, assignment: dict[str, int]) -> bool:
    """Truth of the formula under a total assignment, bottom-up."""
    for name in spec.variables:
        if name not in assignment:
            raise UnboundVariable(name)
        if not 0 <= assignment[name] < (1 << spec.width):
            raise WidthMismatch(
                f"value of {name} does not fit in {spec.width} bits")

    def go(f) -> bool:
        if isinstance(f, BvEq):
            return (term_value(f.left, assignment, spec.width)
                    == term_value(f.right, assignment, spec.width))
        if isinstance(f, BvNeg):
            return not go(f.operand)
        if isinstance(f, BvConj):
            return go(f.left) and go(f.right)
        raise TypeError(f)

    return go(spec.formula)


def sat_bruteforce(spec: BvSpec, cap: int = 1 << 22):
    """First model in lexicographic order, or None.  Guarded enumeration."""
    space = (1 << spec.width) ** len(spec.variables)
    if space > cap:
        raise SearchSpaceTooLarge(f"{space} assignments exceed the cap {cap}")
    names = spec.variables
    values = [0] * len(names)
    top = 1 << spec.width
    while True:
        assignment = dict(zip(names, values))
        if model_check(spec, assignment):
            return assignment
        for i in range(len(values) - 1, -1, -1):
            values[i] += 1
            if values[i] < top:
                break
            values[i] = 0
        else:
            return None


def desugar_xor(term):
    """Rewrite xor as (a|b) & ~(a&b), recursively."""
    if isinstance(term, (BvVar, BvConst)):
        return term
    if isinstance(term, BvNot):
        return BvNot(desugar_xor(term.operand))
    left, right = desugar_xor(term.left), desugar_xor(term.right)
    if isinstance(term, BvXor):
        return BvAnd(BvOr(left, right), BvNot(BvAnd(left, right)))
    return type(term)(left, right)


def desugar_xor_formula(formula):
    if isinstance(formula, BvEq):
        return BvEq(desugar_xor(formula.left), desugar_xor(formula.right))
    if isinstance(formula, BvNeg):
        return BvNeg(desugar_xor_formula(formula.operand))
    return BvConj(desugar_xor_formula(formula.left), desugar_xor_formula(formula.right))


# ---------------------------------------------------------------------------
# Negation normal form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NnfAtom:
    """(t1 = t2) or its negation."""

    left: BvTerm
    right: BvTerm
    negated: bool


@dataclass(frozen=True)
class NnfNode:
    op: str  # "and" | "or"
    children: tuple


def to_nnf(formula, negate: bool = False):
    """Push negations to the atoms; conjunction dualises to disjunction."""
    if isinstance(formula, BvEq):
        return NnfAtom(formula.left, formula.right, negate)
    if isinstance(formula, BvNeg):
        return to_nnf(formula.operand, not negate)
    if isinstance(formula, BvConj):
        return NnfNode("or" if negate else "and",
                       (to_nnf(formula.left, negate), to_nnf(formula.right, negate)))
    raise TypeError(formula)


def nnf_check(node, assignment: dict[str, int], width: int) -> bool:
    if isinstance(node, NnfAtom):
        eq = (term_value(node.left, assignment, width)
              == term_value(node.right, assignment, width))
        return eq != node.negated
    results = (nnf_check(c, assignment, width) for c in node.children)
    return all(results) if node.op == "and" else any(results)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_BV_TOKEN_RE = re.compile(
    r"\s*(?:(?P<const>0b[01]+|0x[0-9a-fA-F]+|\d+)|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>\^|&&|/\\|=|&|\||~|\(|\)))")


def _bv_tokenize(text: str):
    tokens, pos = [], 0
    while pos < len(text):
        m = _BV_TOKEN_RE.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ParseError(f"bad token at {text[pos:].strip()[:10]!r}")
            break
        for kind in ("const", "name", "op"):
            if m.group(kind):
                tokens.append((kind, m.group(kind)))
                break
        pos = m.end()
    return tokens


class _BvParser:
    """Recursive descent with backtracking: `~` and `(` are shared between
    the term and formula levels, so equalities are tried first."""

    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self, kind, value=None):
        k, v = self.peek()
        if k != kind or (value is not None and v != value):
            raise ParseError(f"expected {value or kind}, found {v!r}")
        self.pos += 1
        return v

    def formula(self):
        node = self.formula_unary()
        while self.peek() == ("op", "/\\") or self.peek() == ("op", "&&"):
            self.pos += 1
            node = BvConj(node, self.formula_unary())
        return node

    def formula_unary(self):
        # An equality wins every ambiguous prefix, so `~` and `(` act on
        # terms whenever the whole thing parses as t1 = t2.
        save = self.pos
        try:
            return self.equality()
        except ParseError:
            self.pos = save
        k, v = self.peek()
        if (k, v) == ("op", "~"):
            self.pos += 1
            return BvNeg(self.formula_unary())
        self.take("op", "(")
        node = self.formula()
        self.take("op", ")")
        return node

    def equality(self):
        left = self.term()
        self.take("op", "=")
        right = self.term()
        return BvEq(left, right)

    def term(self):
        node = self.term_unary()
        while True:
            k, v = self.peek()
            if (k, v) in (("op", "&"), ("op", "|"), ("op", "^")):
                self.pos += 1
                rhs = self.term_unary()
                node = {"&": BvAnd, "|": BvOr, "^": BvXor}[v](node, rhs)
            else:
                return node

    def term_unary(self):
        k, v = self.peek()
        if (k, v) == ("op", "~"):
            self.pos += 1
            return BvNot(self.term_unary())
        if (k, v) == ("op", "("):
            self.pos += 1
            node = self.term()
            self.take("op", ")")
            return node
        if k == "const":
            self.pos += 1
            return BvConst(int(v, 0))
        if k == "name":
            self.pos += 1
            return BvVar(v)
        raise ParseError(f"expected a term, found {v!r}")


def parse_bv(text: str, width: int, variables=None) -> BvSpec:
    """Parse a formula; constants in decimal, 0b... or 0x...."""
    tokens = _bv_tokenize(text)
    parser = _BvParser(tokens)
    formula = parser.formula()
    if parser.pos != len(tokens):
        raise ParseError(f"trailing tokens after formula: {tokens[parser.pos:]}")
    if variables is None:
        variables = tuple(sorted(term_variables(formula)))
    return BvSpec(width, tuple(variables), formula)


def format_bv_term(term) -> str:
    if isinstance(term, BvVar):
        return term.name
    if isinstance(term, BvConst):
        return f"0b{term.value:b}" if term.value else "0"
    if isinstance(term, BvNot):
        return f"~{format_bv_term(term.operand)}"
    op = {BvAnd: "&", BvOr: "|", BvXor: "^"}[type(term)]
    return f"({format_bv_term(term.left)} {op} {format_bv_term(term.right)})"


def format_bv(formula) -> str:
    if isinstance(formula, BvEq):
        return f"{format_bv_term(formula.left)} = {format_bv_term(formula.right)}"
    if isinstance(formula, BvNeg):
        return f"~({format_bv(formula.operand)})"
    return f"({format_bv(formula.left)}) /\\ ({format_bv(formula.right)})"
