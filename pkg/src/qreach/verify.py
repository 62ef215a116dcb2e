"""The five reachability decision problems over selectable backends.

Every "valid" verdict carries a witness that has been re-validated through an
independent code path (exact evaluation plus specification checking) before
being reported; a failed re-validation is an internal error, never an answer.
Resource exhaustion is a third verdict, distinct from valid/invalid.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from fractions import Fraction

from .bitvec import BvSpec, model_check
from .errors import (
    BackendUnavailable, BudgetExceeded, DimensionMismatch, ParseError,
    SearchSpaceTooLarge, UnsupportedFormat, WidthMismatch,
)
from .formats import (
    ArithmeticFormat, FixedFormat, decode, encode, enumerate_values,
    format_rational, parse_rational,
)
from .linprog import (
    Constraint, LinearProgram, check_lp, check_lp_quantised, feasible,
    quantise_lp,
)
from .network import (
    Network, eval_quantised, eval_quantised_batch, eval_rational, quantise,
)
from .nfa import ExplorationStats, ProjectionNfa, intersect, is_empty
from .nfa_bv import build_bv_nfa
from .nfa_fixed import build_fixed_nfa
from .nfa_float import DEFAULT_EXPONENT_CAP, build_float_nfa

VALID, INVALID, RESOURCE = "valid", "invalid", "resource"


@dataclass
class Caps:
    """Enumeration budgets; exceeding one yields a resource verdict."""

    max_inputs: int = 1 << 22
    max_patterns: int = 1 << 20
    max_states: int = 1 << 24
    max_seconds: float | None = None
    float_e_cap: int = DEFAULT_EXPONENT_CAP

    @classmethod
    def from_env(cls, env=os.environ) -> "Caps":
        caps = cls()
        for attr, name in (("max_inputs", "QREACH_MAX_INPUTS"),
                           ("max_patterns", "QREACH_MAX_PATTERNS"),
                           ("max_states", "QREACH_MAX_STATES"),
                           ("float_e_cap", "QREACH_FLOAT_E_CAP")):
            if name in env:
                setattr(caps, attr, int(env[name]))
        if "QREACH_MAX_SECONDS" in env:
            caps.max_seconds = float(env["QREACH_MAX_SECONDS"])
        return caps


@dataclass
class Verdict:
    problem: str
    backend: str
    status: str
    witness_input: list[Fraction] | None = None
    witness_output: list[Fraction] | None = None
    reason: str = ""
    stats: dict = field(default_factory=dict)
    # Bit-level view of the witness, filled by the automata backend:
    # per-dimension words (position 0 first) plus a layout tag.
    witness_words: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return self.status == VALID


def _witness_words(x, y, fmt) -> dict:
    layout = ("fixed:lsb-first-twos-complement" if isinstance(fmt, FixedFormat)
              else "float:sign-exponent-mantissa")
    return {
        "layout": layout,
        "input": ["".join(str(b) for b in encode(v, fmt)) for v in x],
        "output": ["".join(str(b) for b in encode(v, fmt)) for v in y],
    }


def _verdict_stats(**kw):
    return {k: v for k, v in kw.items() if v is not None}


# ---------------------------------------------------------------------------
# Activation-pattern + exact LP backend
# ---------------------------------------------------------------------------

def _box_constraints(lp: LinearProgram, n: int) -> list[Constraint]:
    if lp.n_vars > n:
        raise DimensionMismatch(
            f"specification mentions x{lp.n_vars} but the network side has {n}")
    return [Constraint(c.coeffs + (Fraction(0),) * (n - lp.n_vars), c.rel, c.bound)
            for c in lp.constraints]


def reach_q_lp(net: Network, l1: LinearProgram, l2: LinearProgram,
               caps: Caps | None = None) -> Verdict:
    """Rational reachability: does some input satisfying L1 produce an output
    satisfying L2?

    Walks the activation patterns depth-first.  Under a fixed pattern prefix
    the network is affine, so neurons are eliminated by substitution and the
    LPs stay in input space; an infeasible prefix prunes its entire subtree,
    which decides exactly the same "some pattern's LP is feasible" question
    as full enumeration.
    """
    caps = caps or Caps()
    d = net.input_dim
    base = _box_constraints(l1, d)
    out_box = _box_constraints(l2, net.output_dim)
    relu_layers = set(net.relu_layer_indices())
    explored = 0

    # Affine forms over the inputs: vector of d coefficients plus a constant.
    def affine_layer(layer, prev):
        rows = []
        for row, bias in zip(layer.weights, layer.bias):
            coeffs = [Fraction(0)] * d
            const = Fraction(bias)
            for w, (pc, pconst) in zip(row, prev):
                if w:
                    for j in range(d):
                        coeffs[j] += w * pc[j]
                    const += w * pconst
            rows.append((coeffs, const))
        return rows

    identity = [([Fraction(int(i == j)) for j in range(d)], Fraction(0))
                for i in range(d)]

    def search(li, prev, constraints, seen):
        nonlocal explored
        if li == net.depth:
            rows = list(constraints)
            for c in out_box:
                coeffs = [Fraction(0)] * d
                const = Fraction(0)
                for a, (pc, pconst) in zip(c.coeffs, prev):
                    if a:
                        for j in range(d):
                            coeffs[j] += a * pc[j]
                        const += a * pconst
                rows.append(Constraint(tuple(coeffs), c.rel, c.bound - const))
            witness = feasible(LinearProgram(d, tuple(rows)))
            return witness
        pre = affine_layer(net.layers[li], prev)
        if li not in relu_layers:
            return search(li + 1, pre, constraints, seen)

        def fix(node, acc_prev, constraints, seen):
            nonlocal explored
            if node == len(pre):
                return search(li + 1, acc_prev, constraints, seen)
            explored += 1
            if explored > caps.max_patterns:
                raise BudgetExceeded(
                    f"more than {caps.max_patterns} pattern branches explored")
            coeffs, const = pre[node]
            # Active branch: pre >= 0, node passes its affine form through.
            row = Constraint(tuple(-c for c in coeffs), "<=", const)
            if row in seen:  # passthrough of a known-nonnegative form
                got = fix(node + 1, acc_prev + [pre[node]], constraints, seen)
                if got is not None:
                    return got
            else:
                active = constraints + (row,)
                if feasible(LinearProgram(d, active)) is not None:
                    got = fix(node + 1, acc_prev + [pre[node]], active,
                              seen | {row})
                    if got is not None:
                        return got
            # Inactive branch, explored strictly: on pre = 0 both branches
            # continue identically point for point, and those points already
            # live in the active branch, so pre < 0 loses no witness and
            # stops boundary nodes from doubling the search.
            row = Constraint(tuple(coeffs), "<", -const)
            if row in seen:
                return fix(node + 1,
                           acc_prev + [([Fraction(0)] * d, Fraction(0))],
                           constraints, seen)
            inactive = constraints + (row,)
            if feasible(LinearProgram(d, inactive)) is not None:
                got = fix(node + 1,
                          acc_prev + [([Fraction(0)] * d, Fraction(0))],
                          inactive, seen | {row})
                if got is not None:
                    return got
            return None

        return fix(0, [], constraints, seen)

    try:
        witness = search(0, identity, tuple(base), frozenset(base))
    except BudgetExceeded as exc:
        return Verdict("reach-q-lp", "pattern-lp", RESOURCE, reason=str(exc),
                       stats=_verdict_stats(patterns=explored))
    if witness is None:
        return Verdict("reach-q-lp", "pattern-lp", INVALID,
                       stats=_verdict_stats(patterns=explored))
    x = witness[:d]
    y = eval_rational(net, x)
    if not (check_lp(l1, x) and check_lp(l2, y)):
        raise AssertionError("pattern-LP witness failed independent re-validation")
    return Verdict("reach-q-lp", "pattern-lp", VALID, x, y,
                   stats=_verdict_stats(patterns=explored))


# ---------------------------------------------------------------------------
# Brute-force enumeration backends
# ---------------------------------------------------------------------------

def _input_space_guard(fmt: ArithmeticFormat, dim: int, cap: int) -> int:
    count = len(enumerate_values(fmt)) ** dim
    if count > cap:
        raise SearchSpaceTooLarge(f"{count} candidate inputs exceed the cap {cap}")
    return count


def reach_f_lp(net: Network, l1: LinearProgram, l2: LinearProgram,
               fmt: ArithmeticFormat, caps: Caps | None = None,
               use_batch: bool = True) -> Verdict:
    """Quantised-network reachability against quantised linear constraints,
    by enumeration of the representable input space."""
    caps = caps or Caps()
    if not all(len(c.coeffs) <= net.input_dim for c in l1.constraints):
        raise DimensionMismatch("L1 width exceeds the input dimension")
    d = net.input_dim
    try:
        count = _input_space_guard(fmt, d, caps.max_inputs)
    except SearchSpaceTooLarge as exc:
        return Verdict("reach-f-lp", "brute", RESOURCE, reason=str(exc))
    l1p = LinearProgram(d, tuple(_box_constraints(l1, d)))
    l2p = LinearProgram(net.output_dim, tuple(_box_constraints(l2, net.output_dim)))

    if use_batch and isinstance(fmt, FixedFormat):
        got = _reach_f_lp_batch(net, l1p, l2p, fmt)
        if got is not NotImplemented:
            x = got
            if x is None:
                return Verdict("reach-f-lp", "brute", INVALID,
                               stats=_verdict_stats(inputs=count))
            y = eval_quantised(net, x, fmt)
            if not (check_lp_quantised(l1p, x, fmt) and check_lp_quantised(l2p, y, fmt)):
                raise AssertionError("batch witness failed scalar re-validation")
            return Verdict("reach-f-lp", "brute", VALID, x, y,
                           stats=_verdict_stats(inputs=count))

    values = enumerate_values(fmt)
    for combo in itertools.product(values, repeat=d):
        x = list(combo)
        if not check_lp_quantised(l1p, x, fmt):
            continue
        y = eval_quantised(net, x, fmt)
        if check_lp_quantised(l2p, y, fmt):
            return Verdict("reach-f-lp", "brute", VALID, x, y,
                           stats=_verdict_stats(inputs=count))
    return Verdict("reach-f-lp", "brute", INVALID, stats=_verdict_stats(inputs=count))


def _reach_f_lp_batch(net, l1, l2, fmt):
    """Vectorised scan of the whole input grid; returns the first admissible
    input vector, None, or NotImplemented when int64 cannot carry it."""
    import numpy as np

    from .formats import Overflow, Rounding, to_format

    if fmt.rounding is Rounding.TOWARD_ZERO:
        return NotImplemented
    d = net.input_dim
    scale = 1 << fmt.frac
    grid = np.arange(fmt.min_scaled, fmt.max_scaled + 1, dtype=np.int64)
    mesh = np.meshgrid(*([grid] * d), indexing="ij")
    xs = np.stack([m.reshape(-1) for m in mesh], axis=1)
    try:
        ys = eval_quantised_batch(net, fmt, xs)
    except (OverflowError, NotImplementedError):
        return NotImplemented

    def lp_mask(lp, mat):
        mask = np.ones(mat.shape[0], dtype=bool)
        for c in quantise_lp(lp, fmt).constraints:
            coeffs = np.array([int(a * scale) for a in c.coeffs], dtype=np.int64)
            if np.abs(coeffs).sum() * max(abs(fmt.min_scaled), fmt.max_scaled) \
                    + scale >= 2 ** 62:
                raise OverflowError
            lhs = mat @ coeffs  # exact, scaled by 2^(2f)
            if fmt.rounding is Rounding.NEAREST_HALF_UP:
                r = (lhs + (scale >> 1)) >> fmt.frac if fmt.frac else lhs
            else:
                r = lhs >> fmt.frac if fmt.frac else lhs
            if fmt.overflow is Overflow.SATURATE:
                r = np.clip(r, fmt.min_scaled, fmt.max_scaled)
            else:
                span = 1 << fmt.bits
                r = (r - fmt.min_scaled) % span + fmt.min_scaled
            bound = to_format(c.bound, fmt) * scale
            b = int(bound)
            ok = {"<": r < b, "<=": r <= b, "=": r == b,
                  ">=": r >= b, ">": r > b}[c.rel]
            mask &= ok
        return mask

    try:
        mask = lp_mask(l1, xs) & lp_mask(l2, ys)
    except OverflowError:
        return NotImplemented
    hits = np.flatnonzero(mask)
    if hits.size == 0:
        return None
    row = xs[hits[0]]
    return [Fraction(int(v), scale) for v in row]


def reach_lp(net: Network, l1: LinearProgram, l2: LinearProgram,
             fmt: ArithmeticFormat, caps: Caps | None = None) -> Verdict:
    """Dynamic quantisation: quantise the network and both specifications,
    then decide the quantised problem."""
    verdict = reach_f_lp(quantise(net, fmt), l1, l2, fmt, caps)
    verdict.problem = "reach-lp"
    return verdict


def _vector_to_assignment(spec: BvSpec, vec, fmt) -> dict[str, int]:
    return {name: sum(bit << i for i, bit in enumerate(encode(v, fmt)))
            for name, v in zip(spec.variables, vec)}


def _check_bv_widths(net: Network, phi1: BvSpec, phi2: BvSpec, fmt):
    if phi1.width != fmt.word_length or phi2.width != fmt.word_length:
        raise WidthMismatch(
            f"specification width must equal the format word length {fmt.word_length}")
    if len(phi1.variables) != net.input_dim:
        raise DimensionMismatch("input spec must declare one variable per input")
    if len(phi2.variables) != net.output_dim:
        raise DimensionMismatch("output spec must declare one variable per output")


def reach_f_bv(net: Network, phi1: BvSpec, phi2: BvSpec,
               fmt: ArithmeticFormat, caps: Caps | None = None) -> Verdict:
    """Quantised-network reachability against bit-vector specifications, by
    enumeration of the representable input space."""
    caps = caps or Caps()
    _check_bv_widths(net, phi1, phi2, fmt)
    try:
        count = _input_space_guard(fmt, net.input_dim, caps.max_inputs)
    except SearchSpaceTooLarge as exc:
        return Verdict("reach-f-bv", "brute", RESOURCE, reason=str(exc))
    values = enumerate_values(fmt)
    for combo in itertools.product(values, repeat=net.input_dim):
        x = list(combo)
        if not model_check(phi1, _vector_to_assignment(phi1, x, fmt)):
            continue
        y = eval_quantised(net, x, fmt)
        if model_check(phi2, _vector_to_assignment(phi2, y, fmt)):
            return Verdict("reach-f-bv", "brute", VALID, x, y,
                           stats=_verdict_stats(inputs=count))
    return Verdict("reach-f-bv", "brute", INVALID, stats=_verdict_stats(inputs=count))


def reach_bv(net: Network, phi1: BvSpec, phi2: BvSpec, fmt: ArithmeticFormat,
             backend: str = "automata", caps: Caps | None = None) -> Verdict:
    """Dynamic quantisation against bit-vector specifications.

    The automata backend intersects the network's relation automaton with
    the lifted specification automata and decides emptiness; the brute
    backend quantises and enumerates.
    """
    caps = caps or Caps()
    _check_bv_widths(net, phi1, phi2, fmt)
    qnet = quantise(net, fmt)
    if backend == "brute":
        verdict = reach_f_bv(qnet, phi1, phi2, fmt, caps)
        verdict.problem = "reach-bv"
        return verdict
    if backend != "automata":
        raise ValueError(f"unknown backend {backend!r}")

    try:
        if isinstance(fmt, FixedFormat):
            machine = build_fixed_nfa(qnet, fmt)
        else:
            machine = build_float_nfa(qnet, fmt, e_cap=caps.float_e_cap)
    except UnsupportedFormat as exc:
        raise BackendUnavailable(
            f"automata backend cannot handle this instance ({exc}); "
            "use the brute backend") from exc

    d, n = net.input_dim, net.output_dim
    in_nfa = ProjectionNfa(build_bv_nfa(phi1), list(range(d)), d + n)
    out_nfa = ProjectionNfa(build_bv_nfa(phi2), list(range(d, d + n)), d + n)

    stats = ExplorationStats()
    try:
        # Empty specification languages decide the instance without the
        # network automaton.
        if is_empty(in_nfa.inner, caps.max_states, caps.max_seconds) is None or \
           is_empty(out_nfa.inner, caps.max_states, caps.max_seconds) is None:
            return Verdict("reach-bv", "automata", INVALID,
                           stats=_verdict_stats(explored=0))
        word = is_empty(intersect(machine, in_nfa, out_nfa),
                        caps.max_states, caps.max_seconds, stats=stats)
    except BudgetExceeded as exc:
        return Verdict("reach-bv", "automata", RESOURCE, reason=str(exc),
                       stats=_verdict_stats(explored=stats.explored))
    if word is None:
        return Verdict("reach-bv", "automata", INVALID,
                       stats=_verdict_stats(explored=stats.explored))
    x = [decode(tuple(sym[j] for sym in word), fmt) for j in range(d)]
    y = eval_quantised(qnet, x, fmt)
    y_words = [tuple(sym[d + j] for sym in word) for j in range(n)]
    if [encode(v, fmt) for v in y] != y_words:
        raise AssertionError("automata witness output disagrees with evaluation")
    if not (model_check(phi1, _vector_to_assignment(phi1, x, fmt))
            and model_check(phi2, _vector_to_assignment(phi2, y, fmt))):
        raise AssertionError("automata witness failed specification re-validation")
    return Verdict("reach-bv", "automata", VALID, x, y,
                   stats=_verdict_stats(explored=stats.explored),
                   witness_words=_witness_words(x, y, fmt))


# ---------------------------------------------------------------------------
# Verdict records
# ---------------------------------------------------------------------------

def emit_verdict(v: Verdict, arith: str | None = None) -> str:
    lines = ["verdict format=1",
             f"problem={v.problem}",
             f"backend={v.backend}",
             f"status={v.status}"]
    if arith:
        lines.append(f"arith={arith}")
    if v.reason:
        lines.append(f"reason={v.reason}")
    if v.witness_input is not None:
        lines.append("witness-input=" +
                     ",".join(format_rational(x) for x in v.witness_input))
    if v.witness_output is not None:
        lines.append("witness-output=" +
                     ",".join(format_rational(y) for y in v.witness_output))
    if v.witness_words:
        lines.append(f"word-layout={v.witness_words['layout']}")
        lines.append("witness-input-words=" + ",".join(v.witness_words["input"]))
        lines.append("witness-output-words=" + ",".join(v.witness_words["output"]))
    for key in sorted(v.stats):
        lines.append(f"stat.{key}={v.stats[key]}")
    return "\n".join(lines) + "\n"


def parse_verdict(text: str) -> Verdict:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "verdict format=1":
        raise ParseError("missing verdict header")
    fields: dict[str, str] = {}
    for ln in lines[1:]:
        key, sep, value = ln.partition("=")
        if not sep:
            raise ParseError(f"bad verdict line {ln!r}")
        fields[key] = value
    v = Verdict(fields.get("problem", ""), fields.get("backend", ""),
                fields.get("status", ""), reason=fields.get("reason", ""))
    if "witness-input" in fields:
        v.witness_input = [parse_rational(t) for t in fields["witness-input"].split(",")]
    if "witness-output" in fields:
        v.witness_output = [parse_rational(t) for t in fields["witness-output"].split(",")]
    if "word-layout" in fields:
        v.witness_words = {
            "layout": fields["word-layout"],
            "input": fields.get("witness-input-words", "").split(","),
            "output": fields.get("witness-output-words", "").split(","),
        }
    v.stats = {k[5:]: int(val) for k, val in fields.items() if k.startswith("stat.")}
    return v
