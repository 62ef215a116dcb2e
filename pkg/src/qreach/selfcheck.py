"""Cross-validation suites: every algorithmic component checked against an
independent oracle or a second backend, at desk scale.

Each suite returns a SuiteResult with per-case records; the report writer
turns a run into a CSV table plus figures.  The suites are deterministic in
the seed, and instance generation happens inside the per-case workers so a
run parallelises without changing its outcome.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .bits import getbit_fixed, getbit_float
from .bitvec import (
    BvAnd, BvConj, BvConst, BvEq, BvNeg, BvNot, BvOr, BvSpec, BvVar, BvXor,
    model_check, sat_bruteforce,
)
from .errors import BudgetExceeded
from .formats import (
    FixedFormat, FloatFormat, Overflow, Rounding, encode, enumerate_values,
    round_to_grid, to_format,
)
from .linprog import LinearProgram, check_lp, constraint, feasible
from .network import eval_quantised, eval_rational, make_network, quantise
from .nfa import ExplorationStats, is_empty
from .nfa_bv import build_bv_nfa, word_to_assignment
from .nfa_fixed import build_fixed_nfa
from .nfa_fixed import language_equals_relation as fixed_language_equals
from .nfa_float import build_float_nfa
from .nfa_float import language_equals_relation as float_language_equals
from .reduction import Cnf3, reduce_quantised, reduce_to_reachability
from .verify import Caps, reach_bv, reach_f_lp, reach_q_lp

F = Fraction


def _case_rng(seed, tag, index) -> random.Random:
    """Process-independent per-case generator (tuple seeding would go through
    randomised string hashing and differ between runs)."""
    digest = hashlib.sha256(f"{seed}:{tag}:{index}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


@dataclass
class CaseResult:
    suite: str
    case: str
    ok: bool
    detail: str = ""
    metrics: dict = field(default_factory=dict)


@dataclass
class SuiteResult:
    name: str
    cases: list[CaseResult]
    seconds: float

    @property
    def total(self) -> int:
        return len(self.cases)

    @property
    def failures(self) -> int:
        return sum(1 for c in self.cases if not c.ok)

    @property
    def ok(self) -> bool:
        return self.failures == 0


def _run_suite(name, worker, args, jobs=1):
    start = time.monotonic()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cases = list(pool.map(worker, args, chunksize=8))
    else:
        cases = [worker(a) for a in args]
    return SuiteResult(name, cases, time.monotonic() - start)


# ---------------------------------------------------------------------------
# Shared generators
# ---------------------------------------------------------------------------

def _random_fixed_instance(rng):
    """A quantised net and fixed-point format inside the small-instance
    family (b+f <= 6, dims <= 2, <= 2 layers, <= 3 neurons per layer), biased
    away from shapes whose subset exploration would dominate the run."""
    while True:
        b = rng.randint(2, 5)
        f = rng.randint(0, min(2, b))
        if b + f > 6:
            continue
        rounding = rng.choice([Rounding.NEAREST_HALF_UP, Rounding.TOWARD_NEGATIVE])
        fmt = FixedFormat(b, f, rounding)
        values = enumerate_values(fmt)
        d = rng.randint(1, 2)
        depth = rng.randint(1, 2)
        layers = []
        prev = d
        for _ in range(depth):
            w = rng.randint(1, 3)
            layers.append((
                [[rng.choice(values) for _ in range(prev)] for _ in range(w)],
                [rng.choice(values) for _ in range(w)]))
            prev = w
        net = quantise(make_network(layers), fmt)
        hidden = sum(l.out_dim for l in net.layers[:-1])
        weight = (net.input_dim + net.output_dim) + hidden * max(fmt.frac, 1)
        if net.input_dim * fmt.bits > 10 or weight > 8:
            continue
        return net, fmt


def _random_bv_term(rng, names, width, depth):
    if depth == 0:
        if rng.random() < 0.5:
            return BvVar(rng.choice(names))
        return BvConst(rng.randrange(1 << width))
    kind = rng.choice(["not", "and", "or", "xor", "leaf"])
    if kind == "leaf":
        return _random_bv_term(rng, names, width, 0)
    if kind == "not":
        return BvNot(_random_bv_term(rng, names, width, depth - 1))
    cls = {"and": BvAnd, "or": BvOr, "xor": BvXor}[kind]
    return cls(_random_bv_term(rng, names, width, depth - 1),
               _random_bv_term(rng, names, width, depth - 1))


def _random_bv_formula(rng, names, width, depth=3):
    if depth == 0 or rng.random() < 0.4:
        return BvEq(_random_bv_term(rng, names, width, rng.randint(0, 2)),
                    _random_bv_term(rng, names, width, rng.randint(0, 2)))
    if rng.random() < 0.5:
        return BvNeg(_random_bv_formula(rng, names, width, depth - 1))
    return BvConj(_random_bv_formula(rng, names, width, depth - 1),
                  _random_bv_formula(rng, names, width, depth - 1))


def cnf_corpus(min_count=500, seed=0):
    """Deduplicated 3CNF formulas over three variables with up to four
    clauses, canonicalised by sorted clause multisets."""
    rng = random.Random(seed)
    lits = [(v, p) for v in range(3) for p in (True, False)]
    seen = set()
    corpus = []
    while len(corpus) < min_count:
        m = rng.randint(1, 4)
        clauses = tuple(sorted(
            tuple(sorted(rng.choice(lits) for _ in range(3)))
            for _ in range(m)))
        if clauses in seen:
            continue
        seen.add(clauses)
        corpus.append(Cnf3(3, clauses))
    return corpus


# ---------------------------------------------------------------------------
# Suite 1: cross-backend agreement on Reach(F, BV)
# ---------------------------------------------------------------------------

def _bv_agreement_case(arg):
    seed, index = arg
    rng = _case_rng(seed, "bv-agree", index)
    net, fmt = _random_fixed_instance(rng)
    width = fmt.word_length
    in_names = tuple(f"x{i + 1}" for i in range(net.input_dim))
    out_names = tuple(f"y{i + 1}" for i in range(net.output_dim))
    phi1 = BvSpec(width, in_names, _random_bv_formula(rng, list(in_names), width, 2))
    phi2 = BvSpec(width, out_names, _random_bv_formula(rng, list(out_names), width, 2))
    caps = Caps(max_states=1 << 22)
    auto = reach_bv(net, phi1, phi2, fmt, backend="automata", caps=caps)
    brute = reach_bv(net, phi1, phi2, fmt, backend="brute", caps=caps)
    ok = auto.status == brute.status and auto.status in ("valid", "invalid")
    detail = f"automata={auto.status} brute={brute.status}"
    if ok and auto.valid:
        x, y = auto.witness_input, auto.witness_output
        q = quantise(net, fmt)
        recheck = (eval_quantised(q, x, fmt) == y
                   and model_check(phi1, {n: _word_int(v, fmt) for n, v in zip(in_names, x)})
                   and model_check(phi2, {n: _word_int(v, fmt) for n, v in zip(out_names, y)}))
        ok = recheck
        if not recheck:
            detail += " witness-recheck-failed"
    return CaseResult("cross-backend-bv", f"instance-{index}", ok, detail,
                      metrics={"explored": auto.stats.get("explored", 0),
                               "word_bits": (net.input_dim + net.output_dim) * width})


def _word_int(value, fmt):
    return sum(b << i for i, b in enumerate(encode(value, fmt)))


def suite_cross_backend_bv(seed=0, count=200, jobs=1) -> SuiteResult:
    return _run_suite("cross-backend-bv", _bv_agreement_case,
                      [(seed, i) for i in range(count)], jobs)


# ---------------------------------------------------------------------------
# Suite 2: fixed-point automaton language equivalence
# ---------------------------------------------------------------------------

def _fixed_language_case(arg):
    seed, index = arg
    rng = _case_rng(seed, "fixed-lang", index)
    net, fmt = _random_fixed_instance(rng)
    nfa = build_fixed_nfa(net, fmt)
    stats = ExplorationStats()
    try:
        is_empty(nfa, max_states=1 << 22, stats=stats)
    except BudgetExceeded:  # stats only; the equality check runs regardless
        pass
    bad = fixed_language_equals(net, fmt, nfa=nfa)
    return CaseResult("fixed-language", f"instance-{index}", bad is None,
                      "" if bad is None else str(bad)[:200],
                      metrics={"explored": stats.explored,
                               "word_bits": (net.input_dim + net.output_dim) * fmt.bits})


def suite_fixed_language(seed=0, count=200, jobs=1) -> SuiteResult:
    return _run_suite("fixed-language", _fixed_language_case,
                      [(seed, i) for i in range(count)], jobs)


# ---------------------------------------------------------------------------
# Suite 3: float automaton language equivalence
# ---------------------------------------------------------------------------

def _float_language_case(arg):
    seed, index, p, depth = arg
    rng = _case_rng(seed, "float-lang", index)
    fmt = FloatFormat(p, 2)
    values = enumerate_values(fmt)
    d = rng.randint(1, 2)
    layers = []
    prev = d
    for _ in range(depth):
        w = rng.randint(1, 2)
        layers.append((
            [[rng.choice(values) for _ in range(prev)] for _ in range(w)],
            [rng.choice(values) for _ in range(w)]))
        prev = w
    net = quantise(make_network(layers), fmt)
    nfa = build_float_nfa(net, fmt)
    stats = ExplorationStats()
    try:
        is_empty(nfa, max_states=1 << 22, stats=stats)
    except BudgetExceeded:
        pass
    bad = float_language_equals(net, fmt, nfa=nfa)
    return CaseResult("float-language", f"p{p}-depth{depth}-{index}", bad is None,
                      "" if bad is None else str(bad)[:200],
                      metrics={"explored": stats.explored, "mantissa": p})


def suite_float_language(seed=0, per_shape=6, jobs=1) -> SuiteResult:
    args = []
    index = 0
    for p in (1, 2, 3):
        for depth in (1, 2):
            for _ in range(per_shape):
                args.append((seed, index, p, depth))
                index += 1
    return _run_suite("float-language", _float_language_case, args, jobs)


# ---------------------------------------------------------------------------
# Suite 4: 3SAT reduction soundness
# ---------------------------------------------------------------------------

def _reduction_case(arg):
    seed, index = arg
    cnf = cnf_corpus(index + 1, seed)[index]
    truth = any(cnf.evaluate(bits)
                for bits in itertools.product((0, 1), repeat=cnf.n_vars))
    net, l1, l2 = reduce_to_reachability(cnf)
    pattern = reach_q_lp(net, l1, l2)
    qnet, ql1, ql2, fmt = reduce_quantised(cnf, 1)
    brute = reach_f_lp(qnet, ql1, ql2, fmt)
    ok = (pattern.valid == truth) and (brute.valid == truth) \
        and pattern.status != "resource" and brute.status != "resource"
    detail = f"truth={truth} pattern={pattern.status} brute={brute.status}"
    if pattern.valid:
        witness_ok = all(v in (0, 1) for v in pattern.witness_input) \
            and cnf.evaluate([int(v) for v in pattern.witness_input])
        ok = ok and witness_ok
    return CaseResult("reduction-3sat", f"formula-{index}", ok, detail)


def suite_reduction_3sat(seed=0, count=500, jobs=1) -> SuiteResult:
    return _run_suite("reduction-3sat", _reduction_case,
                      [(seed, i) for i in range(count)], jobs)


# ---------------------------------------------------------------------------
# Suite 5: bit extraction
# ---------------------------------------------------------------------------

def _getbit_fixed_case(arg):
    seed, index = arg
    rng = _case_rng(seed, "getbit", index)
    p = rng.randint(-(2 ** 64 - 1), 2 ** 64 - 1)
    q = rng.randint(1, 2 ** 64 - 1)
    t = rng.randint(-(2 ** 20), 2 ** 20)
    got = getbit_fixed(p, q, t)
    # The naive oracle materialises the full shifted numerator and divides,
    # reading the bit out of an explicit two's-complement window.
    if t >= 0:
        want = ((p // q) % (1 << (t + 1))) >> t
    else:
        want = ((p << -t) // q) & 1
    return CaseResult("getbit", f"fixed-{index}", got == want,
                      "" if got == want else f"p={p} q={q} t={t}")


def _getbit_float_case(arg):
    seed, index = arg
    rng = _case_rng(seed, "getbit-float", index)
    fmt = FloatFormat(rng.randint(1, 8), rng.randint(2, 4))
    values = [v for v in enumerate_values(fmt) if v != 0]
    x = rng.choice(values)
    word = encode(x, fmt)
    t = rng.randrange(fmt.word_length)
    got = getbit_float(x.numerator, x.denominator, fmt, t)
    return CaseResult("getbit", f"float-{index}", got == word[t],
                      "" if got == word[t] else f"x={x} fmt={fmt.descriptor()} t={t}")


def suite_getbit(seed=0, fixed_count=1000, float_count=500, jobs=1) -> SuiteResult:
    start = time.monotonic()
    cases = [_getbit_fixed_case((seed, i)) for i in range(fixed_count)]
    cases += [_getbit_float_case((seed, i)) for i in range(float_count)]
    return SuiteResult("getbit", cases, time.monotonic() - start)


# ---------------------------------------------------------------------------
# Suite 6: bit-vector semantics
# ---------------------------------------------------------------------------

def _bv_bits(term, assignment, width):
    if isinstance(term, BvVar):
        v = assignment[term.name]
        return [(v >> i) & 1 for i in range(width)]
    if isinstance(term, BvConst):
        return [(term.value >> i) & 1 for i in range(width)]
    if isinstance(term, BvNot):
        return [1 - b for b in _bv_bits(term.operand, assignment, width)]
    lhs = _bv_bits(term.left, assignment, width)
    rhs = _bv_bits(term.right, assignment, width)
    op = {BvAnd: lambda a, b: a & b, BvOr: lambda a, b: a | b,
          BvXor: lambda a, b: a ^ b}[type(term)]
    return [op(a, b) for a, b in zip(lhs, rhs)]


def _bv_naive(formula, assignment, width):
    if isinstance(formula, BvEq):
        return _bv_bits(formula.left, assignment, width) \
            == _bv_bits(formula.right, assignment, width)
    if isinstance(formula, BvNeg):
        return not _bv_naive(formula.operand, assignment, width)
    return _bv_naive(formula.left, assignment, width) \
        and _bv_naive(formula.right, assignment, width)


def _bv_semantics_case(arg):
    seed, index = arg
    rng = _case_rng(seed, "bv-sem", index)
    width = rng.randint(1, 8)
    names = ["x", "y"][: rng.randint(1, 2)]
    formula = _random_bv_formula(rng, names, width)
    spec = BvSpec(width, tuple(names), formula)
    theta = {n: rng.randrange(1 << width) for n in names}
    ok = model_check(spec, theta) == _bv_naive(formula, theta, width)
    return CaseResult("bv-semantics", f"check-{index}", ok)


def _bv_automata_case(arg):
    seed, index = arg
    rng = _case_rng(seed, "bv-auto", index)
    width = rng.randint(1, 6)
    names = ["x", "y"][: rng.randint(1, 2)]
    spec = BvSpec(width, tuple(names), _random_bv_formula(rng, names, width))
    witness = is_empty(build_bv_nfa(spec), max_states=1 << 22)
    model = sat_bruteforce(spec)
    ok = (witness is None) == (model is None)
    if ok and witness is not None:
        ok = model_check(spec, word_to_assignment(spec, witness))
    return CaseResult("bv-semantics", f"sat-{index}", ok)


def suite_bv_semantics(seed=0, check_count=1000, sat_count=500, jobs=1) -> SuiteResult:
    start = time.monotonic()
    cases = [_bv_semantics_case((seed, i)) for i in range(check_count)]
    cases += [_bv_automata_case((seed, i)) for i in range(sat_count)]
    return SuiteResult("bv-semantics", cases, time.monotonic() - start)


# ---------------------------------------------------------------------------
# Suite 7: exact LP feasibility vs Fourier-Motzkin
# ---------------------------------------------------------------------------

def _fm_feasible(rows, n):
    rows = [list(r) for r in rows]
    for var in range(n - 1, -1, -1):
        uppers, lowers, rest = [], [], []
        for c, b, strict in rows:
            a = c[var]
            if a > 0:
                uppers.append(([x / a for x in c], b / a, strict))
            elif a < 0:
                lowers.append(([x / a for x in c], b / a, strict))
            else:
                rest.append((c, b, strict))
        rows = rest + [
            ([u - l for u, l in zip(cu, cl)], bu - bl, su or sl)
            for (cu, bu, su) in uppers for (cl, bl, sl) in lowers]
        for c, _b, _s in rows:
            c[var] = F(0)
    for c, b, strict in rows:
        if strict:
            if not F(0) < b:
                return False
        elif not F(0) <= b:
            return False
    return True


def _lp_case(arg):
    seed, index = arg
    rng = _case_rng(seed, "lp", index)
    n = rng.randint(1, 4)
    rows = []
    for _ in range(rng.randint(1, 6)):
        coeffs = [F(rng.randint(-5, 5)) for _ in range(n)]
        rel = rng.choice(["<", "<=", "=", ">=", ">"])
        rows.append((coeffs, rel, F(rng.randint(-5, 5))))
    lp = LinearProgram(n, tuple(constraint(c, rel, b) for c, rel, b in rows))
    normalised = []
    for c, rel, b in rows:
        if rel in ("<", "<="):
            normalised.append((c, b, rel == "<"))
        elif rel in (">", ">="):
            normalised.append(([-v for v in c], -b, rel == ">"))
        else:
            normalised.append((c, b, False))
            normalised.append(([-v for v in c], -b, False))
    want = _fm_feasible(normalised, n)
    witness = feasible(lp)
    ok = (witness is not None) == want
    if ok and witness is not None:
        ok = check_lp(lp, witness)
    return CaseResult("lp-feasibility", f"lp-{index}", ok,
                      "" if ok else f"fm={want} witness={witness}")


def suite_lp(seed=0, count=100, jobs=1) -> SuiteResult:
    return _run_suite("lp-feasibility", _lp_case,
                      [(seed, i) for i in range(count)], jobs)


# ---------------------------------------------------------------------------
# Suite 8: quantised equals rational when nothing rounds
# ---------------------------------------------------------------------------

def _exactness_case(arg):
    seed, index = arg
    rng = _case_rng(seed, "exact", index)
    b = rng.randint(2, 5)
    # Keep the unit weight representable: 1 <= max value needs f <= b-2.
    fmt = FixedFormat(b, rng.randint(0, max(0, min(2, b - 2))))
    d = rng.randint(1, 2)
    depth = rng.randint(1, 3)
    layers = []
    prev = d
    for _ in range(depth):
        w = rng.randint(1, 3)
        rows = []
        for _ in range(w):
            row = [F(0)] * prev
            if rng.random() < 0.85:  # else an all-zero row: constant zero
                row[rng.randrange(prev)] = F(1)
            rows.append(row)
        layers.append((rows, [F(0)] * w))
        prev = w
    net = make_network(layers)
    values = enumerate_values(fmt)
    ok = True
    for combo in itertools.product(values, repeat=d):
        if eval_quantised(net, list(combo), fmt) != eval_rational(net, list(combo)):
            ok = False
            break
    return CaseResult("exactness", f"net-{index}", ok, f"b={b} f={fmt.frac}")


def suite_exactness(seed=0, count=40, jobs=1) -> SuiteResult:
    return _run_suite("exactness", _exactness_case,
                      [(seed, i) for i in range(count)], jobs)


# ---------------------------------------------------------------------------
# Suite 9: rounding and overflow mode tables
# ---------------------------------------------------------------------------

def _round_oracle(x, fmt):
    if isinstance(fmt, FixedFormat):
        step = F(1, 1 << fmt.frac)
        below = (x / step).numerator // (x / step).denominator * step
    else:
        if x == 0:
            return x
        mag = abs(x)
        v = 0
        while F(2) ** (v + 1) <= mag:
            v += 1
        while F(2) ** v > mag:
            v -= 1
        step = F(2) ** (v - fmt.mantissa)
        below = (x / step).numerator // (x / step).denominator * step
    above = below if below == x else below + step
    if fmt.rounding is Rounding.TOWARD_NEGATIVE:
        return below
    if fmt.rounding is Rounding.TOWARD_ZERO:
        return below if x >= 0 else above
    if x - below < above - x:
        return below
    return above  # nearest, ties toward +inf


def _overflow_oracle(x, fmt):
    n = int(x * (1 << fmt.frac))
    if fmt.overflow is Overflow.SATURATE:
        n = max(fmt.min_scaled, min(fmt.max_scaled, n))
    else:
        while n > fmt.max_scaled:
            n -= 1 << fmt.bits
        while n < fmt.min_scaled:
            n += 1 << fmt.bits
    return F(n, 1 << fmt.frac)


def _mode_table_case(arg):
    seed, index, samples = arg
    rng = _case_rng(seed, "modes", index)
    fmts = [FixedFormat(4, 1, r, o) for r in Rounding for o in Overflow]
    fmts += [FixedFormat(5, 3, r) for r in Rounding]
    fmts += [FloatFormat(2, 2, r) for r in Rounding]
    fmt = fmts[index % len(fmts)]
    ok = True
    detail = ""
    for _ in range(samples):
        x = F(rng.randint(-64, 64), rng.randint(1, 32))
        r = round_to_grid(x, fmt)
        if r != _round_oracle(x, fmt):
            ok, detail = False, f"round({x}) = {r}"
            break
        if round_to_grid(r, fmt) != r:
            ok, detail = False, f"round not idempotent at {x}"
            break
        q = to_format(x, fmt)
        if to_format(q, fmt) != q:
            ok, detail = False, f"quantisation not idempotent at {x}"
            break
        if isinstance(fmt, FixedFormat) and _overflow_oracle(r, fmt) != to_format(x, fmt):
            ok, detail = False, f"overflow({x})"
            break
    if ok and isinstance(fmt, FixedFormat) and fmt.overflow is Overflow.SATURATE:
        grid = [F(n, 1 << fmt.frac) for n in range(-40, 40)]
        mapped = [to_format(g, fmt) for g in grid]
        if any(a > b for a, b in zip(mapped, mapped[1:])):
            ok, detail = False, "saturation not monotone"
    return CaseResult("mode-tables", f"{fmt.descriptor()}-{index}", ok, detail)


def suite_mode_tables(seed=0, count=25, jobs=1, samples=400) -> SuiteResult:
    return _run_suite("mode-tables", _mode_table_case,
                      [(seed, i, samples) for i in range(count)], jobs)


# ---------------------------------------------------------------------------
# Orchestration and report
# ---------------------------------------------------------------------------

QUICK_SIZES = dict(bv_count=25, lang_count=25, float_per_shape=2,
                   reduction_count=60, getbit_fixed=200, getbit_float=100,
                   bv_checks=200, bv_sats=100, lp_count=40, exact_count=10,
                   mode_count=13)
FULL_SIZES = dict(bv_count=200, lang_count=200, float_per_shape=6,
                  reduction_count=500, getbit_fixed=1000, getbit_float=500,
                  bv_checks=1000, bv_sats=500, lp_count=100, exact_count=40,
                  mode_count=25)


def run_selfcheck(seed=0, quick=False, jobs=1, progress=None) -> list[SuiteResult]:
    sizes = QUICK_SIZES if quick else FULL_SIZES
    plan = [
        ("cross-backend-bv", lambda: suite_cross_backend_bv(seed, sizes["bv_count"], jobs)),
        ("fixed-language", lambda: suite_fixed_language(seed, sizes["lang_count"], jobs)),
        ("float-language", lambda: suite_float_language(seed, sizes["float_per_shape"], jobs)),
        ("reduction-3sat", lambda: suite_reduction_3sat(seed, sizes["reduction_count"], jobs)),
        ("getbit", lambda: suite_getbit(seed, sizes["getbit_fixed"], sizes["getbit_float"], jobs)),
        ("bv-semantics", lambda: suite_bv_semantics(seed, sizes["bv_checks"], sizes["bv_sats"], jobs)),
        ("lp-feasibility", lambda: suite_lp(seed, sizes["lp_count"], jobs)),
        ("exactness", lambda: suite_exactness(seed, sizes["exact_count"], jobs)),
        ("mode-tables", lambda: suite_mode_tables(seed, sizes["mode_count"], jobs)),
    ]
    results = []
    for name, run in plan:
        result = run()
        results.append(result)
        if progress:
            progress(result)
    return results


def write_report(results: list[SuiteResult], out_dir: str) -> list[str]:
    """Write the per-case CSV and the summary figures; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []

    csv_path = os.path.join(out_dir, "selfcheck.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["suite", "case", "ok", "detail", "metrics"])
        for suite in results:
            for case in suite.cases:
                writer.writerow([case.suite, case.case, int(case.ok), case.detail,
                                 ";".join(f"{k}={v}" for k, v in sorted(case.metrics.items()))])
    paths.append(csv_path)

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names = [r.name for r in results]
    passes = [r.total - r.failures for r in results]
    fails = [r.failures for r in results]

    fig, ax = plt.subplots(figsize=(9, 4))
    ax.bar(names, passes, label="pass", color="#2a7")
    ax.bar(names, fails, bottom=passes, label="fail", color="#c33")
    ax.set_ylabel("cases")
    ax.set_title("selfcheck outcomes per suite")
    ax.legend()
    plt.setp(ax.get_xticklabels(), rotation=30, ha="right")
    fig.tight_layout()
    p = os.path.join(out_dir, "selfcheck_outcomes.png")
    fig.savefig(p, dpi=120)
    plt.close(fig)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(9, 4))
    ax.bar(names, [r.seconds for r in results], color="#47a")
    ax.set_ylabel("seconds")
    ax.set_title("selfcheck runtime per suite")
    plt.setp(ax.get_xticklabels(), rotation=30, ha="right")
    fig.tight_layout()
    p = os.path.join(out_dir, "selfcheck_runtimes.png")
    fig.savefig(p, dpi=120)
    plt.close(fig)
    paths.append(p)

    points = [(c.metrics["word_bits"], c.metrics["explored"])
              for r in results for c in r.cases
              if "word_bits" in c.metrics and c.metrics.get("explored")]
    if points:
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.scatter([p0 for p0, _ in points], [p1 for _, p1 in points],
                   s=12, alpha=0.5, color="#724")
        ax.set_xlabel("joint word bits")
        ax.set_ylabel("explored automaton states")
        ax.set_yscale("log")
        ax.set_title("emptiness exploration size")
        fig.tight_layout()
        p = os.path.join(out_dir, "automata_exploration.png")
        fig.savefig(p, dpi=120)
        plt.close(fig)
        paths.append(p)
    return paths
