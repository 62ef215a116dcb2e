"""Command-line front end.

Exit codes: 0 the command completed (any verdict), 1 usage or parse error,
2 a resource budget decided the outcome instead of the instance.
"""

from __future__ import annotations

import argparse
import sys

from .errors import (
    BackendUnavailable, DimensionMismatch, NotRepresentable, ParseError,
    SearchSpaceTooLarge, WidthMismatch,
)
from .formats import FloatFormat, format_rational, parse_format, parse_rational
from .bits import getbit_fixed, getbit_float
from .network import (
    eval_quantised, eval_rational, format_network, parse_network, quantise,
)
from .reduction import format_dimacs, parse_dimacs, reduce_quantised, reduce_to_reachability
from .specfiles import format_lp_pair, load_bv_pair, load_lp_pair
from .verify import (
    Caps, emit_verdict, reach_bv, reach_f_bv, reach_f_lp, reach_lp, reach_q_lp,
)

EXIT_OK, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2


def _read(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _parse_vector(text):
    return [parse_rational(part) for part in text.split(",") if part.strip()]


def _caps_from_args(args):
    caps = Caps.from_env()
    for attr in ("max_inputs", "max_patterns", "max_states", "float_e_cap"):
        value = getattr(args, attr, None)
        if value is not None:
            setattr(caps, attr, value)
    if getattr(args, "max_seconds", None) is not None:
        caps.max_seconds = args.max_seconds
    return caps


def _add_cap_flags(parser):
    parser.add_argument("--max-inputs", type=int, default=None,
                        help="input enumeration budget")
    parser.add_argument("--max-patterns", type=int, default=None,
                        help="activation pattern branch budget")
    parser.add_argument("--max-states", type=int, default=None,
                        help="automaton exploration budget")
    parser.add_argument("--max-seconds", type=float, default=None,
                        help="automaton exploration time budget")
    parser.add_argument("--float-e-cap", type=int, default=None,
                        help="largest exponent width the float automaton accepts")


def cmd_eval(args):
    net = parse_network(_read(args.net))
    x = _parse_vector(args.input)
    if args.arith:
        fmt = parse_format(args.arith)
        net = quantise(net, fmt)
        y = eval_quantised(net, x, fmt, per_op=args.per_op)
    else:
        y = eval_rational(net, x)
    print(",".join(format_rational(v) for v in y))
    return EXIT_OK


def cmd_quantise(args):
    fmt = parse_format(args.arith)
    net = quantise(parse_network(_read(args.net)), fmt)
    text = format_network(net)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args):
    caps = _caps_from_args(args)
    net = parse_network(_read(args.net))
    spec_text = _read(args.spec)
    problem = args.problem
    fmt = parse_format(args.arith) if args.arith else None
    if problem in ("reach-q-lp", "reach-f-lp", "reach-lp"):
        l1, l2 = load_lp_pair(spec_text)
        if problem == "reach-q-lp":
            verdict = reach_q_lp(net, l1, l2, caps)
        else:
            if fmt is None:
                raise ParseError(f"{problem} needs --arith")
            if problem == "reach-f-lp":
                verdict = reach_f_lp(quantise(net, fmt) if args.quantise else net,
                                     l1, l2, fmt, caps)
            else:
                verdict = reach_lp(net, l1, l2, fmt, caps)
    elif problem in ("reach-f-bv", "reach-bv"):
        phi1, phi2 = load_bv_pair(spec_text)
        if fmt is None:
            raise ParseError(f"{problem} needs --arith")
        if problem == "reach-f-bv":
            verdict = reach_f_bv(quantise(net, fmt) if args.quantise else net,
                                 phi1, phi2, fmt, caps)
        else:
            verdict = reach_bv(net, phi1, phi2, fmt, backend=args.backend, caps=caps)
    else:
        raise ParseError(f"unknown problem {problem!r}")
    record = emit_verdict(verdict, arith=args.arith)
    if args.out:
        _write(args.out, record)
    sys.stdout.write(record)
    return EXIT_RESOURCE if verdict.status == "resource" else EXIT_OK


def cmd_reduce(args):
    import os

    cnf = parse_dimacs(_read(args.dimacs))
    os.makedirs(args.out_dir, exist_ok=True)
    if args.frac_bits is not None:
        net, l1, l2, fmt = reduce_quantised(cnf, args.frac_bits)
        _write(os.path.join(args.out_dir, "arith.txt"), fmt.descriptor() + "\n")
    else:
        net, l1, l2 = reduce_to_reachability(cnf, printed_binarity=args.printed_binarity)
    _write(os.path.join(args.out_dir, "formula.cnf"), format_dimacs(cnf))
    _write(os.path.join(args.out_dir, "net.fnn"), format_network(net))
    _write(os.path.join(args.out_dir, "spec.lp"), format_lp_pair(l1, l2))
    print(f"instance written to {args.out_dir}")
    return EXIT_OK


def cmd_getbit(args):
    value = parse_rational(args.rational)
    p, q = value.numerator, value.denominator
    if args.float_format:
        fmt = parse_format(args.float_format)
        if not isinstance(fmt, FloatFormat):
            raise ParseError("--float-format expects a float descriptor")
        print(getbit_float(p, q, fmt, args.bit))
    else:
        print(getbit_fixed(p, q, args.bit))
    return EXIT_OK


def cmd_selfcheck(args):
    from .selfcheck import run_selfcheck, write_report

    def progress(result):
        mark = "pass" if result.ok else "FAIL"
        print(f"{result.name}: {result.total - result.failures}/{result.total} "
              f"{mark} ({result.seconds:.1f}s)")

    results = run_selfcheck(seed=args.seed, quick=args.quick, jobs=args.jobs,
                            progress=progress)
    if args.report_dir:
        for path in write_report(results, args.report_dir):
            print(f"report: {path}")
    failures = sum(r.failures for r in results)
    print(f"selfcheck: {sum(r.total for r in results)} cases, {failures} failures")
    return EXIT_OK if failures == 0 else EXIT_USAGE


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qreach",
        description="Reachability checking for quantised feedforward ReLU networks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a network on an input vector")
    p.add_argument("--net", required=True)
    p.add_argument("--input", required=True, help="comma-separated rationals")
    p.add_argument("--arith", help="arithmetic descriptor; quantises the net first")
    p.add_argument("--per-op", action="store_true",
                   help="round after every multiply and add")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("quantise", help="round a network's parameters into a format")
    p.add_argument("--net", required=True)
    p.add_argument("--arith", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_quantise)

    p = sub.add_parser("verify", help="decide a reachability problem")
    p.add_argument("--problem", required=True,
                   choices=["reach-q-lp", "reach-f-lp", "reach-lp",
                            "reach-f-bv", "reach-bv"])
    p.add_argument("--net", required=True)
    p.add_argument("--spec", required=True,
                   help="combined spec file with @in/@out sections")
    p.add_argument("--arith", help="arithmetic descriptor")
    p.add_argument("--backend", default="automata", choices=["automata", "brute"],
                   help="backend for reach-bv")
    p.add_argument("--quantise", action="store_true",
                   help="quantise the network first for reach-f-* problems")
    p.add_argument("--out", help="also write the verdict record to a file")
    _add_cap_flags(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("reduce", help="compile a DIMACS 3CNF into an instance")
    p.add_argument("--dimacs", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--frac-bits", type=int,
                   help="also emit a wide-enough fixed-point descriptor")
    p.add_argument("--printed-binarity", action="store_true",
                   help="use the binarity gadget exactly as printed in its source")
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("getbit", help="extract one bit of a rational's encoding")
    p.add_argument("--rational", required=True, help="p/q or integer")
    p.add_argument("--bit", type=int, required=True,
                   help="weight-2^t index (fixed) or word position (float)")
    p.add_argument("--float-format",
                   help="float descriptor; selects the word layout")
    p.set_defaults(fn=cmd_getbit)

    p = sub.add_parser("selfcheck", help="run the cross-validation suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quick", action="store_true", help="reduced case counts")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--report-dir",
                   help="write selfcheck.csv and figures to this directory")
    p.set_defaults(fn=cmd_selfcheck)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, FileNotFoundError, BackendUnavailable, WidthMismatch,
            DimensionMismatch, NotRepresentable, SearchSpaceTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
