"""Command-line front end.

    opmono mean SPEC A.json B.json [--t T] [--psd] [--eps-rungs K] [--out PATH]
    opmono classify SPEC [--dims 2,3,5] [--trials N] [--seed S] [--tol TOL]
    opmono verify [--dims 2,3,5] [--trials N] [--seed S] [--tol TOL] [--out PATH]
    opmono report-diff REPORT_A REPORT_B

Stdout carries JSON only; diagnostics go to stderr. Exit codes:
0 success, 1 bad input (parse errors, missing files, bad flags; for
``verify`` also positive-control violations), 2 domain errors in ``mean``,
3 NEITHER from ``classify`` or differing reports from ``report-diff``,
4 INCONCLUSIVE.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from . import classifier as clf
from . import functions as fn
from . import means as mn
from . import suite
from .errors import DomainError, LadderExhaustedError, NotPositiveDefiniteError, SpecParseError
from .hermitian import DEFAULT_TOL_REL
from .io import matrix_to_json, read_matrix

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN, EXIT_NEITHER, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4
EXIT_DIFFERENT = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would collide with the domain-error code
    def error(self, message):
        raise UsageError(message)


def _dims(text):
    try:
        dims = tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --dims {text!r}") from None
    return dims


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _err(msg):
    print(f"opmono: {msg}", file=sys.stderr)


def _resolve_dims(args, default):
    if args.dim is not None:
        return (args.dim,)
    return default if args.dims is None else args.dims


def cmd_mean(args):
    try:
        m = mn.parse_mean(args.spec, default_t=args.t)
        A = read_matrix(args.A)
        B = read_matrix(args.B)
    except (SpecParseError, OSError, ValueError) as exc:
        _err(exc)
        return EXIT_INPUT
    if A.shape != B.shape:
        _err(f"dimension mismatch: {A.shape[0]} vs {B.shape[0]}")
        return EXIT_INPUT
    try:
        if args.psd:
            X = mn.evaluate_psd(m, A, B, rungs=args.eps_rungs)
        else:
            X = mn.evaluate(m, A, B)
    except (NotPositiveDefiniteError, DomainError, LadderExhaustedError) as exc:
        _err(exc)
        return EXIT_DOMAIN
    _emit(matrix_to_json(X), args.out)
    return EXIT_OK


def cmd_classify(args):
    try:
        f = fn.parse_function(args.spec)
        defaults = clf.ClassifierConfig()
        cfg = clf.ClassifierConfig(
            dims=_resolve_dims(args, defaults.dims),
            trials_per_dim=defaults.trials_per_dim if args.trials is None else args.trials,
            seed=args.seed,
            tol_rel=args.tol,
        )
    except (SpecParseError, ValueError) as exc:
        _err(exc)
        return EXIT_INPUT
    verdict = clf.classify(f, cfg)
    _emit(verdict.to_json(), args.out)
    return {clf.OMI: EXIT_OK, clf.OMD: EXIT_OK, clf.NEITHER: EXIT_NEITHER}.get(verdict.label, EXIT_INCONCLUSIVE)


def cmd_verify(args):
    try:
        defaults = suite.SuiteConfig()
        cfg = suite.SuiteConfig(
            dims=_resolve_dims(args, defaults.dims),
            trials=defaults.trials if args.trials is None else args.trials,
            seed=args.seed,
            tol_rel=args.tol,
        )
    except ValueError as exc:
        _err(exc)
        return EXIT_INPUT
    report = suite.run_all(cfg)
    _emit(report.to_json(), args.out)
    failures = report.positive_failures()
    for c in failures:
        _err(f"violation: {c.check_id} {json.dumps(c.params, sort_keys=True)} worst_margin={c.worst_margin:.3e}"
             + (f" error={c.error}" if c.error else ""))
    for c in report.negative_misses():
        _err(f"negative control without certificate: {c.params['f']}")
    return EXIT_INPUT if failures else EXIT_OK


def cmd_report_diff(args):
    try:
        with open(args.a) as fh:
            a = json.load(fh)
        with open(args.b) as fh:
            b = json.load(fh)
    except (OSError, ValueError) as exc:
        _err(exc)
        return EXIT_INPUT
    diffs = suite.diff_reports(a, b)
    _emit({"equivalent": not diffs, "differences": diffs})
    return EXIT_OK if not diffs else EXIT_DIFFERENT


def build_parser():
    p = _Parser(prog="opmono", description="Operator means and operator-monotonicity checks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("mean", help="evaluate A sigma B for matrices given as JSON files")
    sp.add_argument("spec", help='mean spec, e.g. "geom:t=0.5" or "adjoint(qapm:p=0.5,a=0.3)"')
    sp.add_argument("A")
    sp.add_argument("B")
    sp.add_argument("--t", type=float, default=None, help="weight for arith/harm/geom given without t=")
    sp.add_argument("--psd", action="store_true", help="allow singular PSD operands (regularization ladder)")
    sp.add_argument("--eps-rungs", type=int, default=mn.DEFAULT_LADDER_RUNGS, help="ladder length with --psd")
    sp.add_argument("--out", help="write the result here instead of stdout")
    sp.set_defaults(func=cmd_mean)

    for name, func, helptext in (
        ("classify", cmd_classify, "classify a scalar function as OMI/OMD-consistent"),
        ("verify", cmd_verify, "run the verification suite"),
    ):
        sp = sub.add_parser(name, help=helptext)
        if name == "classify":
            sp.add_argument("spec", help='function spec, e.g. "power:a=0.5" or "logshift"')
        sp.add_argument("--dim", type=int, default=None, help="single dimension (overrides --dims)")
        sp.add_argument("--dims", type=_dims, default=None, help="comma-separated dimensions")
        sp.add_argument("--trials", type=int, default=None)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=DEFAULT_TOL_REL, help="relative Loewner tolerance")
        sp.add_argument("--out", help="write JSON here instead of stdout")
        sp.set_defaults(func=func)

    sp = sub.add_parser("report-diff", help="compare two verify reports, ignoring timing")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.set_defaults(func=cmd_report_diff)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        _err(exc)
        return EXIT_INPUT
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
