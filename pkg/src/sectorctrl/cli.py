"""Command-line harness for the property suites.

    sectorctrl ctrl-equiv --dims 2,3,4 --trials 200 --seed 7
    sectorctrl routed-check circuit.rqc --json report.json

Output is one tab-separated line per case followed by a summary line. The
exit code is 0 iff every case passed, 1 on a failing case and 2 on bad input.
"""
from __future__ import annotations

import argparse
import sys

from .routedfmt.parser import ParseError
from .rng import Stream, prng_split  # noqa: F401  re-exported: the harness owns the seeding scheme
from .suites import SUITES, SuiteConfig, run_suite
from .tensor import EQ_TOL

FILE_VERBS = ("routed-check", "routed-eval")


def _dims(text: str) -> tuple:
    try:
        dims = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not dims or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError("dimensions must be positive")
    return dims


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=None, help="trials per case (suite default if omitted)")
    common.add_argument("--tol", type=float, default=EQ_TOL)
    common.add_argument("--json", metavar="PATH", help="write the JSON report here")
    common.add_argument("--dims", type=_dims, default=(), help="comma-separated dimensions")
    common.add_argument("--plot", metavar="PATH", help="save a distance plot (needs matplotlib)")
    common.add_argument("--timing", action="store_true", help="include runtime in the JSON report")

    parser = argparse.ArgumentParser(prog="sectorctrl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)
    for name in SUITES:
        p = sub.add_parser(name, parents=[common])
        if name in FILE_VERBS:
            p.add_argument("file")
        elif name == "two-ctrl-circuit":
            p.add_argument("file", nargs="?", help="circuit to use instead of the shipped fixture")
    return parser


def _fmt(x: float) -> str:
    return f"{x:.3e}"


def _detail(d: dict) -> str:
    if "violations" in d:
        return "; ".join(d["violations"])
    return " ".join(f"{k}={v}" for k, v in d.items() if not isinstance(v, dict))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = SuiteConfig(args.verb, args.dims, args.trials, args.seed, args.tol,
                          None, getattr(args, "file", None))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        report = run_suite(cfg)
    except (OSError, ValueError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    print("case\tstatus\ttrials\tfailures\tmax_distance\tdetail")
    for c in report.cases:
        detail = "" if args.verb in FILE_VERBS else _detail(c.detail)
        print("\t".join([c.name, "PASS" if c.passed else "FAIL", str(c.trials),
                         str(c.failures), _fmt(c.max_distance), detail]))
    if args.verb in FILE_VERBS and report.cases:
        for v in report.cases[-1].detail.get("violations", []):
            where = "" if v["in_sector"] is None else f" {tuple(v['in_sector'])}->{tuple(v['out_sector'])}"
            print(f"violation\t{v['node']}\t{v['kind']}{where}\t{v['message']}")
    print(f"{cfg.suite}\t{'PASS' if report.ok else 'FAIL'}\tcases={len(report.cases)}"
          f"\tfailed={report.n_failures}\tmax_distance={_fmt(report.max_distance)}")
    print(f"runtime {report.runtime:.2f}s", file=sys.stderr)

    try:
        if args.json:
            with open(args.json, "w", encoding="utf-8") as fh:
                fh.write(report.to_json(args.timing))
        if args.plot:
            from .plotting import plot_report
            plot_report(report, args.plot)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
