"""``slamopt`` command line entry point."""

from __future__ import annotations

import argparse
import csv
import sys

from .config import build_spec, load_spec
from .runner import SUMMARY_HEADER, run_experiment, summary_rows


def _seeds(text: str):
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(s) for s in text.split(",") if s]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="slamopt",
        description="Run stochastic linesearch experiments and write CSV traces and plots.",
    )
    p.add_argument("spec", nargs="?", help="JSON experiment descriptor; flags override its fields")
    p.add_argument("--problem", choices=("rosenbrock", "logreg", "quadratic", "dispatch"))
    p.add_argument("--n", type=int, help="problem dimension")
    p.add_argument("--solver", action="append", dest="solvers",
                   help="slam, slam_con, sls0, sgd_const, sgd_dimin, adam; append _tuned to tune (repeatable)")
    p.add_argument("--K", type=int, help="iteration budget")
    p.add_argument("--batch", help="batch schedule: 128, frac:0.1, linear, power:2")
    p.add_argument("--period", help="cycle schedule: 50, frac:0.1, geometric:1, linear:1, single")
    p.add_argument("--s", type=float, help="initial linesearch step")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--step", type=float, help="baseline step when not tuned")
    p.add_argument("--seeds", type=_seeds, help="comma list or range a..b")
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--no-plots", action="store_true", help="skip plot data and PNGs")
    p.add_argument("--quiet", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    base = load_spec(args.spec) if args.spec else {}
    if not args.spec and not args.problem:
        print("slamopt: give a spec file or --problem", file=sys.stderr)
        return 2
    try:
        spec = build_spec(
            base, problem=args.problem, n=args.n, solvers=args.solvers, K=args.K, batch=args.batch,
            period=args.period, s=args.s, alpha=args.alpha, beta=args.beta, step=args.step,
            seeds=args.seeds, out=args.out, jobs=args.jobs,
        )
    except (TypeError, ValueError) as exc:
        print(f"slamopt: {exc}", file=sys.stderr)
        return 2
    log = None if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    res = run_experiment(spec, plots=not args.no_plots, log=log)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for row in summary_rows(spec, res):
        w.writerow([v if isinstance(v, str) else (repr(v) if isinstance(v, float) else v) for v in row])
    if not args.quiet:
        print(f"wrote {len(res.files)} files under {spec.out}", file=sys.stderr)
    return res.exit_code


if __name__ == "__main__":
    sys.exit(main())
