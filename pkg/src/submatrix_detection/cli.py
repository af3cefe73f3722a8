"""Command line entry point: ``submatrix-detect <kind> --config FILE [...]``.

Exit codes: 0 success, 2 configuration error, 3 infeasible scenario.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, ProblemConfig, TestConfig
from .extremal import BandTooLarge, RadiusExceedsClass, SolverDidNotConverge
from .harness import KINDS, ExperimentSpec, run_experiment
from .stats import BudgetExceeded

EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3


def _floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _int_range(text: str) -> tuple:
    lo, _, hi = text.partition(":")
    try:
        return int(lo), int(hi or lo)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="submatrix-detect",
                                     description="Sparse submatrix detection in Gaussian sequence data.")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--config", help="flat key=value scenario file (M,N,m,n,epsilon,s,tau,r,band,seed)")
    parser.add_argument("--seed", type=int, help="override the config seed (unsigned 64-bit)")
    parser.add_argument("--out", help="output path (stdout when omitted)")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--r-grid", type=_floats, default=(0.5, 1.0, 2.0, 4.0),
                        help="radius multipliers of the detection boundary")
    parser.add_argument("--delta", type=float, default=TestConfig.delta)
    parser.add_argument("--c-chi", type=float, default=TestConfig.c_chi)
    parser.add_argument("--alpha-floor", type=float, default=TestConfig.alpha_floor)
    parser.add_argument("--restarts", type=int, default=TestConfig.restarts)
    parser.add_argument("--max-iters", type=int, default=TestConfig.max_iters)
    parser.add_argument("--exhaustive-budget", type=int, default=TestConfig.exhaustive_budget)
    parser.add_argument("--timing", action="store_true", help="record wall time in simulate rows")
    parser.add_argument("--lam", type=float, default=0.5, help="mgf: lambda")
    parser.add_argument("--draws", type=int, default=10**6, help="mgf: Monte Carlo draws")
    parser.add_argument("--hg-N", type=_int_range, default=(20, 60), help="hgdom: N range LO:HI")
    parser.add_argument("--hg-n", type=_int_range, default=(2, 5), help="hgdom: n range LO:HI")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _problem(args) -> ProblemConfig:
    if args.config is None:
        if args.kind == "hgdom":
            return ProblemConfig(M=1, N=1, m=1, n=1, epsilon=1.0, s=0.0, tau=1.0, r=1.0)
        raise ConfigError(f"{args.kind} needs --config")
    problem = ProblemConfig.load(args.config)
    if args.seed is not None:
        problem = problem.with_(seed=args.seed)
    return problem


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        spec = ExperimentSpec(
            kind=args.kind, problem=_problem(args),
            tests=TestConfig(delta=args.delta, c_chi=args.c_chi, alpha_floor=args.alpha_floor,
                             restarts=args.restarts, max_iters=args.max_iters,
                             exhaustive_budget=args.exhaustive_budget),
            trials=args.trials, r_grid=args.r_grid, out=args.out, threads=args.threads,
            format=args.format, timing=args.timing, lam=args.lam, draws=args.draws,
            hg_N=args.hg_N, hg_n=args.hg_n,
        )
    except (ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_experiment(spec)
    except (RadiusExceedsClass, BandTooLarge, SolverDidNotConverge, BudgetExceeded, ValueError) as exc:
        print(f"infeasible scenario: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    if not spec.out:
        sys.stdout.write(result.text)
    return EXIT_INFEASIBLE if result.failures else 0


if __name__ == "__main__":
    sys.exit(main())
