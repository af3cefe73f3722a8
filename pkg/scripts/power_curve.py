#!/usr/bin/env python3
"""Power curve of the chi2, scan and combined tests around the detection boundary.

    python scripts/power_curve.py --M 30 --m 5 --trials 200 --out power.csv
"""

import argparse

from submatrix_detection.config import ProblemConfig, TestConfig
from submatrix_detection.harness import ExperimentSpec, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--M", type=int, default=30)
    ap.add_argument("--N", type=int)
    ap.add_argument("--m", type=int, default=5)
    ap.add_argument("--n", type=int)
    ap.add_argument("--epsilon", type=float, default=0.05)
    ap.add_argument("--s", type=float, default=0.0)
    ap.add_argument("--tau", type=float, default=1.0)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--rho", default="0.5,1,1.5,2,3,4")
    ap.add_argument("--restarts", type=int, default=50)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args()
    problem = ProblemConfig(M=args.M, N=args.N or args.M, m=args.m, n=args.n or args.m, epsilon=args.epsilon,
                            s=args.s, tau=args.tau, r=1.0, seed=args.seed)
    spec = ExperimentSpec("power", problem, TestConfig(restarts=args.restarts), trials=args.trials,
                          r_grid=tuple(float(x) for x in args.rho.split(",")), out=args.out, threads=args.threads)
    res = run_experiment(spec)
    if not args.out:
        print(res.text, end="")
        print(res.extra["boundary.json"], end="")


if __name__ == "__main__":
    main()
