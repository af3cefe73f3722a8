#!/usr/bin/env python3
"""Detection-boundary radii over a grid of noise levels and grid sizes (CSV to stdout)."""

import argparse

import numpy as np

from submatrix_detection.boundary import boundary_radii


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tau", type=float, default=1.0)
    ap.add_argument("--s", type=float, default=0.0)
    ap.add_argument("--M", type=int, nargs="+", default=[100, 1000, 10000])
    ap.add_argument("--sparsity", type=float, default=0.5, help="m = M**sparsity")
    ap.add_argument("--eps", type=float, nargs="+", default=list(np.geomspace(1e-1, 1e-4, 7)))
    args = ap.parse_args()
    print("M,m,epsilon,r_chi,r_scan,r_boundary,regime")
    for M in args.M:
        m = max(1, int(round(M ** args.sparsity)))
        for eps in args.eps:
            rep = boundary_radii(args.tau, args.s, eps, M, M, m, m)
            print(f"{M},{m},{eps:.3e},{rep.r_chi:.6e},{rep.r_scan:.6e},{rep.r_boundary:.6e},{rep.regime}")


if __name__ == "__main__":
    main()
