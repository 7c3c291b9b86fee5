"""Float residual of the algebra identities against the condition number of the random metric.

Run: python3 scripts/conditioning_scan.py [--n 6] [--k 4] [--trials 200]
"""
import argparse

import numpy as np

from tfcalc import verify as V
from tfcalc.symalg import random_metric


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--trials", type=int, default=200)
    args = ap.parse_args()
    rows = []
    for t in range(args.trials):
        seed = 1000 * args.n + 100 * args.k + t
        base = seed * 7919 + 31 * args.n + args.k
        cond = np.linalg.cond(random_metric(args.n, base).matrix)
        res = max(V.algebra_trial(args.n, args.k, seed, max_cond=None).values())
        rows.append((cond, res))
    rows.sort()
    edges = [0, 50, 100, 200, 500, 1000, 2000, np.inf]
    print(f"{'cond range':<16}{'count':>6}{'max residual':>15}")
    for lo, hi in zip(edges, edges[1:]):
        sel = [r for c, r in rows if lo <= c < hi]
        if sel:
            print(f"[{lo}, {hi}){'':<{max(1, 14 - len(f'[{lo}, {hi})'))}}{len(sel):>6}{max(sel):>15.2e}")


if __name__ == "__main__":
    main()
