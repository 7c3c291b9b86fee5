"""Smallest normalized margin of each algebraic norm bound over seeded random trace-free tensors.

Run: python3 scripts/inequality_scan.py [--seeds 10000]
"""
import argparse
from collections import defaultdict

from tfcalc import verify as V
from tfcalc.symalg import random_metric, random_tracefree


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=10_000)
    args = ap.parse_args()
    worst = defaultdict(lambda: float("inf"))
    ident = defaultdict(float)
    for s in range(args.seeds):
        n, k = 3 + s % 4, 2 + (s // 4) % 4
        h = random_metric(n, s)
        m, idn, scale = V.norm_inequalities(random_tracefree(k, n, s, h), h)
        for key, v in m.items():
            worst[key] = min(worst[key], v / scale)
        for key, v in idn.items():
            ident[key] = max(ident[key], abs(v) / scale)
    print("inequalities (min margin / |w|^4):")
    for key in sorted(worst):
        print(f"  {key:<22}{worst[key]: .3e}")
    print("identities (max |residual| / |w|^4):")
    for key in sorted(ident):
        print(f"  {key:<22}{ident[key]: .3e}")


if __name__ == "__main__":
    main()
