"""Refined Kato margins per fixture and the gap to the unrefined constant.

Run: python3 scripts/kato_margins.py [--samples 200]
"""
import argparse
from collections import defaultdict

import numpy as np

from tfcalc import chartgeo as cg
from tfcalc import verify as V


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cfg = cg.FDConfig()
    cases = V.kato_cases(args.seed)
    rng = np.random.default_rng(args.seed + 1)
    stats = defaultdict(list)
    for i in range(args.samples):
        name, w, h, cls, kind = cases[i % len(cases)]
        x = V.sample_point(kind, w.dim, rng)
        if float(np.abs(w(x)).max()) < 1e-3:
            continue
        r = cg.kato_check(w, h, x, cfg, cls)
        stats[(name, cls)].append((r.margin, r.unrefined_margin))
    print(f"{'fixture':<28}{'class':<9}{'count':>6}{'min margin':>13}{'min unrefined':>15}")
    for (name, cls), rows in sorted(stats.items()):
        m = np.array(rows)
        print(f"{name:<28}{cls:<9}{len(rows):>6}{m[:, 0].min():>13.2e}{m[:, 1].min():>15.2e}")
    print()
    print(V.kato_suite(args.samples, args.seed).to_json())


if __name__ == "__main__":
    main()
