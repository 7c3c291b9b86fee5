"""Observed convergence order of every Weitzenböck-type identity on each chart fixture.

Run: python3 scripts/richardson_orders.py [--step 1e-2] [--scheme central2]
"""
import argparse

import numpy as np

from tfcalc import chartgeo as cg


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--step", type=float, default=1e-2)
    ap.add_argument("--scheme", default="central2", choices=["central2", "central4"])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cfg = cg.FDConfig(args.step, args.scheme)
    x = np.array([0.3, -0.2, 0.1])
    fixtures = ["perturbed:0,0.1", "sphere", "hyperbolic", "torus"]
    print(f"{'identity':<18}" + "".join(f"{f:>20}" for f in fixtures))
    for which in cg.WEITZENBOCK:
        cells = []
        for key in fixtures:
            h = cg.get_fixture(key, 3)
            w = cg.random_trig_field(3, 2, args.seed, h=h)
            r = cg.richardson(lambda c: cg.weitzenbock_residual(w, h, x, c, which, alpha=0.3), cfg)
            cells.append(f"{r['residual_refined']:9.1e} p={r['order']:5.2f}")
        print(f"{which:<18}" + "".join(f"{c:>20}" for c in cells))


if __name__ == "__main__":
    main()
