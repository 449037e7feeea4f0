"""Largest |c_l| over random points for rank-2 planes with m = 0..5.

Planes with m <= 2 should give rounding-level values; m >= 3 should not.
"""

import argparse

import numpy as np

from kmcalogero import dunkl
from kmcalogero.errors import PoleProximity, TailNotCertified


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--ell-max", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    pts = [dunkl.PlanePoint(float(u), float(v)) for u, v in rng.uniform(-2, 2, size=(args.points, 2))]

    print(f"{'m':>2} {'ell':>3} {'max|c|':>12} {'median|c|':>12} {'max tail':>10} skipped")
    for m in range(6):
        for ell in range(1, args.ell_max + 1):
            vals, tails, skipped = [], [], 0
            for pt in pts:
                try:
                    c = dunkl.y_coefficient(m, ell, pt)
                except (PoleProximity, TailNotCertified):
                    skipped += 1
                    continue
                vals.append(abs(c.value))
                tails.append(c.tail_bound)
            print(f"{m:2d} {ell:3d} {max(vals):12.3e} {np.median(vals):12.3e} {max(tails):10.1e} {skipped}")

    pt = dunkl.PlanePoint(1.0, 0.3)
    print("\nm=3 at (u, v) = (1, 0.3):")
    for K in (10, 20, 40):
        c = dunkl.y_coefficient(3, 1, pt, K)
        print(f"  K={K:2d} c1={c.value!r} tail<={c.tail_bound:.1e}")


if __name__ == "__main__":
    main()
