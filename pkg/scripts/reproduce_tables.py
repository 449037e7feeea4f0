"""Partial sums of U at the two reference points for every correction level.

Prints one block per level with R along the columns, followed by the
window-averaged value at the largest R.  Usage:

    python scripts/reproduce_tables.py [--R-max 1000000] [--threads 4]
"""

import argparse
import time

from kmcalogero import potential
from kmcalogero.arith import SqrtOneTable

POINTS = {"z1": (0.1, 0.7), "z2": (-0.2, 1.4)}
R_GRID = [10_000, 20_000, 50_000, 100_000, 200_000, 500_000, 1_000_000]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--R-max", type=int, default=1_000_000)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--accumulator", choices=["kahan", "dd"], default="kahan")
    args = ap.parse_args()

    Rs = [R for R in R_GRID if R <= args.R_max]
    t0 = time.perf_counter()
    table = SqrtOneTable.build(args.R_max)
    print(f"sieve to {args.R_max}: {time.perf_counter() - t0:.2f}s, {table.total} residues")

    series = {}
    for name, z in POINTS.items():
        t0 = time.perf_counter()
        series[name] = potential.PotentialSeries.compute(z, args.R_max, table, threads=args.threads, accumulator=args.accumulator)
        print(f"{name} = {z}: {time.perf_counter() - t0:.2f}s")

    for level in potential.Level:
        if level is potential.Level.AVG:
            continue
        print(f"\n[{level.value}]")
        print("point " + "".join(f"{R:>20d}" for R in Rs))
        for name, s in series.items():
            print(f"{name:5s} " + "".join(f"{v:20.13f}" for v in s.values(level, Rs)))

    print(f"\n[avg] window [2R/3, R] at R = {args.R_max}")
    for name, s in series.items():
        print(f"{name:5s} {s.value(potential.TruncationScheme(args.R_max, 'avg')):.15f}")


if __name__ == "__main__":
    main()
