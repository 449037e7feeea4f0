"""Number of A2 representations per level and the first level with k of them."""

import argparse

from kmcalogero.roots import dynkin_label, representation_count, representations


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ell-max", type=int, default=200)
    ap.add_argument("--show", type=int, default=12, help="print highest weights for ell <= SHOW")
    args = ap.parse_args()

    first = {}
    for ell in range(args.ell_max + 1):
        k = representation_count(ell)
        first.setdefault(k, ell)
        if ell <= args.show:
            labels = ", ".join(f"({hw.m},{hw.n})~[{dynkin_label(hw).pbar},{dynkin_label(hw).qbar}]" for hw, _ in representations(ell))
            print(f"ell={ell:3d} count={k} {labels}")
    print("\nfirst level with k representations:")
    for k in sorted(first):
        print(f"  k={k:2d}: ell={first[k]}")


if __name__ == "__main__":
    main()
