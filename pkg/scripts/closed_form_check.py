"""Resummed forms of the potential on the hyperboloid against direct root sums.

* level 0: six-root sum vs 9 / (2 sinh^2(theta) cos^2(3 phi)) and vs the
  theta-independent 1 / (2 cos^2(3 phi)), which it does not match;
* level 1: the three-root sum (without the 1/2) vs its rational closed form;
* first family: partial sums over l <= L vs the closed form as L grows.
"""

import math

from kmcalogero import potential
from kmcalogero.geometry import MinkowskiPoint, disk_to_hyperboloid


def main():
    print("level 0 six-root sum")
    print(f"{'theta':>6} {'phi':>6} {'direct':>16} {'9/(2sh^2c^2)':>16} {'1/(2c^2)':>16}")
    for theta, phi in [(0.4, 0.3), (1.1, 1.0), (0.2, -0.7), (0.8, 0.05)]:
        v = potential.v_level_minkowski(0, MinkowskiPoint.from_polar(theta, phi))
        a = 9 / (2 * math.sinh(theta) ** 2 * math.cos(3 * phi) ** 2)
        b = 1 / (2 * math.cos(3 * phi) ** 2)
        print(f"{theta:6.2f} {phi:6.2f} {v:16.10f} {a:16.10f} {b:16.10f}")

    print("\nlevel 1 three-root sum (phi -> -phi orientation)")
    for theta, phi in [(0.4, 0.3), (1.1, 1.0), (0.2, -0.7)]:
        ch, sh, s3 = math.cosh(theta), math.sinh(theta), -math.sin(3 * phi)
        closed = 18 * (ch**4 + 3 * sh**4 + 4 * ch * sh**3 * s3) / (math.cosh(3 * theta) - 3 * ch + 4 * sh**3 * s3) ** 2
        v = 2 * potential.v_level_minkowski(1, MinkowskiPoint.from_polar(theta, phi))
        print(f"{theta:6.2f} {phi:6.2f} {v:16.10f} {closed:16.10f}")

    print("\nfirst family: partial sums vs closed form")
    for w in (0.21 + 0.13j, -0.3 + 0.05j, 0.1 - 0.4j):
        x = disk_to_hyperboloid(w)
        closed = potential.first_family_closed(x)
        row = [abs(potential.first_family_partial(x, L) - closed) for L in (10, 100, 1000)]
        print(f"w={w}: closed={closed:.12f} |err| at L=10,100,1000: " + ", ".join(f"{e:.2e}" for e in row))


if __name__ == "__main__":
    main()
