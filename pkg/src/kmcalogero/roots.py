"""Real roots of AE3 and their labelings.

A real root is alpha = ell*a0 + m*a1 + n*a2 with alpha.alpha = 2, which for the
Cartan matrix below is the diophantine condition (ell - m)^2 + n(n - m) = 1.
The same root is also labeled by the traceless reflection matrix
((p, q), (r, -p)) with p^2 + q r = 1, and by the binary quadratic form
A s^2 + B s t + C t^2 of discriminant 4.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvariantViolation

CARTAN_MATRIX = np.array([[2, -2, 0], [-2, 2, -1], [0, -1, 2]], dtype=np.int64)

_INT64_MAX = 2**63 - 1

_SQRT2 = math.sqrt(2.0)
_SQRT3 = math.sqrt(3.0)
# simple roots in the Minkowski-orthonormal basis (e0, e1, e2), metric diag(-1, 1, 1)
SIMPLE_ROOTS = np.array(
    [
        [_SQRT2 / _SQRT3, -_SQRT2, -_SQRT2 / _SQRT3],
        [0.0, _SQRT2, 0.0],
        [0.0, -_SQRT2 / 2.0, _SQRT2 * _SQRT3 / 2.0],
    ]
)


@dataclass(frozen=True, order=True)
class CartanRoot:
    ell: int
    m: int
    n: int

    def __post_init__(self):
        if (self.ell - self.m) ** 2 + self.n * (self.n - self.m) != 1:
            raise ValueError(f"{self} does not satisfy (ell-m)^2 + n(n-m) = 1")

    def __neg__(self) -> CartanRoot:
        return CartanRoot(-self.ell, -self.m, -self.n)

    @property
    def coefficients(self) -> tuple[int, int, int]:
        return (self.ell, self.m, self.n)


@dataclass(frozen=True)
class ReflectionTriple:
    """Traceless determinant -1 matrix ((p, q), (r, -p)); t and -t are the same mirror."""

    p: int
    q: int
    r: int

    def __post_init__(self):
        if self.p * self.p + self.q * self.r != 1:
            raise ValueError(f"{self} does not satisfy p^2 + q r = 1")

    def __neg__(self) -> ReflectionTriple:
        return ReflectionTriple(-self.p, -self.q, -self.r)

    def normalized(self) -> ReflectionTriple:
        if self.r > 0 or (self.r == 0 and self.p > 0) or (self.r == 0 and self.p == 0 and self.q > 0):
            return self
        return -self

    @property
    def is_normalized(self) -> bool:
        return self.normalized() == self


@dataclass(frozen=True)
class QuadForm:
    A: int
    B: int
    C: int

    @property
    def D(self) -> int:
        return self.B * self.B - 4 * self.A * self.C


@dataclass(frozen=True)
class DynkinLabel:
    pbar: int
    qbar: int

    @property
    def rbar(self) -> int:
        return -self.pbar - self.qbar

    @property
    def is_dominant(self) -> bool:
        return self.pbar >= 0 and self.qbar >= 0


class WeylOrbit(enum.Enum):
    PLUS = "Plus"
    MINUS = "Minus"


def gram_norm(ell: int, m: int, n: int) -> int:
    v = np.array([ell, m, n], dtype=np.int64)
    return int(v @ CARTAN_MATRIX @ v)


def minkowski_vector(root: CartanRoot) -> np.ndarray:
    """Components (alpha^0, alpha^1, alpha^2) in the orthonormal basis."""
    return np.array(root.coefficients, dtype=float) @ SIMPLE_ROOTS


def s3_images(ell: int, m: int, n: int) -> list[tuple[int, int]]:
    """The six images of (m, n) under the horizontal A2 Weyl group at level ell."""
    return [
        (m, n),
        (m, m - n),
        (2 * ell - n, m - n),
        (2 * ell - n, 2 * ell - m),
        (2 * ell - m + n, 2 * ell - m),
        (2 * ell - m + n, n),
    ]


def _check_width(ell: int) -> None:
    # 16 ell^2 + 48 is the largest intermediate in the level scan
    if 16 * ell * ell + 48 > _INT64_MAX:
        raise OverflowError(f"level {ell} exceeds the 64-bit working range")


def _level_pairs(ell: int) -> list[tuple[int, int]]:
    # with r = 2 ell - m and p = ell - n the condition reads 3 r^2 + (r - 2p)^2 = 4 (ell r + 1),
    # so 3 r^2 - 4 ell r - 4 <= 0 bounds r on both sides
    _check_width(ell)
    disc = math.isqrt(16 * ell * ell + 48) + 1
    r_lo = -((disc - 4 * ell) // 6) - 1
    r_hi = (4 * ell + disc) // 6 + 1
    pairs = set()
    for r in range(r_lo, r_hi + 1):
        s2 = 4 * (ell * r + 1) - 3 * r * r
        if s2 < 0:
            continue
        s = math.isqrt(s2)
        if s * s != s2 or (r - s) % 2:
            continue
        for sign in (1, -1):
            p = (r - sign * s) // 2
            pairs.add((2 * ell - r, ell - p))
    return sorted(pairs)


def enumerate_level(ell: int) -> list[CartanRoot]:
    """All real roots at level ell >= 0, sorted by (m, n)."""
    if ell < 0:
        raise ValueError("level must be non-negative; negative roots are -alpha for alpha at level -ell")
    return [CartanRoot(ell, m, n) for m, n in _level_pairs(ell)]


def enumerate_levels(ell_min: int, ell_max: int) -> list[CartanRoot]:
    out: list[CartanRoot] = []
    for ell in range(ell_min, ell_max + 1):
        out.extend(enumerate_level(ell))
    return out


def dynkin_label(root: CartanRoot) -> DynkinLabel:
    ell, m, n = root.coefficients
    return DynkinLabel(-2 * ell + 2 * m - n, -m + 2 * n)


def highest_weight_from_dynkin(ell: int, label: DynkinLabel) -> tuple[int, int]:
    pb, qb = label.pbar, label.qbar
    num_m, num_n = 4 * ell + 2 * pb + qb, 2 * ell + pb + 2 * qb
    if num_m % 3 or num_n % 3:
        raise ValueError(f"{label} is not a weight at level {ell}")
    return num_m // 3, num_n // 3


def representations(ell: int) -> list[tuple[CartanRoot, list[CartanRoot]]]:
    """S3 orbits at level ell as (highest weight, members), sorted by highest weight."""
    remaining = set(enumerate_level(ell))
    orbits = []
    while remaining:
        seed = min(remaining)
        members = sorted({CartanRoot(ell, a, b) for a, b in s3_images(ell, seed.m, seed.n)})
        remaining.difference_update(members)
        dominant = [x for x in members if dynkin_label(x).is_dominant]
        if len(dominant) != 1:
            raise InvariantViolation(f"orbit of {seed} has {len(dominant)} dominant weights")
        orbits.append((dominant[0], members))
    return sorted(orbits, key=lambda item: item[0])


def representation_count(ell: int) -> int:
    return len(representations(ell))


def cartan_to_reflection(root: CartanRoot) -> ReflectionTriple:
    ell, m, n = root.coefficients
    return ReflectionTriple(ell - n, n - m, 2 * ell - m).normalized()


def reflection_to_cartan(t: ReflectionTriple) -> CartanRoot:
    """Inverse relabeling; the result has level r - p - q and may be a negative root."""
    ell = t.r - t.p - t.q
    return CartanRoot(ell, 2 * ell - t.r, ell - t.p)


def reflection_to_quadform(t: ReflectionTriple) -> QuadForm:
    return QuadForm(t.r, -2 * t.p, -t.q)


def quadform_to_reflection(f: QuadForm) -> ReflectionTriple:
    if f.D != 4 or f.B % 2:
        raise ValueError(f"{f} is not a discriminant-4 form with even middle coefficient")
    return ReflectionTriple(-f.B // 2, -f.C, f.A)


_PLUS_ROWS = {(0, 1, 1), (0, 0, 1), (0, 1, 0)}
_MINUS_ROWS = {(1, 0, 0)}


def weyl_orbit(root: CartanRoot) -> WeylOrbit:
    parity = (root.ell % 2, root.m % 2, root.n % 2)
    if parity in _PLUS_ROWS:
        return WeylOrbit.PLUS
    if parity in _MINUS_ROWS:
        return WeylOrbit.MINUS
    raise InvariantViolation(f"{root} has parity pattern {parity} outside the orbit table")


# null vectors n_i and the A2 roots alpha_i as Cartan coefficients
NULL_VECTORS = {1: (1, 1, 0), 2: (1, 2, 1), 3: (1, 1, 1)}
A2_ROOTS = {1: (0, 1, 0), 2: (0, 0, 1), 3: (0, -1, -1)}


def first_family_root(ell: int, i: int, sign: int) -> CartanRoot:
    """ell * n_i + sign * alpha_i."""
    if ell < 0:
        raise ValueError("ell must be non-negative")
    if i not in NULL_VECTORS or sign not in (1, -1):
        raise ValueError("i must be 1, 2 or 3 and sign +1 or -1")
    nv, av = NULL_VECTORS[i], A2_ROOTS[i]
    return CartanRoot(*(ell * a + sign * b for a, b in zip(nv, av)))


# ---- export ---------------------------------------------------------------

ROW_KEYS = ("ell", "m", "n", "p", "q", "r", "pbar", "qbar", "orbit")


def root_row(root: CartanRoot) -> dict:
    t = cartan_to_reflection(root)
    lab = dynkin_label(root)
    return {
        "ell": root.ell,
        "m": root.m,
        "n": root.n,
        "p": t.p,
        "q": t.q,
        "r": t.r,
        "pbar": lab.pbar,
        "qbar": lab.qbar,
        "orbit": weyl_orbit(root).value,
    }


def roots_to_csv(roots: Iterable[CartanRoot]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=ROW_KEYS, lineterminator="\n")
    writer.writeheader()
    for root in roots:
        writer.writerow(root_row(root))
    return buf.getvalue()


def roots_to_json(roots: Sequence[CartanRoot]) -> str:
    return json.dumps([root_row(x) for x in roots], indent=1)


def representations_to_json(ell_min: int, ell_max: int) -> str:
    """Per-level grouping of the roots into A2 representations."""
    out = []
    for ell in range(ell_min, ell_max + 1):
        for hw, members in representations(ell):
            out.append(
                {
                    "ell": ell,
                    "highest_weight": [hw.m, hw.n],
                    "dynkin": asdict(dynkin_label(hw)),
                    "roots": [root_row(x) for x in members],
                }
            )
    return json.dumps(out, indent=1)
