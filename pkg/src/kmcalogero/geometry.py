"""Maps between the future hyperboloid, the Poincare disk and the upper half-plane,
plus the PGL(2, Z) action and reduction into the fundamental triangle
{|z| >= 1, 0 <= Re z <= 1/2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .roots import ReflectionTriple

HYPERBOLOID_TOL = 1e-12
BOUNDARY_TOL = 1e-12
MAX_REDUCTION_STEPS = 10_000

# rho = exp(2 pi i / 3), kept as its exact real/imaginary parts
RHO = complex(-0.5, math.sqrt(3.0) / 2.0)
RHO_BAR = RHO.conjugate()


@dataclass(frozen=True)
class MinkowskiPoint:
    x0: float
    x1: float
    x2: float

    @classmethod
    def from_polar(cls, theta: float, phi: float, radius: float = 1.0) -> MinkowskiPoint:
        return cls(
            radius * math.cosh(theta),
            radius * math.sinh(theta) * math.cos(phi),
            radius * math.sinh(theta) * math.sin(phi),
        )

    def as_array(self) -> np.ndarray:
        return np.array([self.x0, self.x1, self.x2])

    def dot(self, other) -> float:
        o = other.as_array() if isinstance(other, MinkowskiPoint) else np.asarray(other, dtype=float)
        return -self.x0 * o[0] + self.x1 * o[1] + self.x2 * o[2]

    @property
    def norm2(self) -> float:
        return self.dot(self)

    def on_hyperboloid(self, tol: float = HYPERBOLOID_TOL) -> bool:
        return self.x0 >= 1.0 - tol and abs(self.norm2 + 1.0) <= tol * max(1.0, self.x0 * self.x0)


@dataclass(frozen=True)
class HalfPlanePoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"Im z must be positive, got {self.y}")

    @classmethod
    def from_complex(cls, z: complex) -> HalfPlanePoint:
        return cls(z.real, z.imag)

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


def as_halfplane(z) -> HalfPlanePoint:
    if isinstance(z, HalfPlanePoint):
        return z
    if isinstance(z, (tuple, list)):
        return HalfPlanePoint(float(z[0]), float(z[1]))
    return HalfPlanePoint.from_complex(complex(z))


@dataclass(frozen=True)
class GL2ZElement:
    """Integer matrix ((a, b), (c, d)) with determinant +-1; det -1 acts through conj(z)."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.det not in (1, -1):
            raise ValueError(f"determinant must be +-1, got {self.det}")

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: GL2ZElement) -> GL2ZElement:
        return GL2ZElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> GL2ZElement:
        k = self.det
        return GL2ZElement(k * self.d, -k * self.b, -k * self.c, k * self.a)

    def __pow__(self, k: int) -> GL2ZElement:
        base = self if k >= 0 else self.inverse()
        out = IDENTITY
        for _ in range(abs(k)):
            out = out @ base
        return out

    def projectively_equal(self, other: GL2ZElement) -> bool:
        mine = (self.a, self.b, self.c, self.d)
        theirs = (other.a, other.b, other.c, other.d)
        return mine == theirs or mine == tuple(-v for v in theirs)


IDENTITY = GL2ZElement(1, 0, 0, 1)
S1 = GL2ZElement(0, 1, 1, 0)  # z -> 1/conj(z)
S2 = GL2ZElement(1, -1, 0, -1)  # z -> 1 - conj(z)
S3 = GL2ZElement(1, 0, 0, -1)  # z -> -conj(z)
T = GL2ZElement(1, 1, 0, 1)  # z -> z + 1
S = GL2ZElement(0, -1, 1, 0)  # z -> -1/z


def apply_gl2z(g: GL2ZElement, z) -> HalfPlanePoint:
    w = as_halfplane(z).z
    if g.det == -1:
        w = w.conjugate()
    return HalfPlanePoint.from_complex((g.a * w + g.b) / (g.c * w + g.d))


# ---- coordinate maps --------------------------------------------------------


def hyperboloid_to_disk(p: MinkowskiPoint) -> complex:
    if not p.on_hyperboloid():
        raise ValueError(f"{p} is not on the future unit hyperboloid")
    w = complex(p.x1, p.x2)
    return w / (1.0 + math.sqrt(1.0 + abs(w) ** 2))


def disk_to_hyperboloid(v: complex) -> MinkowskiPoint:
    vv = abs(v) ** 2
    if not vv < 1.0:
        raise ValueError(f"|v| must be < 1, got {math.sqrt(vv)}")
    w = 2.0 * v / (1.0 - vv)
    return MinkowskiPoint((1.0 + vv) / (1.0 - vv), w.real, w.imag)


def disk_to_halfplane(v: complex) -> HalfPlanePoint:
    if not abs(v) < 1.0:
        raise ValueError(f"|v| must be < 1, got {abs(v)}")
    return HalfPlanePoint.from_complex((1.0 - 1j * RHO * v) / (1j * v - RHO))


def halfplane_to_disk(z) -> complex:
    zc = as_halfplane(z).z
    return -1j * (RHO * zc + 1.0) / (zc + RHO)


def halfplane_to_hyperboloid(z) -> MinkowskiPoint:
    zc = as_halfplane(z).z
    w = 2.0 / math.sqrt(3.0) * (1.0 + RHO * zc) * (RHO_BAR + zc.conjugate()) / (zc - zc.conjugate())
    return MinkowskiPoint(math.sqrt(1.0 + abs(w) ** 2), w.real, w.imag)


def hyperboloid_to_halfplane(p: MinkowskiPoint) -> HalfPlanePoint:
    return disk_to_halfplane(hyperboloid_to_disk(p))


# ---- fundamental domain -------------------------------------------------------


def in_fundamental_domain(z, tol: float = BOUNDARY_TOL) -> bool:
    h = as_halfplane(z)
    return h.x * h.x + h.y * h.y >= 1.0 - tol and -tol <= h.x <= 0.5 + tol


def reduce_to_fundamental(z) -> tuple[HalfPlanePoint, GL2ZElement]:
    """Return (z', g) with z' = g z in the fundamental triangle."""
    h = as_halfplane(z)
    w = h.z
    g = IDENTITY
    for _ in range(MAX_REDUCTION_STEPS):
        # Re w into (-1/2, 1/2]
        k = math.ceil(w.real - 0.5)
        if k:
            w = w - k
            g = (T ** (-k)) @ g
        if abs(w) ** 2 < 1.0 - BOUNDARY_TOL:
            w = -1.0 / w
            g = S @ g
            continue
        break
    else:
        raise RuntimeError(f"reduction of {h} did not terminate")
    if w.real < 0.0:
        w = -w.conjugate()
        g = S3 @ g
    return HalfPlanePoint.from_complex(w), g


def mirror_value(t: ReflectionTriple, z) -> float:
    """r |z|^2 - p (z + conj z) - q; vanishes exactly on the mirror of t."""
    h = as_halfplane(z)
    return t.r * (h.x * h.x + h.y * h.y) - 2.0 * t.p * h.x - t.q


def mirror_curve_membership(t: ReflectionTriple, z, tol: float) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return abs(mirror_value(t, z)) < tol


def mirror_curve_samples(t: ReflectionTriple, n: int = 200, y_max: float = 4.0) -> np.ndarray:
    """Points (x, y) along the half-plane trace of a mirror, for plotting."""
    if t.r == 0:
        x = t.q / (-2.0 * t.p)
        ys = np.linspace(0.0, y_max, n + 1)[1:]
        return np.column_stack([np.full_like(ys, x), ys])
    centre, radius = t.p / t.r, 1.0 / abs(t.r)
    phi = np.linspace(0.0, math.pi, n + 2)[1:-1]
    return np.column_stack([centre + radius * np.cos(phi), radius * np.sin(phi)])
