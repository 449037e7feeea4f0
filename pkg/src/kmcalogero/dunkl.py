"""Rank-2 root planes and the Dunkl commutator coefficients.

Two real roots alpha, beta with alpha.beta = -m span a plane whose real roots are
gamma_k = xi_k alpha + xi_{k-1} beta, with xi_{k+1} = m xi_k - xi_{k-1}, xi_0 = 0,
xi_1 = 1.  A point x enters only through u = alpha.x and v = beta.x, so
gamma_k.x = xi_k u + xi_{k-1} v.  The coefficient of (s_a s_b)^l - (s_b s_a)^l in
the commutator two-form restricted to the plane is

    c_l = -xi_l sum_k 1 / ((gamma_k.x) (gamma_{k-l}.x)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import IntegerOverflow, PoleProximity, TailNotCertified

INT64_MAX = 2**63 - 1
DENOM_EPS = 1e-9
TAIL_TARGET = 1e-14
M3_MAX_K = 45


@dataclass(frozen=True, eq=False)
class PlaneCoefficients:
    m: int
    K: int
    xi: np.ndarray  # int64, xi[k + K] = xi_k for -K <= k <= K

    def __getitem__(self, k: int) -> int:
        if not -self.K <= k <= self.K:
            raise IndexError(f"index {k} outside the window [-{self.K}, {self.K}]")
        return int(self.xi[k + self.K])

    @property
    def z_plus(self) -> float:
        return xi_growth(self.m)


@dataclass(frozen=True)
class PlanePoint:
    u: float  # alpha . x
    v: float  # beta . x

    @property
    def wbar(self) -> float:
        return self.u + self.v

    @property
    def scale(self) -> float:
        return abs(self.u) + abs(self.wbar)


@dataclass(frozen=True)
class PlaneSum:
    value: float
    tail_bound: float
    K: int
    method: str  # "direct", "cot" or "period"

    def __float__(self) -> float:
        return self.value


def xi_growth(m: int) -> float:
    """z_+ = (m + sqrt(m^2 - 4)) / 2, the growth rate of xi_k (1 for m <= 2)."""
    return (m + math.sqrt(m * m - 4)) / 2.0 if m > 2 else 1.0


def xi_sequence(m: int, K: int) -> PlaneCoefficients:
    if m < 0:
        raise ValueError("m must be non-negative")
    if K < 1:
        raise ValueError("K must be positive")
    xs = {0: 0, 1: 1}
    for k in range(1, K):
        xs[k + 1] = m * xs[k] - xs[k - 1]
        if abs(xs[k + 1]) > INT64_MAX:
            raise IntegerOverflow(f"xi_{k + 1} for m={m} exceeds 64 bits")
    arr = np.empty(2 * K + 1, dtype=np.int64)
    for k in range(0, K + 1):
        arr[K + k] = xs[k]
        arr[K - k] = -xs[k]
    return PlaneCoefficients(m, K, arr)


def xi_binomial(m: int, k: int) -> int:
    """xi_{k+1} = sum_j (-1)^j C(k - j, j) m^(k - 2j), k >= 0."""
    if k < 0:
        raise ValueError("k must be non-negative")
    return sum((-1) ** j * comb(k - j, j) * m ** (k - 2 * j) for j in range(k // 2 + 1))


def xi_closed(m: int, k: int) -> float:
    """xi_{k+1} = (1 - z^(2k+2)) / (z^k (1 - z^2)) with z = z_+, m >= 3."""
    if m < 3:
        raise ValueError("the closed form needs m >= 3")
    z = xi_growth(m)
    return (1.0 - z ** (2 * k + 2)) / (z**k * (1.0 - z * z))


def gram_pairing(pc: PlaneCoefficients, k: int, k2: int) -> int:
    """gamma_k . gamma_k2 = xi_{k-k2+1} - xi_{k-k2-1}."""
    d = k - k2
    return pc[d + 1] - pc[d - 1]


def gram_quadratic(pc: PlaneCoefficients, k: int, k2: int) -> int:
    """The same inner product from the Gram matrix ((2, -m), (-m, 2))."""
    a, b, c, d = pc[k], pc[k - 1], pc[k2], pc[k2 - 1]
    return 2 * (a * c + b * d) - pc.m * (a * d + b * c)


def fibonacci(n: int) -> int:
    """f_n with f_0 = 0, f_1 = 1 and f_{-n} = (-1)^(n+1) f_n."""
    a, b = 0, 1
    for _ in range(abs(n)):
        a, b = b, a + b
    return a if n >= 0 or n % 2 else -a


def fibonacci_halving_check(K: int) -> bool:
    """True iff xi_k(m=3) = f_{2k} for |k| <= K."""
    if K > M3_MAX_K:
        raise IntegerOverflow(f"K = {K} exceeds the 64-bit range of xi for m = 3")
    pc = xi_sequence(3, K)
    return all(pc[k] == fibonacci(2 * k) for k in range(-K, K + 1))


# ---- the plane sums -------------------------------------------------------------


def _denominators(pc: PlaneCoefficients, pt: PlanePoint, k_lo: int, k_hi: int) -> np.ndarray:
    # gamma_k . x for k in [k_lo, k_hi]; needs xi on [k_lo - 1, k_hi]
    if k_lo - 1 < -pc.K or k_hi > pc.K:
        raise IndexError(f"window [{k_lo}, {k_hi}] exceeds the xi table of half-width {pc.K}")
    ks = np.arange(k_lo, k_hi + 1)
    xk = pc.xi[ks + pc.K].astype(np.float64)
    xk1 = pc.xi[ks - 1 + pc.K].astype(np.float64)
    d = xk * pt.u + xk1 * pt.v
    bad = np.flatnonzero(np.abs(d) < DENOM_EPS * pt.scale)
    if bad.size:
        raise PoleProximity(f"gamma_{int(ks[bad[0]])}.x vanishes at {pt}", mirror=(pc.m, int(ks[bad[0]])))
    return d


def _period(m: int) -> int:
    return {0: 4, 1: 6}[m]


def _auto_K(m: int, ell: int) -> int:
    if m <= 2:
        return max(ell + 1, 8)
    return ell + math.ceil(-math.log(TAIL_TARGET) / (2.0 * math.log(xi_growth(m)))) + 2


def plane_k_sum(m: int, ell: int, pt: PlanePoint, K: int | None = None) -> PlaneSum:
    """sum_k 1 / ((gamma_k.x)(gamma_{k-ell}.x)) over the plane's root chain.

    m >= 3: direct sum over k in [ell - K, K] with a geometric tail bound.
    m = 2: cotangent closed form (K ignored).
    m <= 1: the chain is periodic; the sum runs over one period.
    """
    if m < 0 or ell < 0:
        raise ValueError("m and ell must be non-negative")
    if pt.scale == 0.0:
        raise PoleProximity("degenerate plane point")
    if m <= 1:
        P = _period(m)
        pc = xi_sequence(m, P + ell + 2)
        d = _denominators(pc, pt, -ell - 1, P)
        # d[i] = gamma_{i - ell - 1}.x
        terms = [1.0 / (d[k + ell + 1] * d[k + 1]) for k in range(P)]
        return PlaneSum(math.fsum(terms), 0.0, P, "period")
    if m == 2:
        return _cot_sum(ell, pt)
    if K is None:
        K = _auto_K(m, ell)
    if K < ell + 2:
        raise ValueError(f"K must be at least ell + 2 = {ell + 2}")
    pc = xi_sequence(m, K + 1)
    d = _denominators(pc, pt, -K, K)
    # gamma_k.x = d[k + K]
    ks = np.arange(ell - K, K + 1)
    terms = 1.0 / (d[ks + K] * d[ks - ell + K])
    value = math.fsum(terms)
    ratios = [abs(terms[-1] / terms[-2]), abs(terms[0] / terms[1])]
    rho = max(ratios)
    if not rho < 0.5:
        raise TailNotCertified(f"terms do not decay geometrically at the window edge (ratio {rho:.3g})")
    # 2x slack on the asymptotic ratio 1/z_+^2 covers the pre-asymptotic regime
    rho = 2.0 * rho
    tail = (abs(terms[-1]) + abs(terms[0])) * rho / (1.0 - rho)
    return PlaneSum(value, tail, K, "direct")


def _cot_sum(ell: int, pt: PlanePoint) -> PlaneSum:
    # m = 2: gamma_k.x = (k - 1) wbar + u, so with lam = u / wbar the sum is a
    # shifted Hurwitz-type sum: 0 for ell >= 1 (cot(pi lam) + cot(pi(ell - lam)) = 0)
    # and pi^2 / (wbar^2 sin^2(pi lam)) for ell = 0
    wb = pt.wbar
    if abs(wb) < DENOM_EPS * pt.scale:
        raise TailNotCertified("gamma-bar . x vanishes; the cotangent form is undefined")
    lam = pt.u / wb
    # cot has period pi: reduce lam first so large |lam| loses no bits
    frac = lam - round(lam)
    s = math.sin(math.pi * frac)
    if abs(s) < DENOM_EPS:
        raise TailNotCertified(f"cotangent argument pi*{lam} sits on a pole")
    if ell == 0:
        return PlaneSum((math.pi / (wb * s)) ** 2, 0.0, 0, "cot")
    # ell is an integer, so pi * (ell - lam) reduces to -pi * frac exactly; forming
    # ell - frac in floating point would cost a few bits that 1/wbar^2 amplifies
    val = math.pi / (ell * wb * wb) * (1.0 / math.tan(-math.pi * frac) + 1.0 / math.tan(math.pi * frac))
    return PlaneSum(val, 0.0, 0, "cot")


def direct_sum_m2(ell: int, pt: PlanePoint, N: int = 10_000) -> float:
    """Symmetric partial sum |k| <= N for m = 2 (secondary check of the cotangent form)."""
    k = np.arange(-N, N + 1, dtype=np.float64)
    wb = pt.wbar
    return math.fsum(1.0 / (((k - 1) * wb + pt.u) * ((k - ell - 1) * wb + pt.u)))


def y_coefficient(m: int, ell: int, pt: PlanePoint, K: int | None = None) -> PlaneSum:
    """c_ell = -xi_ell * sum_k 1/((gamma_k.x)(gamma_{k-ell}.x)), ell >= 1."""
    if ell < 1:
        raise ValueError("ell must be positive")
    s = plane_k_sum(m, ell, pt, K)
    xi_l = xi_sequence(m, ell + 1)[ell]
    return PlaneSum(-xi_l * s.value, abs(xi_l) * s.tail_bound, s.K, s.method)


def trace_coefficient(m: int, ell: int, pt: PlanePoint, K: int | None = None) -> PlaneSum:
    """sum_k (gamma_k.gamma_{k-ell}) / ((gamma_k.x)(gamma_{k-ell}.x)); the pairing is k-independent."""
    s = plane_k_sum(m, ell, pt, K)
    pc = xi_sequence(m, ell + 2)
    g = gram_pairing(pc, ell, 0)
    return PlaneSum(g * s.value, abs(g) * s.tail_bound, s.K, s.method)


def a2_cyclic_sum(pt: PlanePoint) -> float:
    """1/(a.x b.x) + 1/(b.x g.x) + 1/(g.x a.x) with g = -(a + b); vanishes identically."""
    a, b = pt.u, pt.v
    g = -(a + b)
    if min(abs(a), abs(b), abs(g)) < DENOM_EPS * pt.scale:
        raise PoleProximity(f"{pt} lies on an A2 mirror")
    return math.fsum([1.0 / (a * b), 1.0 / (b * g), 1.0 / (g * a)])
