"""Number-theoretic tables and special-function kernels for the half-plane potential.

* ``SqrtOneTable``: for every r <= R_max the sorted residues p (mod r) with p^2 = 1.
* ``eval_S``: closed form of sum_n [(x - n)^2 + t]^-2 for either sign of t.
* ``eval_C``: the 1/R tail constant built from log|eta| and Re E2.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from . import _kernels
from .errors import CacheFileError, MemoryBudgetExceeded, PoleProximity

EULER_GAMMA = 0.57721566490153286061

# zeta'(2) = -sum log(n)/n^2.  Value from zeta_prime_at_2() below (Euler-Maclaurin,
# N = 64, six Bernoulli corrections); agrees with mpmath.zeta(2, derivative=1) to 1e-17.
ZETA_PRIME_2 = -0.93754825431584375370

DEFAULT_MAX_RESIDUES = 400_000_000
SIEVE_MAGIC = b"SQ1T"
SIEVE_VERSION = 1


# ---- square roots of 1 ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SqrtOneTable:
    R_max: int
    offsets: np.ndarray  # int64, length R_max + 2; roots of r are residues[offsets[r]:offsets[r+1]]
    residues: np.ndarray  # uint32

    @classmethod
    def build(cls, R_max: int, max_residues: int = DEFAULT_MAX_RESIDUES) -> SqrtOneTable:
        if R_max < 1:
            raise ValueError("R_max must be >= 1")
        if R_max >= 2**31:
            raise ValueError("R_max must stay below 2^31 for 32-bit residues")
        counts, spf = _kernels.sqrt_one_counts(R_max)
        total = int(counts.sum())
        if total > max_residues:
            raise MemoryBudgetExceeded(f"table to {R_max} needs {total} residues, cap is {max_residues}")
        offsets = np.zeros(R_max + 2, dtype=np.int64)
        np.cumsum(counts[1:], out=offsets[2:])
        residues = _kernels.sqrt_one_fill(R_max, counts, spf, offsets)
        return cls(R_max, offsets, residues)

    def roots(self, r: int) -> np.ndarray:
        if not 1 <= r <= self.R_max:
            raise IndexError(f"r={r} outside 1..{self.R_max}")
        return self.residues[self.offsets[r]:self.offsets[r + 1]]

    def count(self, r: int) -> int:
        return int(self.offsets[r + 1] - self.offsets[r])

    @property
    def counts(self) -> np.ndarray:
        """N(r) for r = 0..R_max (index 0 is 0)."""
        return np.diff(self.offsets)

    @property
    def total(self) -> int:
        return int(self.offsets[-1])

    # -- cache file: "SQ1T" | u16 version | u64 R_max | per r: u32 count, count x u32 | u64 FNV-1a(payload)

    def _payload(self) -> np.ndarray:
        R = self.R_max
        counts = self.counts[1:]
        out = np.empty(R + self.total, dtype="<u4")
        count_pos = self.offsets[1:R + 1] + np.arange(R)
        mask = np.ones(out.size, dtype=bool)
        mask[count_pos] = False
        out[count_pos] = counts
        out[mask] = self.residues
        return out

    def save(self, path) -> None:
        payload = self._payload()
        checksum = _kernels.fnv1a64(payload.view(np.uint8))
        with open(path, "wb") as fh:
            fh.write(SIEVE_MAGIC)
            fh.write(struct.pack("<HQ", SIEVE_VERSION, self.R_max))
            fh.write(payload.tobytes())
            fh.write(struct.pack("<Q", int(checksum)))

    @classmethod
    def load(cls, path) -> SqrtOneTable:
        raw = Path(path).read_bytes()
        head = len(SIEVE_MAGIC) + 10
        if len(raw) < head + 8 or raw[:4] != SIEVE_MAGIC:
            raise CacheFileError(f"{path}: not a sieve cache file")
        version, R = struct.unpack_from("<HQ", raw, 4)
        if version != SIEVE_VERSION:
            raise CacheFileError(f"{path}: unsupported version {version}")
        body = raw[head:-8]
        (stored,) = struct.unpack("<Q", raw[-8:])
        if int(_kernels.fnv1a64(np.frombuffer(body, dtype=np.uint8))) != stored:
            raise CacheFileError(f"{path}: checksum mismatch")
        payload = np.frombuffer(body, dtype="<u4")
        counts = np.zeros(R + 1, dtype=np.int64)
        # walk the records once; counts are tiny so a python loop over r is the bottleneck
        pos = np.empty(R, dtype=np.int64)
        i = 0
        for r in range(1, R + 1):
            pos[r - 1] = i
            c = int(payload[i])
            counts[r] = c
            i += c + 1
        if i != payload.size:
            raise CacheFileError(f"{path}: truncated or oversized payload")
        offsets = np.zeros(R + 2, dtype=np.int64)
        np.cumsum(counts[1:], out=offsets[2:])
        mask = np.ones(payload.size, dtype=bool)
        mask[pos] = False
        return cls(R, offsets, payload[mask].astype(np.uint32))


def verify_sieve_file(path) -> int:
    """Check magic, version and checksum; return R_max."""
    return SqrtOneTable.load(path).R_max


def sqrt_one_count(r: int) -> int:
    """N(r) from the factorisation of r (independent of the sieve)."""
    if r < 1:
        raise ValueError("r must be positive")
    n, count = r, 1
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    count *= (1, 1, 2)[v] if v < 3 else 4
    f = 3
    while f * f <= n:
        if n % f == 0:
            while n % f == 0:
                n //= f
            count *= 2
        f += 2
    if n > 1:
        count *= 2
    return count


# ---- lattice kernel -------------------------------------------------------------


def _S_series(x: float, t: float) -> float:
    # nearest lattice term exactly, the rest as a power series in t
    # (Hurwitz zeta moments; radius of convergence >= 1/4)
    d0 = abs(x - round(x))
    near = d0 * d0 + t
    if abs(near) < _kernels.POLE_EPS:
        raise PoleProximity(f"S({x}, {t}) sits on a pole", mirror=(x, t))
    k = np.arange(40)
    s = 2 * k + 4.0
    moments = hurwitz_zeta(s, 1.0 + d0) + hurwitz_zeta(s, 1.0 - d0)
    terms = (-1.0) ** k * (k + 1) * t**k * moments
    return 1.0 / (near * near) + math.fsum(terms)


def eval_S(x: float, t: float) -> float:
    """sum over n of [(x - n)^2 + t]^-2, analytically continued to t < 0."""
    if abs(t) < _kernels.SMALL_T:
        return _S_series(x, t)
    val = _kernels.kernel_S(x, t)
    if math.isnan(val):
        raise PoleProximity(f"S({x}, {t}) sits on a pole", mirror=(x, t))
    return val


def eval_S_star(x: float, y: float) -> float:
    if not y > 0:
        raise ValueError("y must be positive")
    return eval_S(x, y * y) - math.pi / (2.0 * y**3)


def S_fourier(x: float, a: float, n_terms: int = 200) -> float:
    """Fourier-series form of S(x, a) for a > 0."""
    n = np.arange(1, n_terms + 1)
    tail = (1.0 + 2.0 * math.pi * n * a) * np.exp(-2.0 * math.pi * n * a) * np.cos(2.0 * math.pi * n * x)
    return math.pi / a**3 * (0.5 + math.fsum(tail))


# ---- divisor sums, eta, E2 -------------------------------------------------------


def divisor_sigma(n: int, k: int) -> Fraction | int:
    """sigma_k(n) = sum_{d | n} d^k, exact (a Fraction for negative k)."""
    if n < 1:
        raise ValueError("n must be positive")
    total = Fraction(0)
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += Fraction(d) ** k
            if d * d != n:
                total += Fraction(n // d) ** k
        d += 1
    return int(total) if total.denominator == 1 else total


def _q_terms(y: float) -> int:
    # |q|^n < 1e-18
    return max(1, math.ceil(18.0 * math.log(10.0) / (2.0 * math.pi * y)) + 1)


def log_abs_eta(z) -> float:
    x, y = _xy(z)
    q = complex(math.cos(2 * math.pi * x), math.sin(2 * math.pi * x)) * math.exp(-2 * math.pi * y)
    total = -math.pi * y / 12.0
    qn = 1.0 + 0j
    acc = []
    for _ in range(_q_terms(y)):
        qn *= q
        acc.append(math.log(abs(1.0 - qn)))
    return total + math.fsum(acc)


def eisenstein_e2(z) -> complex:
    x, y = _xy(z)
    q = complex(math.cos(2 * math.pi * x), math.sin(2 * math.pi * x)) * math.exp(-2 * math.pi * y)
    re, im = [], []
    qn = 1.0 + 0j
    for n in range(1, _q_terms(y) + 1):
        qn *= q
        s1 = divisor_sigma(n, 1)
        re.append(s1 * qn.real)
        im.append(s1 * qn.imag)
    return complex(1.0 - 24.0 * math.fsum(re), -24.0 * math.fsum(im))


def eval_C(z) -> float:
    """-(12/(pi y)) log|eta(z)| - Re E2(z); decays like exp(-2 pi y)."""
    x, y = _xy(z)
    return -12.0 / (math.pi * y) * log_abs_eta(z) - eisenstein_e2(z).real


def eval_C_sigma(z) -> float:
    """Same quantity from the divisor-sum series."""
    x, y = _xy(z)
    terms = []
    for n in range(1, _q_terms(y) + 1):
        weight = float(divisor_sigma(n, -1)) + 2.0 * math.pi * divisor_sigma(n, 1) * y
        terms.append(weight * math.exp(-2 * math.pi * n * y) * math.cos(2 * math.pi * n * x))
    return 12.0 / (math.pi * y) * math.fsum(terms)


def _xy(z) -> tuple[float, float]:
    if hasattr(z, "x") and hasattr(z, "y"):
        x, y = float(z.x), float(z.y)
    elif isinstance(z, (tuple, list)):
        x, y = float(z[0]), float(z[1])
    else:
        zc = complex(z)
        x, y = zc.real, zc.imag
    if not y > 0:
        raise ValueError("Im z must be positive")
    return x, y


# ---- constants ----------------------------------------------------------------


def zeta_prime_at_2(N: int = 64, corrections: int = 6) -> float:
    """-sum_{n>=1} log(n)/n^2 by direct summation to N-1 plus an Euler-Maclaurin tail."""
    # B_2k / (2k)!
    bern = [Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30), Fraction(5, 66), Fraction(-691, 2730)]
    fact = math.factorial
    head = math.fsum(math.log(n) / n**2 for n in range(2, N))
    L = math.log(N)
    # integral_N^inf log(x)/x^2 dx + f(N)/2
    tail = [(L + 1.0) / N, 0.5 * L / N**2]
    # derivatives of x^-k (a log x + b) stay in that family: track (k, a, b)
    k, a, b = 2, 1.0, 0.0
    deriv = []
    for _ in range(2 * corrections):
        k, a, b = k + 1, -k * a, a - k * b
        deriv.append((k, a, b))
    for j in range(corrections):
        kk, aa, bb = deriv[2 * j]  # (2j+1)-th derivative
        f_odd = (aa * L + bb) / N**kk
        tail.append(-float(bern[j]) / fact(2 * j + 2) * f_odd)
    return -(head + math.fsum(tail))


def correction_constants() -> tuple[float, float]:
    """(c, c1) = (6/pi^2, c (2 gamma - log(2)/2 - 2 zeta'(2)/zeta(2)))."""
    zeta2 = math.pi**2 / 6.0
    c = 1.0 / zeta2
    c1 = c * (2.0 * EULER_GAMMA - 0.5 * math.log(2.0) - 2.0 * ZETA_PRIME_2 / zeta2)
    return c, c1


def ramanujan_epsilon(n: int) -> float:
    """(6/pi^2) sigma_{-1}(n): the density-weighted Ramanujan-sum series at n."""
    if n < 1:
        raise ValueError("n must be positive")
    return 6.0 / math.pi**2 * float(divisor_sigma(n, -1))
