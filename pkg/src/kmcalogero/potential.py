"""The automorphic Calogero potential U(z) on the upper half-plane.

U(z) = U0(z) + 2 sum_{r >= 1} U_r(z), where U0 collects the vertical mirrors and
U_r the mirrors r|z|^2 - 2px - q = 0 of fixed r.  Truncating at r <= R leaves a
tail of order log(R)/R; the correction ladder below removes it term by term.
"""

from __future__ import annotations

import enum
import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .arith import SqrtOneTable, correction_constants, eval_C, eval_S, eval_S_star
from .errors import CacheFileError, PoleProximity, TableTooSmall
from .geometry import GL2ZElement, HalfPlanePoint, MinkowskiPoint, apply_gl2z, as_halfplane
from .roots import (
    A2_ROOTS,
    NULL_VECTORS,
    SIMPLE_ROOTS,
    ReflectionTriple,
    _level_pairs,
    enumerate_level,
    first_family_root,
    minkowski_vector,
)

MIRROR_EPS = 1e-9
MASK_R_MAX = 100
CHUNK = 1 << 14  # r-values per work unit; fixed so results never depend on thread count
CHECKPOINT_TERMS = 1_000_000
CHECKPOINT_MAGIC = b"UCKP"
CHECKPOINT_VERSION = 1


class Level(enum.Enum):
    RAW = "raw"
    C0 = "c0"
    C1 = "c1"
    C2 = "c2"
    CINF = "cinf"
    AVG = "avg"


@dataclass(frozen=True)
class TruncationScheme:
    R: int
    level: Level = Level.CINF
    avg_window: float = 1.0 / 3.0

    def __post_init__(self):
        if self.R < 1:
            raise ValueError("R must be >= 1")
        if not 0.0 < self.avg_window < 1.0:
            raise ValueError("avg_window must lie in (0, 1)")
        if not isinstance(self.level, Level):
            object.__setattr__(self, "level", Level(self.level))

    @property
    def window_start(self) -> int:
        return max(1, math.ceil((1.0 - self.avg_window) * self.R - 1e-9))


@dataclass
class PotentialEstimate:
    value: float
    scheme: TruncationScheme
    z: HalfPlanePoint
    partials: list[tuple[int, float]] | None = None

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite potential value {self.value}")


# ---- single pieces -------------------------------------------------------------


def u0_exact(z) -> float:
    """Vertical mirrors: 2 sum_q y^2/(2x + q)^2 = 2 pi^2 y^2 / sin^2(2 pi x)."""
    h = as_halfplane(z)
    frac = 2.0 * h.x - round(2.0 * h.x)
    if abs(frac) < MIRROR_EPS:
        raise PoleProximity(f"x = {h.x} lies on a vertical mirror", mirror=(1, -round(2 * h.x), 0))
    s = math.sin(2.0 * math.pi * h.x)
    return 2.0 * math.pi**2 * h.y**2 / (s * s)


def _triple_for(p: int, r: int) -> ReflectionTriple:
    return ReflectionTriple(p, (1 - p * p) // r, r)


def u_r_term(r: int, z, table: SqrtOneTable) -> float:
    """(y^2/r^2) sum_{p^2 = 1 mod r} S(x - p/r, y^2 - 1/r^2)."""
    if r > table.R_max:
        raise TableTooSmall(f"r = {r} exceeds table size {table.R_max}")
    h = as_halfplane(z)
    t = h.y**2 - 1.0 / r**2
    vals = []
    for p in table.roots(r):
        p = int(p)
        try:
            vals.append(eval_S(h.x - p / r, t))
        except PoleProximity as exc:
            k = round(h.x - p / r)
            raise PoleProximity(str(exc), mirror=_triple_for(p + k * r, r)) from None
    return h.y**2 / r**2 * math.fsum(vals)


def check_mirrors(z, r_max: int = MASK_R_MAX, eps: float = MIRROR_EPS) -> None:
    """Raise PoleProximity if z lies on a vertical mirror or on a mirror with r <= r_max."""
    h = as_halfplane(z)
    u0_exact(h)
    rho2 = h.x * h.x + h.y * h.y
    for r in range(1, r_max + 1):
        # mirror value with p = r x + d is (d^2 + r^2 y^2 - 1) / r; only p near r x can vanish
        if r * h.y > 1.0 + eps:
            break
        for p in range(math.floor(r * h.x) - 1, math.ceil(r * h.x) + 2):
            if (p * p - 1) % r:
                continue
            t = _triple_for(p, r)
            if abs(r * rho2 - 2 * p * h.x - t.q) < eps:
                raise PoleProximity(f"z = {h.z} lies on the mirror {t}", mirror=t)


# ---- the truncated sum ----------------------------------------------------------


def _write_checkpoint(path, z: HalfPlanePoint, R_done: int, s: float, comp: float) -> None:
    body = CHECKPOINT_MAGIC + struct.pack("<HddQdd", CHECKPOINT_VERSION, z.x, z.y, R_done, s, comp)
    check = _kernels.fnv1a64(np.frombuffer(body, dtype=np.uint8))
    tmp = Path(str(path) + ".tmp")
    tmp.write_bytes(body + struct.pack("<Q", int(check)))
    os.replace(tmp, path)


def read_checkpoint(path) -> tuple[HalfPlanePoint, int, float, float]:
    raw = Path(path).read_bytes()
    if len(raw) != 54 or raw[:4] != CHECKPOINT_MAGIC:
        raise CacheFileError(f"{path}: not a potential checkpoint")
    body, (check,) = raw[:-8], struct.unpack("<Q", raw[-8:])
    if int(_kernels.fnv1a64(np.frombuffer(body, dtype=np.uint8))) != check:
        raise CacheFileError(f"{path}: checksum mismatch")
    version, x, y, R_done, s, comp = struct.unpack("<HddQdd", body[4:])
    if version != CHECKPOINT_VERSION:
        raise CacheFileError(f"{path}: unsupported version {version}")
    return HalfPlanePoint(x, y), R_done, s, comp


def u_r_values(z, R: int, table: SqrtOneTable, threads: int = 1, r_start: int = 1) -> np.ndarray:
    """U_r(z) for r = r_start..R as an array (index 0 is r_start)."""
    if R > table.R_max:
        raise TableTooSmall(f"R = {R} exceeds table size {table.R_max}")
    h = as_halfplane(z)
    out = np.empty(max(0, R - r_start + 1), dtype=np.float64)
    bounds = [(lo, min(lo + CHUNK, R + 1)) for lo in range(r_start, R + 1, CHUNK)]

    def work(b):
        lo, hi = b
        return lo, _kernels.u_r_block(h.x, h.y, lo, hi, table.offsets, table.residues, out[lo - r_start:hi - r_start])

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, bounds))
    else:
        results = [work(b) for b in bounds]
    for _, (pole_r, residue) in results:
        if pole_r >= 0:
            k = round(h.x - residue / pole_r)
            t = _triple_for(int(residue) + k * int(pole_r), int(pole_r))
            raise PoleProximity(f"z = {h.z} lies on the mirror {t}", mirror=t)
    # the few r with y^2 ~ 1/r^2 need the series branch of S
    for i in np.flatnonzero(np.isnan(out)):
        out[i] = u_r_term(int(i) + r_start, h, table)
    return out


@dataclass
class PotentialSeries:
    """Running partial sums of the truncated potential at one point.

    prefix[R] = sum_{r <= R} U_r(z) (compensated, increasing r); entries below a
    resumed checkpoint are nan.
    """

    z: HalfPlanePoint
    U0: float
    prefix: np.ndarray
    _C: float | None = field(default=None, repr=False)

    @classmethod
    def compute(
        cls,
        z,
        R: int,
        table: SqrtOneTable,
        threads: int = 1,
        accumulator: str = "kahan",
        checkpoint=None,
        resume_limit: int | None = None,
    ) -> PotentialSeries:
        """Sum U_r for r <= R.

        With ``checkpoint`` the compensated state is written every ~1e6 kernel terms
        and a matching file is resumed from, as long as its R_done <= resume_limit
        (callers that need early partial sums pass their smallest R).
        """
        h = as_halfplane(z)
        if R > table.R_max:
            raise TableTooSmall(f"R = {R} exceeds table size {table.R_max}")
        if accumulator not in ("kahan", "dd"):
            raise ValueError("accumulator must be 'kahan' or 'dd'")
        if checkpoint is not None and accumulator != "kahan":
            raise ValueError("checkpointing stores the Kahan state only")
        check_mirrors(h, min(R, MASK_R_MAX))
        U0 = u0_exact(h)
        prefix = np.full(R + 1, np.nan)
        prefix[0] = 0.0
        s, comp, r0 = 0.0, 0.0, 1
        if checkpoint is not None and Path(checkpoint).exists():
            cz, R_done, cs, cc = read_checkpoint(checkpoint)
            limit = R if resume_limit is None else resume_limit
            if cz == h and 0 < R_done <= min(R, limit):
                s, comp, r0 = cs, cc, R_done + 1
                prefix[R_done] = s + comp
        step = _kernels.kahan_prefix if accumulator == "kahan" else _kernels.dd_prefix
        since = 0
        # evaluate in super-blocks so memory stays bounded and checkpoints land between them
        block = CHUNK * max(1, threads) * 8
        for lo in range(r0, R + 1, block):
            hi = min(lo + block - 1, R)
            vals = u_r_values(h, hi, table, threads=threads, r_start=lo)
            # per chunk so the checkpoint state is a function of R_done alone
            for c_lo in range(0, vals.size, CHUNK):
                part, s, comp = step(vals[c_lo:c_lo + CHUNK], s, comp)
                r_end = lo + c_lo + part.size - 1
                prefix[lo + c_lo:r_end + 1] = part
                since += int(table.offsets[r_end + 1] - table.offsets[lo + c_lo])
                if checkpoint is not None and since >= CHECKPOINT_TERMS:
                    _write_checkpoint(checkpoint, h, r_end, s, comp)
                    since = 0
        if checkpoint is not None and R >= r0:
            _write_checkpoint(checkpoint, h, R, s, comp)
        return cls(h, U0, prefix)

    @property
    def R_max(self) -> int:
        return self.prefix.size - 1

    @property
    def C(self) -> float:
        if self._C is None:
            self._C = eval_C(self.z)
        return self._C

    def _partial(self, R) -> np.ndarray:
        R = np.atleast_1d(np.asarray(R, dtype=np.int64))
        if R.min() < 1 or R.max() > self.R_max:
            raise TableTooSmall(f"R outside 1..{self.R_max}")
        vals = self.prefix[R]
        if np.isnan(vals).any():
            raise ValueError("partial sums below the resumed checkpoint are not available")
        return self.U0 + 2.0 * vals

    def values(self, level: Level, R) -> np.ndarray:
        """Corrected truncations U^(level)(z, R) for an array of R (not for AVG)."""
        level = Level(level)
        R = np.atleast_1d(np.asarray(R, dtype=np.int64))
        y = self.z.y
        Rf = R.astype(np.float64)
        out = self._partial(R)
        if level is Level.RAW:
            return out
        if level is Level.AVG:
            raise ValueError("use value() for the averaged level")
        c, c1 = correction_constants()
        out = out + 6.0 / (math.pi * y) * np.log(Rf) / Rf
        if level is Level.C0:
            return out
        out = out + math.pi / y * (c + c1) / Rf
        if level is Level.C1:
            return out
        if level is Level.C2:
            return out + 4.0 * y * y * eval_S_star(self.z.x, y) / Rf
        return out + 2.0 * self.C / Rf

    def value(self, scheme: TruncationScheme) -> float:
        if scheme.level is Level.AVG:
            Rs = np.arange(scheme.window_start, scheme.R + 1)
            return math.fsum(self.values(Level.CINF, Rs)) / Rs.size
        return float(self.values(scheme.level, scheme.R)[0])


def u_truncated(
    z,
    scheme: TruncationScheme,
    table: SqrtOneTable,
    threads: int = 1,
    accumulator: str = "kahan",
    checkpoint=None,
    partials_every: int | None = None,
) -> PotentialEstimate:
    """U(z) truncated at r <= scheme.R with the requested tail correction."""
    h = as_halfplane(z)
    need = scheme.window_start if scheme.level is Level.AVG else scheme.R
    series = PotentialSeries.compute(
        h, scheme.R, table, threads=threads, accumulator=accumulator, checkpoint=checkpoint, resume_limit=need
    )
    partials = None
    if partials_every:
        level = Level.CINF if scheme.level is Level.AVG else scheme.level
        Rs = np.arange(partials_every, scheme.R + 1, partials_every)
        Rs = Rs[~np.isnan(series.prefix[Rs])]
        partials = list(zip(Rs.tolist(), series.values(level, Rs).tolist()))
    return PotentialEstimate(series.value(scheme), scheme, h, partials)


def modularity_residual(z, g: GL2ZElement, scheme: TruncationScheme, table: SqrtOneTable, threads: int = 1) -> float:
    h = as_halfplane(z)
    gz = apply_gl2z(g, h)
    if gz == h:
        return 0.0
    a = u_truncated(h, scheme, table, threads=threads).value
    b = u_truncated(gz, scheme, table, threads=threads).value
    return abs(a - b)


# ---- level slicing and the Minkowski picture ---------------------------------------


def u_by_level_slicing(z, ell_max: int) -> float:
    """U0 + 2 sum over levels 0..ell_max of the r >= 1 mirrors, each y^2 / (mirror value)^2."""
    if ell_max < 0:
        raise ValueError("ell_max must be non-negative")
    h = as_halfplane(z)
    rho2 = h.x * h.x + h.y * h.y
    terms = []
    for ell in range(ell_max + 1):
        for m, n in _level_pairs(ell):
            r, p = 2 * ell - m, ell - n
            if r < 1:
                continue
            q = r - p - ell
            den = r * rho2 - 2 * p * h.x - q
            if abs(den) < MIRROR_EPS:
                raise PoleProximity(f"z = {h.z} lies on the mirror ({p}, {q}, {r})", mirror=ReflectionTriple(p, q, r))
            terms.append(h.y * h.y / (den * den))
    return u0_exact(h) + 2.0 * math.fsum(terms)


def _inv_square(alpha: np.ndarray, point: MinkowskiPoint, root=None) -> float:
    d = point.dot(alpha)
    if abs(d) < MIRROR_EPS * max(1.0, abs(point.x0)):
        raise PoleProximity(f"{point} lies on the mirror of {root}", mirror=root)
    return 1.0 / (d * d)


def v_level_minkowski(ell: int, point: MinkowskiPoint) -> float:
    """V_ell(x) = 1/2 sum over level-ell real roots of (alpha . x)^-2; V_-ell = V_ell."""
    if -point.norm2 <= 0 or point.x0 <= 0:
        raise ValueError(f"{point} is not inside the future lightcone")
    roots = enumerate_level(abs(ell))
    return 0.5 * math.fsum(_inv_square(minkowski_vector(a), point, a) for a in roots)


def first_family_direct(point: MinkowskiPoint, L: int) -> float:
    """V restricted to the roots +-(ell n_i +- alpha_i), |ell| <= L, each distinct root weighted 1/2."""
    roots = set()
    for ell in range(L + 1):
        for i in (1, 2, 3):
            for sign in (1, -1):
                a = first_family_root(ell, i, sign)
                roots.add(a)
                roots.add(-a)
    return 0.5 * math.fsum(_inv_square(minkowski_vector(a), point, a) for a in sorted(roots))


def first_family_partial(point: MinkowskiPoint, L: int) -> float:
    """The family series summed level by level up to L, before resummation."""
    S = SIMPLE_ROOTS
    v0 = math.fsum(_inv_square(np.array(A2_ROOTS[i], float) @ S, point) for i in (1, 2, 3))
    v1 = math.fsum(_inv_square(minkowski_vector(first_family_root(1, i, 1)), point) for i in (1, 2, 3))
    terms = [-v0, -v1]
    for i in (1, 2, 3):
        nx = point.dot(np.array(NULL_VECTORS[i], float) @ S)
        ax = point.dot(np.array(A2_ROOTS[i], float) @ S)
        lam2 = (ax / nx) ** 2
        for ell in range(L + 1):
            terms.append(2.0 / nx**2 * (ell * ell + lam2) / (ell * ell - lam2) ** 2)
    return math.fsum(terms)


def first_family_closed(point: MinkowskiPoint) -> float:
    """Resummed family potential: sum_i pi^2 / ((n_i.x)^2 sin^2(pi a_i.x / n_i.x)) - 1/((n_i + a_i).x)^2."""
    S = SIMPLE_ROOTS
    terms = []
    for i in (1, 2, 3):
        nx = point.dot(np.array(NULL_VECTORS[i], float) @ S)
        ax = point.dot(np.array(A2_ROOTS[i], float) @ S)
        sn = math.sin(math.pi * ax / nx)
        if abs(sn) < MIRROR_EPS:
            raise PoleProximity(f"{point} lies on a family mirror accumulating at n_{i}")
        terms.append(math.pi**2 / (nx * nx * sn * sn))
        terms.append(-_inv_square(minkowski_vector(first_family_root(1, i, 1)), point))
    return math.fsum(terms)


# ---- discriminant-1 Poincare series and the T2 identity ---------------------------


def f1_truncated(z, R: int, table: SqrtOneTable) -> float:
    """Sum over discriminant-1 forms (mod sign) with 0 <= A <= R of y^2 / (A|z|^2 + Bx + C)^2."""
    if 4 * R > table.R_max:
        raise TableTooSmall(f"the D=1 sum to A <= {R} needs residues modulo {4 * R}")
    h = as_halfplane(z)
    frac = h.x - round(h.x)
    if abs(frac) < MIRROR_EPS:
        raise PoleProximity(f"x = {h.x} lies on an A=0 mirror")
    a0 = (math.pi * h.y / math.sin(math.pi * h.x)) ** 2
    out = np.empty(R, dtype=np.float64)
    pole_a, b = _kernels.f1_block(h.x, h.y, 1, R + 1, table.offsets, table.residues, out)
    if pole_a >= 0:
        raise PoleProximity(f"z = {h.z} lies on the D=1 mirror A={pole_a}, B={b} (mod 2A)")
    for i in np.flatnonzero(np.isnan(out)):
        A = int(i) + 1
        t = h.y**2 - 1.0 / (4.0 * A * A)
        bs = [int(b) for b in table.roots(4 * A) if b < 2 * A]
        out[i] = h.y**2 / A**2 * math.fsum(eval_S(h.x + b / (2.0 * A), t) for b in bs)
    return a0 + _kernels.compensated_sum(out)


def hecke_identity_residual(z, R: int, table: SqrtOneTable, threads: int = 1) -> float:
    """|2 U(z) - [F1(2z) + F1(z/2) + F1((z+1)/2) - F1(z)]| with both sides truncated at R."""
    h = as_halfplane(z)
    u = u_truncated(h, TruncationScheme(R, Level.RAW), table, threads=threads).value
    zc = h.z
    rhs = (
        f1_truncated(2 * zc, R, table)
        + f1_truncated(zc / 2, R, table)
        + f1_truncated((zc + 1) / 2, R, table)
        - f1_truncated(zc, R, table)
    )
    return abs(2.0 * u - rhs)
