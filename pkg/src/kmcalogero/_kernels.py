"""Compiled inner loops (numba).

Everything here works on flat numpy arrays and plain floats; validation and
error reporting live in the calling modules.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi
PI2 = math.pi * math.pi

# |t| below this goes through the series branch in arith.eval_S instead of the
# closed form, which cancels catastrophically as t -> 0.
SMALL_T = 0.05
POLE_EPS = 1e-9


@njit(cache=True)
def smallest_prime_factor(n):
    spf = np.zeros(n + 1, dtype=np.int64)
    for i in range(2, n + 1):
        if spf[i] == 0:
            spf[i] = i
            if i * i <= n:
                for j in range(i * i, n + 1, i):
                    if spf[j] == 0:
                        spf[j] = i
    return spf


@njit(cache=True)
def _modinv(a, m):
    # extended Euclid; caller guarantees gcd(a, m) == 1
    old_r, r = a % m, m
    old_s, s = 1, 0
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
    return old_s % m


@njit(cache=True)
def sqrt_one_counts(R):
    spf = smallest_prime_factor(R)
    counts = np.zeros(R + 1, dtype=np.int64)
    if R >= 1:
        counts[1] = 1
    for r in range(2, R + 1):
        p = spf[r]
        m = r
        v = 0
        while m % p == 0:
            m //= p
            v += 1
        if p != 2:
            npk = 2
        elif v == 1:
            npk = 1
        elif v == 2:
            npk = 2
        else:
            npk = 4
        counts[r] = npk * counts[m]
    return counts, spf


@njit(cache=True)
def sqrt_one_fill(R, counts, spf, offsets):
    """Fill residues r -> sorted {p in [0, r) : p^2 = 1 mod r} via CRT over prime powers."""
    residues = np.empty(offsets[R + 1], dtype=np.uint32)
    if R >= 1:
        residues[0] = 0
    local = np.empty(4, dtype=np.int64)
    for r in range(2, R + 1):
        p = spf[r]
        m = r
        pk = 1
        v = 0
        while m % p == 0:
            m //= p
            pk *= p
            v += 1
        if p != 2:
            nl = 2
            local[0] = 1
            local[1] = pk - 1
        elif v == 1:
            nl = 1
            local[0] = 1
        elif v == 2:
            nl = 2
            local[0] = 1
            local[1] = 3
        else:
            nl = 4
            local[0] = 1
            local[1] = pk // 2 - 1
            local[2] = pk // 2 + 1
            local[3] = pk - 1
        base = offsets[r]
        if m == 1:
            for i in range(nl):
                residues[base + i] = local[i]
            continue
        inv = _modinv(pk % m, m)
        mo = offsets[m]
        mc = counts[m]
        k = 0
        for i in range(nl):
            a = local[i]
            for j in range(mc):
                b = np.int64(residues[mo + j])
                h = ((b - a) % m) * inv % m
                residues[base + k] = a + pk * h
                k += 1
        residues[base:base + k] = np.sort(residues[base:base + k])
    return residues


@njit(cache=True)
def kernel_S(x, t):
    """S(x, t) for |t| >= SMALL_T; returns nan when the denominator is within POLE_EPS of zero."""
    c = math.cos(TWO_PI * x)
    if t > 0.0:
        a = math.sqrt(t)
        A = TWO_PI * a
        E = math.exp(-A)
        den = 1.0 - 2.0 * c * E + E * E
        # den / (2E) == cosh(A) - cos(2 pi x)
        if den < POLE_EPS * 2.0 * E:
            return math.nan
        first = math.pi / (2.0 * a * a * a) * (1.0 - E * E) / den
        second = PI2 / (a * a) * 2.0 * E * (c * (1.0 + E * E) - 2.0 * E) / (den * den)
        return first + second
    b = math.sqrt(-t)
    B = TWO_PI * b
    cb = math.cos(B)
    D = cb - c
    if abs(D) < POLE_EPS:
        return math.nan
    first = -math.pi * math.sin(B) / (2.0 * b * b * b * D)
    second = -PI2 / (b * b) * (cb * c - 1.0) / (D * D)
    return first + second


@njit(cache=True, nogil=True)
def u_r_block(x, y, r_lo, r_hi, offsets, residues, out):
    """out[r - r_lo] = U_r(x + iy) for r in [r_lo, r_hi); entries with |t| < SMALL_T are left nan.

    Returns the first r hitting a pole (or -1) and the offending residue.
    """
    y2 = y * y
    for r in range(r_lo, r_hi):
        rf = float(r)
        t = y2 - 1.0 / (rf * rf)
        if abs(t) < SMALL_T:
            out[r - r_lo] = math.nan
            continue
        s = 0.0
        comp = 0.0
        for k in range(offsets[r], offsets[r + 1]):
            p = float(residues[k])
            val = kernel_S(x - p / rf, t)
            if math.isnan(val):
                return r, np.int64(residues[k])
            # Neumaier step
            tmp = s + val
            if abs(s) >= abs(val):
                comp += (s - tmp) + val
            else:
                comp += (val - tmp) + s
            s = tmp
        out[r - r_lo] = y2 / (rf * rf) * (s + comp)
    return -1, -1


@njit(cache=True)
def f1_block(x, y, a_lo, a_hi, offsets, residues, out):
    """A-strata of the discriminant-1 Poincare series: out[A - a_lo] for A in [a_lo, a_hi).

    Uses the residues of 4A that lie below 2A (odd B with B^2 = 1 mod 4A).
    """
    y2 = y * y
    for A in range(a_lo, a_hi):
        Af = float(A)
        t = y2 - 1.0 / (4.0 * Af * Af)
        if abs(t) < SMALL_T:
            out[A - a_lo] = math.nan
            continue
        m = 4 * A
        s = 0.0
        comp = 0.0
        for k in range(offsets[m], offsets[m + 1]):
            b = np.int64(residues[k])
            if b >= 2 * A:
                break
            val = kernel_S(x + float(b) / (2.0 * Af), t)
            if math.isnan(val):
                return A, b
            tmp = s + val
            if abs(s) >= abs(val):
                comp += (s - tmp) + val
            else:
                comp += (val - tmp) + s
            s = tmp
        out[A - a_lo] = y2 / (Af * Af) * (s + comp)
    return -1, -1


@njit(cache=True)
def kahan_prefix(values, s0, c0):
    """Running compensated sums; prefix[i] = s0 + c0 + sum(values[:i+1]).

    Returns (prefix, final_sum, final_comp) so the state can be checkpointed.
    """
    n = values.shape[0]
    prefix = np.empty(n, dtype=np.float64)
    s = s0
    comp = c0
    for i in range(n):
        v = values[i]
        tmp = s + v
        if abs(s) >= abs(v):
            comp += (s - tmp) + v
        else:
            comp += (v - tmp) + s
        s = tmp
        prefix[i] = s + comp
    return prefix, s, comp


@njit(cache=True)
def dd_prefix(values, hi0, lo0):
    """Double-double running sums (TwoSum + renormalisation); same contract as kahan_prefix."""
    n = values.shape[0]
    prefix = np.empty(n, dtype=np.float64)
    hi = hi0
    lo = lo0
    for i in range(n):
        v = values[i]
        s = hi + v
        bb = s - hi
        err = (hi - (s - bb)) + (v - bb)
        err += lo
        hi = s + err
        lo = err - (hi - s)
        prefix[i] = hi + lo
    return prefix, hi, lo


@njit(cache=True)
def compensated_sum(values):
    s = 0.0
    comp = 0.0
    for i in range(values.shape[0]):
        v = values[i]
        tmp = s + v
        if abs(s) >= abs(v):
            comp += (s - tmp) + v
        else:
            comp += (v - tmp) + s
        s = tmp
    return s + comp


@njit(cache=True)
def fnv1a64(data):
    h = np.uint64(0xCBF29CE484222325)
    prime = np.uint64(0x100000001B3)
    for i in range(data.shape[0]):
        h ^= np.uint64(data[i])
        h *= prime
    return h
