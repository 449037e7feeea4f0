import math
from fractions import Fraction
from math import gcd

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from kmcalogero import arith
from kmcalogero.errors import CacheFileError, MemoryBudgetExceeded, PoleProximity


def brute_roots(r):
    return [p for p in range(r) if (p * p - 1) % r == 0]


def lattice_sum(x, t, N=10**6):
    n = np.arange(-N, N + 1, dtype=np.float64)
    # the analytic tail beyond |n| = N is ~ 2/(3 N^3), below double resolution here
    return float(np.sum(1.0 / ((x - n) ** 2 + t) ** 2)) + 2.0 / (3.0 * N**3)


def test_small_roots(small_table):
    assert small_table.roots(1).tolist() == [0]
    assert small_table.roots(8).tolist() == [1, 3, 5, 7]
    assert small_table.roots(12).tolist() == [1, 5, 7, 11]
    assert small_table.count(2) == 1 and small_table.count(4) == 2


def test_sieve_matches_brute_force_to_1e4(small_table):
    for r in range(1, 10_001):
        assert small_table.roots(r).tolist() == brute_roots(r), r


def test_pairing_symmetry(small_table):
    for r in range(3, 2000):
        roots = set(small_table.roots(r).tolist())
        assert roots == {r - p for p in roots}


def test_multiplicativity(small_table):
    N = small_table.counts
    for a in range(1, 1001, 7):
        for b in range(1, 1001, 11):
            if gcd(a, b) == 1 and a * b <= small_table.R_max:
                assert N[a * b] == N[a] * N[b]


def test_count_formula(small_table):
    assert all(small_table.count(r) == arith.sqrt_one_count(r) for r in range(1, small_table.R_max + 1, 13))


def test_memory_cap():
    with pytest.raises(MemoryBudgetExceeded):
        arith.SqrtOneTable.build(10_000, max_residues=100)


def test_cache_round_trip(tmp_path):
    t = arith.SqrtOneTable.build(5000)
    path = tmp_path / "t.bin"
    t.save(path)
    raw = path.read_bytes()
    assert raw[:4] == b"SQ1T"
    # first record is r = 1: count 1 then residue 0
    assert raw[14:22] == (1).to_bytes(4, "little") + (0).to_bytes(4, "little")
    u = arith.SqrtOneTable.load(path)
    assert u.R_max == 5000
    assert np.array_equal(u.residues, t.residues) and np.array_equal(u.offsets, t.offsets)
    assert arith.verify_sieve_file(path) == 5000


def test_cache_corruption_detected(tmp_path):
    path = tmp_path / "t.bin"
    arith.SqrtOneTable.build(300).save(path)
    data = bytearray(path.read_bytes())
    data[40] ^= 1
    path.write_bytes(bytes(data))
    with pytest.raises(CacheFileError):
        arith.SqrtOneTable.load(path)
    (tmp_path / "junk").write_bytes(b"nope")
    with pytest.raises(CacheFileError):
        arith.SqrtOneTable.load(tmp_path / "junk")


def test_growth_sanity():
    R = 10**6
    t = arith.SqrtOneTable.build(R)
    c, c1 = arith.correction_constants()
    assert abs(t.total - (c * R * (math.log(R) - 1) + c1 * R)) < 0.05 * R


def test_dirichlet_series_at_two():
    R = 10**6
    t = arith.SqrtOneTable.build(R)
    r = np.arange(1, R + 1, dtype=np.float64)
    partial = math.fsum(t.counts[1:] / r**2)
    c, c1 = arith.correction_constants()
    tail = (c * math.log(R) + c + c1) / R
    target = (1 - 2**-2 + 2**-3) * (math.pi**2 / 6) ** 2 / (math.pi**4 / 90)
    assert abs(partial + tail - target) < 1e-5


@pytest.mark.parametrize("x,t", [(0.3, 0.81), (0.0, 0.5), (0.45, -0.2), (0.1, -0.51), (0.2, 0.01), (0.37, -0.03)])
def test_S_against_lattice_sum(x, t):
    v = arith.eval_S(x, t)
    assert v == pytest.approx(lattice_sum(x, t), rel=1e-12)


def test_S_fourier_identity():
    rng = np.random.default_rng(3)
    for x, a in zip(rng.uniform(0, 1, 20), rng.uniform(0.3, 2.0, 20)):
        assert arith.eval_S(x, a * a) == pytest.approx(arith.S_fourier(x, a), rel=1e-12)


def test_S_mean():
    y = 0.8
    val, _ = quad(lambda x: arith.eval_S(x, y * y), 0, 1, epsabs=1e-12, limit=200)
    assert abs(val - math.pi / (2 * y**3)) < 1e-8
    mean_star, _ = quad(lambda x: arith.eval_S_star(x, y), 0, 1, epsabs=1e-12, limit=200)
    assert abs(mean_star) < 1e-8


def test_S_star_decays():
    assert abs(arith.eval_S_star(0.25, 1.0)) == pytest.approx(abs(lattice_sum(0.25, 1.0) - math.pi / 2), rel=1e-10)
    vals = [abs(arith.eval_S_star(0.3, y)) for y in (1.0, 2.0, 3.0, 4.0)]
    assert all(b < 1e-2 * a for a, b in zip(vals, vals[1:]))


def test_S_branches_continuous():
    # closed form and series meet at the branch switch
    for t in (0.05, -0.05):
        for x in (0.13, 0.31, 0.49):
            lo = arith._S_series(x, t)
            hi = arith.eval_S(x, t * (1 + 1e-12))
            assert lo == pytest.approx(hi, rel=1e-11)


def test_S_pole():
    with pytest.raises(PoleProximity):
        arith.eval_S(0.5, -0.25)
    with pytest.raises(PoleProximity):
        arith.eval_S(0.0, 0.0)
    with pytest.raises(PoleProximity):
        arith.eval_S(0.3, -0.09)


@given(st.floats(0, 1), st.floats(-2, 2))
@settings(max_examples=60, deadline=None)
def test_S_property_against_short_lattice(x, t):
    nearest = min(abs((x - n) ** 2 + t) for n in range(-3, 4))
    if nearest < 0.05:
        return
    assert arith.eval_S(x, t) == pytest.approx(lattice_sum(x, t, N=20_000), rel=1e-10, abs=1e-12)


def test_C_two_forms_agree():
    rng = np.random.default_rng(11)
    for x, y in zip(rng.uniform(-0.5, 0.5, 50), rng.uniform(0.3, 3.0, 50)):
        assert abs(arith.eval_C(complex(x, y)) - arith.eval_C_sigma(complex(x, y))) < 1e-13
    assert abs(arith.eval_C(0.1 + 0.7j) - arith.eval_C_sigma(0.1 + 0.7j)) < 1e-13


def test_C_decays():
    assert abs(arith.eval_C(0.1 + 1.4j)) < abs(arith.eval_C(0.1 + 0.7j))
    assert abs(arith.eval_C(0.1 + 5j)) < 1e-10


def test_eta_and_e2_modular():
    z = complex(0.13, 0.9)
    # log|eta(-1/z)| = log|eta(z)| + log|z|/2 ; E2(-1/z) = z^2 E2(z) + 6z/(pi i)
    assert arith.log_abs_eta(-1 / z) == pytest.approx(arith.log_abs_eta(z) + 0.5 * math.log(abs(z)), rel=1e-13)
    assert arith.eisenstein_e2(-1 / z) == pytest.approx(z * z * arith.eisenstein_e2(z) + 6 * z / (math.pi * 1j), rel=1e-12)


def test_constants():
    c, c1 = arith.correction_constants()
    assert abs(c - 0.6079271) < 5e-7
    assert abs(c1 - 1.184108) < 5e-7


def test_zeta_prime_two():
    import mpmath

    assert arith.zeta_prime_at_2() == pytest.approx(float(mpmath.zeta(2, derivative=1)), abs=1e-14)
    assert arith.ZETA_PRIME_2 == pytest.approx(arith.zeta_prime_at_2(), abs=1e-14)


def test_divisor_sigma():
    assert arith.divisor_sigma(12, 1) == 28
    assert arith.divisor_sigma(12, 0) == 6
    assert arith.divisor_sigma(2, -1) == Fraction(3, 2)


def test_ramanujan_epsilon():
    assert arith.ramanujan_epsilon(1) == pytest.approx(6 / math.pi**2)
    assert arith.ramanujan_epsilon(2) == pytest.approx(6 / math.pi**2 * 1.5)


def test_ramanujan_partial_sum():
    n, Dmax = 6, 10_000
    total = 0.0
    for D in range(1, Dmax + 1):
        # Ramanujan sum c_D(n) = sum over d | gcd(n, D) of mu(D/d) d
        g = gcd(n, D)
        c = sum(_mobius(D // d) * d for d in range(1, g + 1) if g % d == 0)
        total += c / D**2
    assert abs(total - arith.ramanujan_epsilon(n)) < 1e-4


def _mobius(n):
    out, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            out = -out
        p += 1
    return -out if n > 1 else out
