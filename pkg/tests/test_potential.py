import math

import numpy as np
import pytest

from kmcalogero import potential as P
from kmcalogero.errors import CacheFileError, PoleProximity, TableTooSmall
from kmcalogero.geometry import S, S3, T, HalfPlanePoint, MinkowskiPoint, apply_gl2z, disk_to_hyperboloid
from kmcalogero.roots import A2_ROOTS, SIMPLE_ROOTS, enumerate_level, minkowski_vector

Z1 = HalfPlanePoint(0.1, 0.7)
Z2 = HalfPlanePoint(-0.2, 1.4)
U_REF = 52.2450552288


def brute_U(z, r_max, q_box=4000):
    """Direct sum over mirrors r|z|^2 - 2px - q with 1 <= r <= r_max (both p, q explicit)."""
    x, y = z.x, z.y
    rho2 = x * x + y * y
    total = []
    for r in range(1, r_max + 1):
        for p in range(-q_box, q_box + 1):
            if (1 - p * p) % r:
                continue
            q = (1 - p * p) // r
            total.append(y * y / (r * rho2 - 2 * p * x - q) ** 2)
    return math.fsum(total)


def test_u0_examples():
    assert P.u0_exact((0.25, 1.0)) == pytest.approx(2 * math.pi**2)
    x, y = 0.1, 0.7
    q = np.arange(-10**6, 10**6 + 1, dtype=float)
    direct = 2 * np.sum(y * y / (2 * x + q) ** 2)
    assert P.u0_exact(Z1) == pytest.approx(direct, rel=1e-6)
    assert P.u0_exact(Z1) == pytest.approx(2 * math.pi**2 * 0.49 / math.sin(0.2 * math.pi) ** 2)
    with pytest.raises(PoleProximity):
        P.u0_exact((0.0, 1.0))
    with pytest.raises(PoleProximity):
        P.u0_exact((0.5 + 1e-12, 1.0))


@pytest.mark.parametrize("r", [1, 2, 3, 8, 15])
def test_u_r_term_brute_force(small_table, r):
    # U_r is the r-stratum of the mirror sum; compare with an explicit (p, q) loop
    direct = brute_U(Z1, r, q_box=100_000) - brute_U(Z1, r - 1, q_box=100_000) if r > 1 else brute_U(Z1, 1, q_box=100_000)
    assert P.u_r_term(r, Z1, small_table) == pytest.approx(direct, rel=1e-9)


def test_u_r_large_y_heuristic(small_table):
    # for y >> 1 the kernel is flat in x and 2 U_r ~ N(r) pi / (y r^2)
    y = 50.0
    for r in (1, 5, 12, 97, 1000):
        expect = small_table.count(r) * math.pi / (y * r * r)
        assert 2 * P.u_r_term(r, (0.3, y), small_table) == pytest.approx(expect, rel=0.1)


def test_u_r_values_match_scalar(small_table):
    vals = P.u_r_values(Z1, 3000, small_table)
    for r in (1, 2, 3, 4, 7, 100, 2999):
        assert vals[r - 1] == pytest.approx(P.u_r_term(r, Z1, small_table), rel=1e-13)


def test_small_t_branch_used(small_table):
    # y = 1/r0 exactly puts t = 0 at r0 = 2; y slightly off exercises the series branch
    z = HalfPlanePoint(0.17, 0.5 + 1e-3)
    vals = P.u_r_values(z, 10, small_table)
    assert np.isfinite(vals).all()
    assert vals[1] == pytest.approx(P.u_r_term(2, z, small_table))


def test_table_too_small(small_table):
    with pytest.raises(TableTooSmall):
        P.u_truncated(Z1, P.TruncationScheme(small_table.R_max + 1, "raw"), small_table)


def test_scheme_validation():
    with pytest.raises(ValueError):
        P.TruncationScheme(0)
    with pytest.raises(ValueError):
        P.TruncationScheme(10, P.Level.AVG, avg_window=1.5)
    assert P.TruncationScheme(300, "avg").window_start == 200


def test_mirror_masking(small_table):
    for z in [(0.0, 1.0), (0.5, 0.7), (0.0, 1.0 + 1e-13), (0.25, math.sqrt(1 / 16 - 0.25**2 + 0.25**2))]:
        with pytest.raises(PoleProximity):
            P.u_truncated(z, P.TruncationScheme(100, "raw"), small_table)
    # |z - 1/3|^2 = 1/9 is the r = 3, p = 1 mirror
    with pytest.raises(PoleProximity) as exc:
        P.u_truncated((1 / 3 + 0.1, math.sqrt(1 / 9 - 0.01)), P.TruncationScheme(100, "raw"), small_table)
    assert exc.value.mirror.r == 3


def test_positivity_and_monotonicity(small_table):
    s = P.PotentialSeries.compute(Z1, 5000, small_table)
    raw = s.values(P.Level.RAW, np.arange(1, 5001))
    assert (raw > 0).all()
    assert (np.diff(raw) >= 0).all()


def test_raw_reference_values(small_table):
    assert abs(P.u_truncated(Z1, P.TruncationScheme(10_000, "raw"), small_table).value - 52.24167922) < 5e-8
    assert abs(P.u_truncated(Z2, P.TruncationScheme(10_000, "raw"), small_table).value - 52.24339662) < 5e-8
    s = P.PotentialSeries.compute(Z1, 20_000, small_table)
    assert abs(s.values("raw", 20_000)[0] - 52.24327256) < 5e-8


def test_cinf_small_R_reference(small_table):
    assert abs(P.u_truncated(Z1, P.TruncationScheme(10_000, "cinf"), small_table).value - 52.2450557618857) < 1e-10
    assert abs(P.u_truncated(Z2, P.TruncationScheme(10_000, "cinf"), small_table).value - 52.2450554614623) < 1e-10


def test_correction_ladder_at_1e5(table_4e5):
    s = P.PotentialSeries.compute(Z1, 100_000, table_4e5)
    expected = {"c0": 52.24496886, "c1": 52.24504929, "c2": 52.24505901}
    for lv, v in expected.items():
        assert abs(s.values(lv, 100_000)[0] - v) < 5e-8
    assert abs(s.values("cinf", 100_000)[0] - 52.2450552237500) < 1e-10
    s2 = P.PotentialSeries.compute(Z2, 100_000, table_4e5)
    assert abs(s2.values("cinf", 100_000)[0] - 52.2450552255882) < 1e-10


@pytest.mark.parametrize("R", [10_000, 100_000])
def test_convergence_ordering(table_4e5, R):
    s = P.PotentialSeries.compute(Z1, R, table_4e5)
    errs = [abs(s.values(lv, R)[0] - U_REF) for lv in ("cinf", "c2", "c1", "c0", "raw")]
    assert errs == sorted(errs)


def test_averaged_uses_window(small_table):
    s = P.PotentialSeries.compute(Z1, 3000, small_table)
    vals = s.values(P.Level.CINF, np.arange(2000, 3001))
    assert s.value(P.TruncationScheme(3000, "avg")) == pytest.approx(vals.mean(), rel=1e-15)


def test_thread_count_does_not_change_bits(table_4e5):
    a = P.PotentialSeries.compute(Z1, 200_000, table_4e5, threads=1)
    b = P.PotentialSeries.compute(Z1, 200_000, table_4e5, threads=3)
    assert np.array_equal(a.prefix, b.prefix)


def test_double_double_accumulator_agrees(small_table):
    a = P.PotentialSeries.compute(Z1, 20_000, small_table)
    b = P.PotentialSeries.compute(Z1, 20_000, small_table, accumulator="dd")
    assert abs(a.prefix[-1] - b.prefix[-1]) < 1e-13


def test_checkpoint_resume_is_exact(tmp_path, table_4e5):
    ck = tmp_path / "run.uckp"
    full = P.PotentialSeries.compute(Z1, 300_000, table_4e5)
    P.PotentialSeries.compute(Z1, 150_000, table_4e5, checkpoint=ck)
    z, R_done, s, c = P.read_checkpoint(ck)
    assert (z, R_done) == (Z1, 150_000)
    resumed = P.PotentialSeries.compute(Z1, 300_000, table_4e5, checkpoint=ck)
    assert resumed.prefix[-1] == full.prefix[-1]
    assert np.isnan(resumed.prefix[1000])
    with pytest.raises(ValueError):
        resumed.values("raw", 1000)
    # a different point ignores the file
    other = P.PotentialSeries.compute(Z2, 1000, table_4e5, checkpoint=tmp_path / "other")
    assert not np.isnan(other.prefix[10])


def test_checkpoint_written_periodically(tmp_path, table_4e5, monkeypatch):
    writes = []
    real = P._write_checkpoint
    monkeypatch.setattr(P, "_write_checkpoint", lambda *a: (writes.append(a[2]), real(*a)))
    P.PotentialSeries.compute(Z1, 300_000, table_4e5, checkpoint=tmp_path / "c")
    assert len(writes) >= 2 and writes[-1] == 300_000


def test_checkpoint_corruption(tmp_path, small_table):
    ck = tmp_path / "c"
    P.PotentialSeries.compute(Z1, 100, small_table, checkpoint=ck)
    data = bytearray(ck.read_bytes())
    data[20] ^= 0xFF
    ck.write_bytes(bytes(data))
    with pytest.raises(CacheFileError):
        P.read_checkpoint(ck)


def test_partials(small_table):
    est = P.u_truncated(Z1, P.TruncationScheme(5000, "cinf"), small_table, partials_every=1000)
    assert [r for r, _ in est.partials] == [1000, 2000, 3000, 4000, 5000]
    assert est.partials[-1][1] == est.value


def test_symmetries(table_4e5):
    # CInf truncation error at R = 1e5 is ~5e-9 at z1 and ~3e-9 at its S-image
    scheme = P.TruncationScheme(100_000, "cinf")
    assert P.modularity_residual(Z1, S3, scheme, table_4e5) < 1e-8
    assert P.modularity_residual(Z1, T, scheme, table_4e5) < 1e-8
    assert P.modularity_residual(Z1, S, scheme, table_4e5) < 1e-8
    assert P.modularity_residual(Z1, T**0, scheme, table_4e5) == 0.0


def test_reduced_point_same_value(table_4e5):
    from kmcalogero.geometry import reduce_to_fundamental

    w, _ = reduce_to_fundamental(Z1)
    scheme = P.TruncationScheme(100_000, "cinf")
    a = P.u_truncated(Z1, scheme, table_4e5).value
    b = P.u_truncated(w, scheme, table_4e5).value
    assert abs(a - b) < 1e-8


def test_level_slicing_small_levels():
    # ell_max = 0: only the r >= 1 mirrors of the adjoint sextet
    z = HalfPlanePoint(0.1, 0.7)
    rho2 = z.x**2 + z.y**2
    direct = 0.0
    for r in range(1, 11):
        for p in range(-10, 11):
            for q in range(-10, 11):
                if p * p + q * r == 1 and r - p - q == 0:
                    direct += z.y**2 / (r * rho2 - 2 * p * z.x - q) ** 2
    assert P.u_by_level_slicing(z, 0) == pytest.approx(P.u0_exact(z) + 2 * direct, rel=1e-14)
    vals = [P.u_by_level_slicing(z, L) for L in range(0, 30, 3)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_level_slicing_against_truncated_sum(small_table):
    # every mirror up to ell_max has r <= 4(ell_max + 1)/3, and conversely r <= R covers all
    # mirrors of level < 3R/4 - 1; compare the sums over a common mirror set
    L = 150
    z = Z1
    by_level = P.u_by_level_slicing(z, L)
    assert by_level < P.u_truncated(z, P.TruncationScheme(10_000, "raw"), small_table).value
    assert abs(by_level - U_REF) < 2.0


def test_v_level_zero_direct():
    x = MinkowskiPoint(2.0, 0.3, 0.1)
    direct = 0.5 * math.fsum(1.0 / x.dot(minkowski_vector(a)) ** 2 for a in enumerate_level(0))
    assert P.v_level_minkowski(0, x) == pytest.approx(direct, rel=1e-15)
    alt = math.fsum(1.0 / x.dot(np.array(A2_ROOTS[i], float) @ SIMPLE_ROOTS) ** 2 for i in (1, 2, 3))
    assert P.v_level_minkowski(0, x) == pytest.approx(alt, rel=1e-14)
    assert P.v_level_minkowski(-3, x) == P.v_level_minkowski(3, x)


def test_v_level_zero_rotation():
    for theta, phi in [(0.4, 0.3), (1.1, 1.0), (0.2, -0.7)]:
        a = P.v_level_minkowski(0, MinkowskiPoint.from_polar(theta, phi))
        b = P.v_level_minkowski(0, MinkowskiPoint.from_polar(theta, phi + 2 * math.pi / 3))
        assert a == pytest.approx(b, rel=1e-12)
        # the six-root sum has the closed form 9 / (2 r^2 sinh^2(theta) cos^2(3 phi))
        assert a == pytest.approx(9 / (2 * math.sinh(theta) ** 2 * math.cos(3 * phi) ** 2), rel=1e-12)


def test_v_level_pole():
    with pytest.raises(PoleProximity):
        P.v_level_minkowski(0, MinkowskiPoint.from_polar(0.5, math.pi / 2))
    with pytest.raises(ValueError):
        P.v_level_minkowski(0, MinkowskiPoint(1.0, 2.0, 0.0))


def test_first_family_partials_and_resummation():
    x = disk_to_hyperboloid(0.21 + 0.13j)
    for L in (1, 2, 5, 20):
        assert P.first_family_partial(x, L) == pytest.approx(P.first_family_direct(x, L), rel=1e-12)
    closed = P.first_family_closed(x)
    errs = [abs(P.first_family_partial(x, L) - closed) for L in (50, 200, 800)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3 * closed


def test_hecke_residual_decreases(table_4e5):
    res = [P.hecke_identity_residual(Z1, R, table_4e5) for R in (1000, 10_000, 100_000)]
    assert res[0] > res[1] > res[2]
    assert res[1] < 1e-3


def test_f1_needs_bigger_table(small_table):
    with pytest.raises(TableTooSmall):
        P.f1_truncated(Z1, small_table.R_max, small_table)


def test_f1_zero_stratum():
    # with R = 1 table the A = 0 part dominates; the closed form equals the C-sum
    from kmcalogero.arith import SqrtOneTable

    t = SqrtOneTable.build(8)
    z = HalfPlanePoint(0.3, 2.0)
    C = np.arange(-10**6, 10**6 + 1, dtype=float)
    a0 = float(np.sum(z.y**2 / (z.x + C) ** 2))
    a1 = z.y**2 * math.fsum(
        1.0 / (1 * (z.x**2 + z.y**2) + B * z.x + (B * B - 1) // 4) ** 2 for B in range(-20001, 20002, 2)
    )
    assert P.f1_truncated(z, 1, t) == pytest.approx(a0 + a1, rel=1e-6)


def test_v_level_one_closed_form():
    # the three level-one roots; phi enters with the opposite orientation of the polar chart
    for theta, phi in [(0.4, 0.3), (1.1, 1.0), (0.2, -0.7)]:
        ch, sh, s3 = math.cosh(theta), math.sinh(theta), -math.sin(3 * phi)
        closed = 18 * (ch**4 + 3 * sh**4 + 4 * ch * sh**3 * s3) / (math.cosh(3 * theta) - 3 * ch + 4 * sh**3 * s3) ** 2
        three = sum(1.5 / (ch - 2 * sh * math.sin(phi + k * 2 * math.pi / 3)) ** 2 for k in (-1, 0, 1))
        v1 = P.v_level_minkowski(1, MinkowskiPoint.from_polar(theta, phi))
        assert 2 * v1 == pytest.approx(closed, rel=1e-12)
        assert three == pytest.approx(closed, rel=1e-12)
