"""Acceptance suite: one group of tests per criterion, at the stated tolerances.

The terminal summary (see ``conftest.py``) prints one PASS/FAIL line per
criterion together with the measured quantities.
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import jv

from pyramidlab.decomposition import (
    EPSILON,
    CutoffFamily,
    PieceIndex,
    frequency_angles,
    l2_exponent_report,
    piece_multiplier,
    support_volume_mc,
    valid_indices,
)
from pyramidlab.multiplier import (
    FrequencyTriple,
    agreement,
    decay_scan,
    multiplier_hybrid,
    multiplier_mc,
    multiplier_reduced,
)
from pyramidlab.operator import (
    Combination,
    TestFunction,
    apply_pyramid,
    apply_triangle,
    shared_rotations,
)
from pyramidlab.quadrature import slicing_check
from pyramidlab.reconcile import random_points
from pyramidlab.region import ExponentPoint, contains, exclusion_check, hull, hull_subset, p0
from pyramidlab.rotations import RngStream, quotient_check
from pyramidlab.special import bessel_j, normalized_sphere_ft

from helpers import build

SEED = 20240601
FAM = CutoffFamily()


# --------------------------------------------------------------------------
# 1. multiplier reconciliation


@pytest.mark.criterion(1)
@pytest.mark.slow
@pytest.mark.parametrize("d", [4, 5, 6])
def test_reduced_and_hybrid_agree_with_mc(d, criterion_note):
    pts = random_points(d, 20, RngStream(SEED, d), max_norm=5.0)
    red_ok = hy_ok = 0
    for i, p in enumerate(pts):
        mc = multiplier_mc(p, n=100_000, rng=RngStream(SEED, 1000 * d + 2 * i))
        hy = multiplier_hybrid(p, n=100_000, rng=RngStream(SEED, 1000 * d + 2 * i + 1))
        red = multiplier_reduced(p)
        red_ok += agreement(red, mc, 3.0)
        hy_ok += agreement(hy, mc, 3.0)
    criterion_note(f"d={d}: reduced {red_ok}/20, hybrid {hy_ok}/20 within 3 combined stderr")
    assert red_ok >= 19
    assert hy_ok >= 19


# --------------------------------------------------------------------------
# 2. origin anchor


@pytest.mark.criterion(2)
@pytest.mark.parametrize("d", [4, 5, 6, 8])
def test_origin_is_one(d, criterion_note):
    z = np.zeros(d)
    origin = FrequencyTriple(z, z, z)
    red = multiplier_reduced(origin, tol=1e-12)
    hy = multiplier_hybrid(origin, n=10_000, rng=RngStream(SEED))
    mc = multiplier_mc(origin, n=10_000, rng=RngStream(SEED))
    criterion_note(
        f"d={d}: |reduced-1|={abs(red.value - 1):.1e}, |hybrid-1|={abs(hy.value - 1):.1e}, "
        f"|mc-1|={abs(mc.value - 1):.1e} (stderr {mc.stderr:.1e})"
    )
    assert abs(red.value - 1.0) <= 1e-9
    assert abs(hy.value - 1.0) <= 1e-9
    assert abs(mc.value - 1.0) <= mc.stderr + 1e-15


# --------------------------------------------------------------------------
# 3. decay


@pytest.mark.criterion(3)
@pytest.mark.slow
def test_decay_along_rays(criterion_note):
    d = 5
    rays = random_points(d, 5, RngStream(SEED, 3), min_norm=1.0, max_norm=1.0)
    results = []
    for ray in rays:
        scan = decay_scan(ray, scales=(1, 2, 4, 8, 16, 32, 64), method="reduced")
        results.append(scan)
        criterion_note(
            f"C={scan.constant:.3g} slope={scan.slope:.2f} (limit {scan.slope_limit}) "
            f"truncated={scan.truncated}"
        )
    for scan in results:
        assert scan.constant <= 10
        assert scan.slope <= scan.slope_limit


# --------------------------------------------------------------------------
# 4. partition suite


@pytest.mark.criterion(4)
def test_size_partitions_of_unity(criterion_note):
    gen = np.random.default_rng(SEED)
    worst_phi = worst_zeta = 0.0
    for _ in range(1000):
        d = int(gen.integers(4, 9))
        f = gen.standard_normal(3 * d) * 2.0 ** gen.uniform(-3, 12)
        p = FrequencyTriple.from_flat(f, d)
        a = frequency_angles(p)
        top = int(math.log2(max(a.radius, a.xi_norm, 1.0))) + 3
        worst_phi = max(worst_phi, abs(sum(FAM.radial_piece(i, a.radius) for i in range(top)) - 1))
        worst_zeta = max(worst_zeta, abs(sum(FAM.radial_piece(i, a.xi_norm) for i in range(top)) - 1))
    criterion_note(f"max |sum phi_i - 1| = {worst_phi:.1e}, max |sum zeta_i - 1| = {worst_zeta:.1e}")
    assert worst_phi <= 1e-12
    assert worst_zeta <= 1e-12


@pytest.mark.criterion(4)
@pytest.mark.parametrize("eps", [EPSILON, 0.001, 0.09])
def test_remark5_region(eps):
    fam = CutoffFamily(eps)
    gen = np.random.default_rng(SEED)
    for i in range(0, 9):
        # ratio min/max <= 2^-eps 2^-i, with either of eta and delta the larger
        p = build(10.0, 10.0, i + eps + gen.uniform(0, 6, 1)[0], 0.5, 0.5)
        q = build(10.0, 10.0, -(i + eps) - gen.uniform(0, 6, 1)[0], 0.5, 0.5)
        for pt in (p, q):
            L = frequency_angles(pt).log_ratio
            assert abs(fam.ratio_upper(i, L) - 1.0) <= 1e-15
        assert abs(fam.ratio_upper(i, i + 2.0) - 1.0) <= 1e-15


def _band_probe(fn, lo, hi):
    outside = [fn(lo / (1 + 1e-6)), fn(hi * (1 + 1e-6))]
    inside = [fn(lo * 1.05), fn(hi / 1.05)]
    return outside, inside


@pytest.mark.criterion(4)
@pytest.mark.parametrize("level", [1, 2, 3, 5])
def test_five_support_bands(level):
    i = j = k = level
    e = FAM.epsilon
    checks = {
        # phi_i in |(eta, delta)| and zeta_i in |xi|
        "phi": (lambda r: FAM.radial_piece(i, frequency_angles(build(r, 2.0**i, 0.3, 0.5, 0.5)).radius),
                2.0 ** (i - 1), 2.0 ** (i + 1)),
        "zeta": (lambda x: FAM.radial_piece(i, frequency_angles(build(2.0**i, x, 0.3, 0.5, 0.5)).xi_norm),
                 2.0 ** (i - 1), 2.0 ** (i + 1)),
        # psi_j in the ratio min/max
        "psi": (lambda q: FAM.ratio_piece(j, frequency_angles(build(8.0, 8.0, -math.log2(q), 0.5, 0.5)).log_ratio),
                2.0 ** (-j - 1 - e), 2.0 ** (-j + e)),
        # rho_k in |sin theta| and rho1_k in |b1|
        "rho": (lambda c: FAM.angle_piece(k, frequency_angles(build(8.0, 8.0, 0.3, c, 0.5)).sin_theta),
                2.0 ** (-k - 1), 2.0 ** (0.5 - k)),
        "rho1": (lambda c: FAM.angle_piece(k, frequency_angles(build(8.0, 8.0, 0.3, 0.5, c)).b1),
                 2.0 ** (-k - 1), 2.0 ** (0.5 - k)),
    }
    for name, (fn, lo, hi) in checks.items():
        outside, inside = _band_probe(fn, lo, hi)
        assert outside == [0.0, 0.0], name
        assert min(inside) > 0, name
    # the stated angular band [2^-(k+1), 2^-(k-1)] contains the measured one
    assert FAM.angle_piece(k, 2.0 ** -(k - 1)) == 0.0


@pytest.mark.criterion(4)
def test_piece_telescoping(criterion_note):
    gen = np.random.default_rng(SEED + 4)
    worst = 0.0
    count = 0
    for _ in range(12):
        r = 2.0 ** gen.uniform(0.5, 4.0)
        x = r * 2.0 ** gen.uniform(-0.7, 0.7)
        p = build(r, x, gen.uniform(-4, 4), 2.0 ** gen.uniform(-5, 0), 2.0 ** gen.uniform(-5, 0))
        m = multiplier_reduced(p).value
        a = frequency_angles(p)
        for i in range(0, 8):
            target = m * FAM.radial_piece(i, a.radius) * FAM.radial_piece(i, a.xi_norm)
            total = sum(piece_multiplier(idx, p, m) for idx in valid_indices(i))
            worst = max(worst, abs(total - target))
            count += target != 0
    criterion_note(f"max |sum_(j,k) m_ijk - m phi_i zeta_i| = {worst:.1e} over {count} levels")
    assert count > 12
    assert worst <= 1e-9


# --------------------------------------------------------------------------
# 5. support-volume scaling


@pytest.mark.criterion(5)
def test_volume_ratio_across_k(criterion_note):
    d = 5
    target = 2.0 ** (-2 * (d - 3))
    ests = [support_volume_mc(PieceIndex(8, 0, k), d, 400_000, RngStream(SEED, 50 + k))
            for k in range(1, 5)]
    assert not any(e.underpowered for e in ests)
    ratios = [b.value / a.value for a, b in zip(ests, ests[1:])]
    criterion_note(
        "k ratios (log2): " + ", ".join(f"{math.log2(r):.2f}" for r in ratios)
        + f"; target {math.log2(target):.0f} within a factor 2"
    )
    for r in ratios:
        assert 0.5 <= r / target <= 2.0


@pytest.mark.criterion(5)
def test_volume_ratio_across_i(criterion_note):
    d = 5
    target = 2.0 ** (3 * d)
    ests = [support_volume_mc(PieceIndex(i, 1, 1), d, 400_000, RngStream(SEED, 60 + i))
            for i in range(3, 7)]
    assert not any(e.underpowered for e in ests)
    ratios = [b.value / a.value for a, b in zip(ests, ests[1:])]
    criterion_note(
        "i ratios (log2): " + ", ".join(f"{math.log2(r):.2f}" for r in ratios)
        + f"; target {math.log2(target):.0f} within a factor 2"
    )
    for r in ratios:
        assert 0.5 <= r / target <= 2.0


# --------------------------------------------------------------------------
# 6. L2 threshold


@pytest.mark.criterion(6)
def test_l2_threshold(criterion_note):
    for d in range(4, 60):
        rep = l2_exponent_report(d)
        assert isinstance(rep.exponent, Fraction)
        assert rep.exponent == Fraction(-d, 6) + Fraction(5, 2)
        assert rep.summable == (d > 15)
    r16, r15 = l2_exponent_report(16), l2_exponent_report(15)
    criterion_note(f"exponent(16) = {r16.exponent}, exponent(15) = {r15.exponent}, threshold = {r16.threshold}")
    assert r16.exponent == Fraction(-1, 6)
    assert r15.exponent == 0
    assert r16.threshold == 16


# --------------------------------------------------------------------------
# 7. region geometry


@pytest.mark.criterion(7)
def test_region_geometry(criterion_note):
    half = Fraction(1, 2)
    centre = ExponentPoint(half, half, half)
    for d in range(5, 101):
        rep = exclusion_check(d)
        assert rep.witness == Fraction(5 * d, 2 * d - 8) and rep.witness > 1
        assert rep.lp_excluded and rep.agree
        assert contains(hull("sec10_Sprime", d), centre).inside
        banach = hull("banach", d)
        assert hull_subset(banach, hull("sec10_S", d))
        assert hull_subset(banach, hull("sec10_Sprime", d))
    assert exclusion_check(16).witness == Fraction(10, 3)
    assert p0(16) == Fraction(40, 23)
    w, w0 = exclusion_check(16).certificate
    criterion_note(f"d=5..100 excluded; witness(16) = 10/3; certificate at 16: w={[str(c) for c in w]}, w0={w0}")


# --------------------------------------------------------------------------
# 8. operator checks


def _triples(d, gen):
    c = lambda: gen.normal(0, 0.4, d)  # noqa: E731
    return [
        [TestFunction.gaussian(d, 1.0, c()), TestFunction.gaussian(d, 1.3, c()), TestFunction.gaussian(d, 0.8, c())],
        [TestFunction.ball(d, 1.5, c()), TestFunction.gaussian(d, 1.0, c()), TestFunction.ball(d, 1.2, c())],
        [TestFunction.ball(d, 1.4, c()), TestFunction.ball(d, 1.6, c()), TestFunction.gaussian(d, 1.1, c())],
    ]


@pytest.mark.criterion(8)
def test_domination_and_probability_bound(criterion_note):
    d = 5
    gen = np.random.default_rng(SEED + 8)
    xs = gen.normal(0, 1.0, (100, d))
    lines = []
    for t_idx, (f, g, h) in enumerate(_triples(d, gen)):
        t, se_t = apply_pyramid(f, g, h, xs, n=20_000, rng=RngStream(SEED, 80 + t_idx))
        tri, se_d = apply_triangle(f, g, xs, n=20_000, rng=RngStream(SEED, 90 + t_idx))
        dom = np.abs(t) <= h.sup_norm() * tri + 3 * np.hypot(se_t, se_d)
        prob = np.abs(t) <= f.sup_norm() * g.sup_norm() * h.sup_norm()
        lines.append(f"triple {t_idx}: domination {dom.sum()}/100, probability bound {prob.sum()}/100")
        assert dom.all()
        assert prob.all()
    criterion_note("; ".join(lines))


@pytest.mark.criterion(8)
def test_multilinearity_and_translation_under_crn(criterion_note):
    d = 5
    gen = np.random.default_rng(SEED + 9)
    rot = shared_rotations(d, 20_000, RngStream(SEED, 99))
    f1, g, h = _triples(d, gen)[0]
    f2 = TestFunction.ball(d, 1.2, gen.normal(0, 0.4, d))
    xs = gen.normal(0, 0.8, (10, d))
    a, b = 1.7, -0.6
    lhs, _ = apply_pyramid(Combination(((a, f1), (b, f2))), g, h, xs, rotations=rot)
    r1, _ = apply_pyramid(f1, g, h, xs, rotations=rot)
    r2, _ = apply_pyramid(f2, g, h, xs, rotations=rot)
    scale = np.maximum(np.abs(a * r1) + np.abs(b * r2), 1e-300)
    lin = float(np.max(np.abs(lhs - (a * r1 + b * r2)) / scale))
    y = gen.normal(0, 1.0, d)
    base, _ = apply_pyramid(f1, g, h, xs, rotations=rot)
    moved, _ = apply_pyramid(f1.translated(y), g.translated(y), h.translated(y), xs + y, rotations=rot)
    tr = float(np.max(np.abs(moved - base) / np.maximum(np.abs(base), 1e-300)))
    criterion_note(f"multilinearity residual {lin:.1e}, translation residual {tr:.1e} (relative)")
    assert lin <= 1e-10
    assert tr <= 1e-10


# --------------------------------------------------------------------------
# 9. tool-level oracles


def _rotation_battery(d):
    u = np.zeros(d)
    u[0] = 1.0
    xi = np.linspace(0.3, 1.1, d)
    return {
        "cos(2 pi xi.Re1)": lambda r: np.cos(2 * np.pi * r[:, :, 0] @ xi),
        "R_12^2": lambda r: r[:, 0, 1] ** 2,
        "trace": lambda r: np.trace(r, axis1=1, axis2=2),
        "exp(R_11 + R_22)": lambda r: np.exp(r[:, 0, 0] + r[:, 1, 1]),
    }


def _sphere_battery(d):
    a = np.linspace(-1.0, 1.0, d)
    return {
        "x1^2": lambda x: x[:, 0] ** 2,
        "x1^4 x2^2": lambda x: x[:, 0] ** 4 * x[:, 1] ** 2,
        "cos(3 a.x)": lambda x: np.cos(3.0 * x @ a),
        "exp(x1 + x3)": lambda x: np.exp(x[:, 0] + x[:, 2]),
    }


@pytest.mark.criterion(9)
@pytest.mark.parametrize("d", [4, 5])
def test_quotient_and_slicing_batteries(d, criterion_note):
    worst = 0.0
    for k, (name, fn) in enumerate(_rotation_battery(d).items()):
        out = quotient_check(d, fn, 100_000, RngStream(SEED, 200 + k))
        z = abs(out["direct"] - out["quotient"]) / math.hypot(out["direct_stderr"], out["quotient_stderr"])
        worst = max(worst, z)
        assert z <= 3.0, name
    for k, (name, fn) in enumerate(_sphere_battery(d).items()):
        out = slicing_check(d, fn, 100_000, RngStream(SEED, 300 + k))
        z = abs(out["direct"] - out["sliced"]) / math.hypot(out["direct_stderr"], out["sliced_stderr"])
        worst = max(worst, z)
        assert z <= 3.0, name
    criterion_note(f"d={d}: largest |difference| / combined stderr = {worst:.2f}")


@pytest.mark.criterion(9)
def test_sphere_transform_and_bessel_recurrence(criterion_note):
    gen = np.random.default_rng(SEED)
    worst_z = 0.0
    for n in (1, 2, 3, 4):
        pts = gen.standard_normal((200_000, n + 1))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        for a in (0.25, 0.7, 1.6):
            vals = np.cos(2 * np.pi * a * pts[:, 0])
            se = vals.std(ddof=1) / math.sqrt(len(vals))
            z = abs(vals.mean() - normalized_sphere_ft(n, a)) / se
            worst_z = max(worst_z, z)
            assert z <= 3.0
    s = np.linspace(1.0, 6.0, 11)
    t = np.linspace(0.1, 100.0, 400)
    worst_rec = 0.0
    for order in s:
        lhs = bessel_j(order - 1, t) + bessel_j(order + 1, t)
        rhs = 2 * order / t * bessel_j(order, t)
        worst_rec = max(worst_rec, float(np.max(np.abs(lhs - rhs))))
    worst_ref = max(float(np.max(np.abs(bessel_j(o, t) - jv(o, t)))) for o in s)
    criterion_note(
        f"sphere FT vs MC: max z = {worst_z:.2f}; recurrence residual {worst_rec:.1e}; "
        f"max |J - scipy| {worst_ref:.1e}"
    )
    assert worst_rec <= 1e-6
