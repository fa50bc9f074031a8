"""Tests for the structural checks: factorization, excluded lines, cosine
relations, the sign law, translation identities, and residues.

Hand-derived anchors: at x = 0, t = 0 with unit shifts the plus factors
are (2 i gamma, -2 i gamma); for (k1, k2) = (1, 2) the mixed-parity
translation is theta = pi; for (1, 5) plus and (1, 3) minus the odd-odd
shifts are (3 pi/2, pi/2); every residue of u is +i or -i (Laurent
balance of the field equation), with a trapezoid contour integral as the
independent oracle.
"""

from __future__ import annotations

import cmath
import math
import random

import pytest

from soliton_pole_lab.kernel import (
    ConvergenceError,
    F_scaled,
    PoleError,
    SolitonConfig,
    Variant,
    eval_f,
    eval_one_soliton,
    factor_scaled,
)
from soliton_pole_lab.exppoly import oracle_poles
from soliton_pole_lab.tracker import track_curve
from soliton_pole_lab.analysis import (
    check_no_real_poles,
    cos_identities_residual,
    factor_F,
    odd_parity_translation,
    odd_translation_residuals,
    parity_translation_theta,
    real_decomp,
    residue_at_pole,
    translation_residual,
    vertical_sign,
)


def _line(imag: float, n: int = 4001, span: float = 20.0) -> list[complex]:
    return [complex(-span + 2 * span * i / (n - 1), imag) for i in range(n)]


# ---------------------------------------------------------------------------
# Real decomposition and factorization.
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("variant", ["plus", "minus"])
def test_real_decomp_reconstruction(variant):
    cfg = SolitonConfig.make(1, 2, variant, x1=0.3, x2=-0.2)
    rng = random.Random(3)
    for _ in range(50):
        x = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        t = rng.uniform(-2, 2)
        d = real_decomp(cfg, x, t)
        assert d.alpha == -x.imag
        assert d.a1 > 0 and d.a2 > 0
        for f, j in ((d.f1, 1), (d.f2, 2)):
            ref = eval_f(cfg, j, x, t)
            assert abs(f - ref) <= 1e-12 * abs(ref)
    d = real_decomp(cfg, 1.0 - 0.5j, 0.25)
    assert set(d.to_dict()) == {"alpha", "a1", "a2", "f1", "f2"}


def test_factor_anchor_at_origin():
    cfg = SolitonConfig.make(1, 2, "plus")
    F1, F2 = factor_F(cfg, 0j, 0.0)
    assert F1 == pytest.approx(6j)
    assert F2 == pytest.approx(-6j)
    assert F1 * F2 == pytest.approx(36.0)


@pytest.mark.parametrize("variant", ["plus", "minus"])
def test_factorization_product(variant):
    cfg = SolitonConfig.make(1, 2, variant)
    rng = random.Random(17)
    for _ in range(500):
        x = complex(rng.uniform(-4, 4), rng.uniform(-4, 4))
        t = rng.uniform(-2, 2)
        F1, F2 = factor_F(cfg, x, t)
        F = F_scaled(cfg, x, t).value()
        assert abs(F1 * F2 - F) <= 1e-12 * max(1e-300, abs(F))


def test_factor_zeros_pair_by_conjugation():
    """Whichever factor vanishes at a pole, the other vanishes at conj x."""
    cfg = SolitonConfig.make(1, 2, "plus")
    for x, _ in oracle_poles(cfg, t=0.25):
        r1 = factor_scaled(cfg, x, 0.25, 1).relative()
        r2 = factor_scaled(cfg, x, 0.25, 2).relative()
        which = 1 if r1 < r2 else 2
        other = 2 if which == 1 else 1
        assert min(r1, r2) < 1e-12
        assert factor_scaled(cfg, x.conjugate(), 0.25, other).relative() < 1e-12


# ---------------------------------------------------------------------------
# Excluded lines.
# ---------------------------------------------------------------------------


def test_no_zeros_on_real_axis_or_period_line():
    cfg = SolitonConfig.make(1, 5, "minus")
    scan = check_no_real_poles(cfg, 0.0)  # default real grid
    assert scan.min_residual > 1e-2
    assert scan.argmin.imag == 0.0
    scan_pi = check_no_real_poles(cfg, 0.0, _line(math.pi))
    assert scan_pi.min_residual > 1e-2
    # Same exclusion at a non-symmetric time and for the other variant.
    assert check_no_real_poles(cfg, 0.8).min_residual > 1e-2
    assert (
        check_no_real_poles(SolitonConfig.make(1, 2, "plus"), 0.3).min_residual
        > 1e-2
    )


def test_pole_line_dips_to_zero():
    """Im x = pi/2 carries the exceptional zero of (1, 5, minus) at t=0."""
    cfg = SolitonConfig.make(1, 5, "minus")
    scan = check_no_real_poles(cfg, 0.0, _line(math.pi / 2))
    assert scan.min_residual < 1e-20
    assert scan.argmin == pytest.approx(1j * math.pi / 2)
    d = scan.to_dict()
    assert d["samples"] == 4001 and d["t"] == 0.0


def test_empty_grid_rejected():
    with pytest.raises(ValueError):
        check_no_real_poles(SolitonConfig.make(1, 2), 0.0, [])


# ---------------------------------------------------------------------------
# Cosine relations.
# ---------------------------------------------------------------------------


def test_cos_identities_at_tracked_zeros():
    cfg = SolitonConfig.make(1, 2, "plus")
    hits = 0
    for t in (-1.2, -0.3, 0.0, 0.4, 2.0):
        for x, _ in oracle_poles(cfg, t=t):
            if factor_scaled(cfg, x, t, 1).relative() < 1e-8:
                rs = cos_identities_residual(cfg, x, t)
                assert max(rs) < 1e-8
                hits += 1
    assert hits >= 15  # half the poles belong to the first factor


def test_cos_identities_on_degenerate_line():
    """At the (1, 3, plus) t=0 zero x = -i pi/2, both cosines vanish
    together (alpha = pi/2 is an odd multiple of pi*lambda/2)."""
    cfg = SolitonConfig.make(1, 3, "plus")
    x = -1j * math.pi / 2
    assert factor_scaled(cfg, x, 0.0, 1).relative() < 1e-12
    rs = cos_identities_residual(cfg, x, 0.0)
    assert max(rs) < 1e-10
    d = real_decomp(cfg, x, 0.0)
    assert math.cos(cfg.k1 * d.alpha) == pytest.approx(0.0, abs=1e-12)
    assert math.cos(cfg.k2 * d.alpha) == pytest.approx(0.0, abs=1e-12)


def test_cos_identities_unit_moduli_zero():
    """The Re x = 0, t = 0 zero has A1 = A2 = 1 (the symmetric instant)."""
    cfg = SolitonConfig.make(1, 2, "plus")
    zeros = [x for x, _ in oracle_poles(cfg, t=0.0) if abs(x.real) < 1e-9]
    assert zeros
    d = real_decomp(cfg, zeros[0], 0.0)
    assert d.a1 == pytest.approx(1.0) and d.a2 == pytest.approx(1.0)


def test_cos_identities_errors():
    with pytest.raises(ValueError, match="plus"):
        cos_identities_residual(SolitonConfig.make(1, 2, "minus"), 1j, 0.0)
    with pytest.raises(PoleError, match="not a zero"):
        cos_identities_residual(SolitonConfig.make(1, 2, "plus"), 50 + 0.3j, 0.0)


# ---------------------------------------------------------------------------
# Vertical-motion sign law.
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module", params=["plus", "minus"])
def tracked_samples(request):
    cfg = SolitonConfig.make(1, 2, request.param)
    out = []
    for x0, _ in oracle_poles(cfg, t=-6.0):
        curve = track_curve(cfg, None, x0, -6.0, 6.0)
        out.extend(curve.samples[::7])
    return cfg, out


def test_sign_law_on_tracked_zeros(tracked_samples):
    cfg, samples = tracked_samples
    decisive = 0
    for t, x in samples:
        vs = vertical_sign(cfg, x, t)
        assert vs.consistent, (t, x, vs)
        if vs.predicted_sign != 0 and vs.measured_sign != 0:
            decisive += 1
            assert vs.predicted_sign == vs.measured_sign
    assert decisive > len(samples) // 2


def test_sign_factor_table(tracked_samples):
    """Conjugate zeros belong to opposite factors and flip both the
    measured velocity and the prediction coherently."""
    cfg, samples = tracked_samples
    t, x = next((t, x) for t, x in samples if abs(t) > 2.0)
    vs = vertical_sign(cfg, x, t)
    vc = vertical_sign(cfg, x.conjugate(), t)
    assert {vs.factor, vc.factor} == {1, 2}
    assert vc.measured == pytest.approx(-vs.measured, rel=1e-6, abs=1e-14)
    assert vc.expression == pytest.approx(-vs.expression, rel=1e-12)


def test_sign_dead_zone_symmetric_instant():
    """A zero with Re x = 0 at t = 0 has A1 = 1, hence prediction 0."""
    cfg = SolitonConfig.make(1, 2, "plus")
    zeros = [x for x, _ in oracle_poles(cfg, t=0.0) if abs(x.real) < 1e-9]
    vs = vertical_sign(cfg, zeros[0], 0.0)
    assert vs.predicted_sign == 0
    assert abs(vs.expression) < 1e-12
    assert vs.consistent


def test_sign_dead_zone_exceptional_line():
    """The on-line pole of (1, 5, minus) after the collision: cos(k2 a)=0
    kills the prediction and the measured motion is horizontal."""
    cfg = SolitonConfig.make(1, 5, "minus")
    x = min(
        (x for x, _ in oracle_poles(cfg, t=0.5)),
        key=lambda z: abs(z.imag - math.pi / 2),
    )
    assert abs(x.imag - math.pi / 2) < 1e-10
    vs = vertical_sign(cfg, x, 0.5)
    assert vs.predicted_sign == 0
    assert vs.measured_sign == 0
    assert vs.consistent
    assert vs.to_dict()["consistent"] is True


def test_sign_law_errors():
    with pytest.raises(PoleError, match="not a zero"):
        vertical_sign(SolitonConfig.make(1, 2, "plus"), 50 + 0.3j, 0.0)
    with pytest.raises(ConvergenceError, match="multiple zero|below threshold"):
        vertical_sign(SolitonConfig.make(1, 5, "minus"), 1j * math.pi / 2, 0.0)


# ---------------------------------------------------------------------------
# Translation identities.
# ---------------------------------------------------------------------------


def test_mixed_parity_theta():
    for k1, k2 in ((1, 2), (2, 3), (1, 4), (3, 4)):
        cfg = SolitonConfig.make(k1, k2, "plus")
        theta = parity_translation_theta(cfg)
        assert theta == pytest.approx(math.pi * cfg.comm.lam)
    # Spot value from the statement of the identity.
    cfg = SolitonConfig.make(1, 2, "plus")
    assert translation_residual(cfg, 0.3 + 0.1j, 0.2, math.pi) < 1e-10
    rng = random.Random(7)
    worst = 0.0
    for _ in range(200):
        x = complex(rng.uniform(-4, 4), rng.uniform(-4, 4))
        t = rng.uniform(-2, 2)
        worst = max(worst, translation_residual(cfg, x, t, math.pi))
    assert worst < 1e-10


def test_mixed_parity_pole_sets_translate():
    """Pole set of the minus variant = pole set of the plus variant
    shifted by -i theta (mod the vertical period)."""
    period = 2 * math.pi

    def fold(z: complex) -> complex:
        y = (z.imag + math.pi) % period - math.pi
        return complex(z.real, math.pi if y == -math.pi else y)

    plus = sorted(
        (fold(x) for x, _ in oracle_poles(SolitonConfig.make(1, 2, "plus"), t=0.37)),
        key=lambda z: (round(z.imag, 6), z.real),
    )
    minus = sorted(
        (
            fold(x - 1j * math.pi)
            for x, _ in oracle_poles(SolitonConfig.make(1, 2, "minus"), t=0.37)
        ),
        key=lambda z: (round(z.imag, 6), z.real),
    )
    assert max(abs(a - b) for a, b in zip(plus, minus)) < 1e-9


def test_mixed_parity_preconditions():
    with pytest.raises(ValueError, match="opposite parity"):
        parity_translation_theta(SolitonConfig.make(1, 5, "minus"))
    with pytest.raises(ValueError, match="commensurable"):
        parity_translation_theta(SolitonConfig.make(1.0, 2.3))


def test_odd_parity_thetas():
    lam_pi = math.pi  # lambda = 1 for all three configurations below
    t1, t2 = odd_parity_translation(SolitonConfig.make(1, 5, "plus"))
    assert (t1, t2) == pytest.approx((1.5 * lam_pi, 0.5 * lam_pi))
    t1, t2 = odd_parity_translation(SolitonConfig.make(1, 3, "minus"))
    assert (t1, t2) == pytest.approx((1.5 * lam_pi, 0.5 * lam_pi))
    t1, t2 = odd_parity_translation(SolitonConfig.make(3, 5, "minus"))
    assert (t1, t2) == pytest.approx((0.5 * lam_pi, 1.5 * lam_pi))


def test_odd_parity_identity_residuals():
    cfg = SolitonConfig.make(1, 3, "minus")
    t1, t2 = odd_parity_translation(cfg)
    rng = random.Random(23)
    for _ in range(100):
        x = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        t = rng.uniform(-1.5, 1.5)
        r1, r2 = odd_translation_residuals(cfg, t1, t2, x, t)
        assert max(r1, r2) < 1e-10


def test_odd_parity_preconditions():
    with pytest.raises(ValueError, match="p2 \\+ p1 = 6"):
        odd_parity_translation(SolitonConfig.make(1, 5, "minus"))
    with pytest.raises(ValueError, match="p2 - p1 = 2"):
        odd_parity_translation(SolitonConfig.make(1, 3, "plus"))
    with pytest.raises(ValueError, match="odd"):
        odd_parity_translation(SolitonConfig.make(1, 2, "plus"))
    with pytest.raises(ValueError, match="commensurable"):
        odd_parity_translation(SolitonConfig.make(1.0, 2.3, "plus"))


# ---------------------------------------------------------------------------
# Residues.
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("variant", ["plus", "minus"])
def test_residues_are_plus_minus_i(variant):
    cfg = SolitonConfig.make(1, 2, variant)
    for t in (-0.7, 0.0, 1.3):
        seen = {1: 0, -1: 0}
        for x, _ in oracle_poles(cfg, t=t):
            r = residue_at_pole(cfg, x, t)  # contour check is on by default
            dev = min(abs(r - 1j), abs(r + 1j))
            assert dev < 1e-8
            seen[1 if r.imag > 0 else -1] += 1
        assert seen[1] == 3 and seen[-1] == 3  # conjugate pairing


def test_residue_conjugate_symmetry():
    cfg = SolitonConfig.make(1, 2, "plus")
    for x, _ in oracle_poles(cfg, t=0.6)[:3]:
        r = residue_at_pole(cfg, x, 0.6)
        rc = residue_at_pole(cfg, x.conjugate(), 0.6)
        assert rc == pytest.approx(r.conjugate(), abs=1e-10)


def test_residue_one_soliton_contour_oracle():
    """Brute-force contour integral of the one-soliton at i pi/(2k)."""
    k = 1.3
    x0 = 1j * math.pi / (2 * k)
    n, rad = 256, 1e-3
    total = 0j
    for j in range(n):
        ph = cmath.exp(2j * math.pi * j / n)
        u = eval_one_soliton(k, 0.0, x0 + rad * ph, 0.0)
        total += u * ph
    assert total * rad / n == pytest.approx(1j, abs=1e-6)


def test_residue_incommensurable_config():
    from soliton_pole_lab.asymptotics import FamilyLabel, Speed, seed_state

    cfg = SolitonConfig.make(1.0, 2.3, "plus")
    x0, t0 = seed_state(cfg, FamilyLabel(Speed.SLOW, 1, -1))
    r = residue_at_pole(cfg, x0, t0)
    assert min(abs(r - 1j), abs(r + 1j)) < 1e-8


def test_residue_errors():
    with pytest.raises(ConvergenceError, match="multiple zero"):
        residue_at_pole(SolitonConfig.make(1, 5, "minus"), 1j * math.pi / 2, 0.0)
    with pytest.raises(PoleError, match="did not polish"):
        residue_at_pole(SolitonConfig.make(1, 2, "plus"), 40 + 0.2j, 0.0)
