"""Polynomial-form tests: exact coefficient tables, global root oracle,
strip mapping, and consistency with the direct kernel evaluators.

Coefficient tables below are hand-expanded from the F/G monomials with
f_j = e^{k_j^3 t} y^{p_j}; root facts (multiplicities at y = +-i for the
(1,5) Minus case, unit-circle quotient roots) were derived by hand via
polynomial division by (y^2+1)^4.
"""

import cmath
import math
from fractions import Fraction

import mpmath as mp
import pytest

from soliton_pole_lab.exppoly import (
    ExpPoly,
    ExpTerm,
    build_F_poly,
    build_G_poly,
    exp_poly_eval,
    oracle_poles,
    roots_at_time,
    x_to_y,
    y_to_x,
)
from soliton_pole_lab.kernel import (
    F_scaled,
    G_scaled,
    SolitonConfig,
    Variant,
)

C15M = SolitonConfig.make(1, 5, "minus")
C12M = SolitonConfig.make(1, 2, "minus")
C12P = SolitonConfig.make(1, 2, "plus")


def term_table(poly: ExpPoly) -> list[tuple[int, Fraction, Fraction]]:
    return [(t.degree, t.coeff_exact, t.sigma_exact) for t in poly.terms]


# ---------------------------------------------------------------------------
# Exact construction
# ---------------------------------------------------------------------------


def test_F_poly_15_minus_exact_table() -> None:
    # gamma = 6/4 = 3/2, gamma^2 = 9/4:
    # F = e^{252t}y^12 + (9/4)e^{250t}y^10 - (5/2)e^{126t}y^6 + (9/4)e^{2t}y^2 + 1
    poly = build_F_poly(C15M)
    assert term_table(poly) == [
        (0, Fraction(1), Fraction(0)),
        (2, Fraction(9, 4), Fraction(2)),
        (6, Fraction(-5, 2), Fraction(126)),
        (10, Fraction(9, 4), Fraction(250)),
        (12, Fraction(1), Fraction(252)),
    ]
    assert poly.degree == 12
    assert poly.lam == pytest.approx(1.0)


def test_G_poly_15_minus_exact_table() -> None:
    # G = -e^{251t}y^11 + 5e^{127t}y^7 + 5e^{125t}y^5 - e^{t}y
    poly = build_G_poly(C15M)
    assert term_table(poly) == [
        (1, Fraction(-1), Fraction(1)),
        (5, Fraction(5), Fraction(125)),
        (7, Fraction(5), Fraction(127)),
        (11, Fraction(-1), Fraction(251)),
    ]
    assert poly.degree == 11  # p1 + 2 p2


def test_G_poly_15_t0_coefficient_symmetry() -> None:
    # At t=0 the nonzero coefficients read the same outward from both ends:
    # degrees (1, 5, 7, 11) with values (-1, 5, 5, -1).
    poly = build_G_poly(C15M)
    coeffs = [c.value() for c in poly.coefficients_at(0.0)]
    nonzero = [(n, v) for n, v in enumerate(coeffs) if v != 0]
    vals = [v for _, v in nonzero]
    assert vals == pytest.approx(vals[::-1])


def test_F_poly_12_plus_exact_table() -> None:
    # gamma = 3: F+ = (1 - f1 f2)^2 + 9 (f1 + f2)^2 with f1 = e^t y, f2 = e^{8t} y^2:
    # 1 + 9 e^{2t} y^2 + 16 e^{9t} y^3 + 9 e^{16t} y^4 + e^{18t} y^6.
    poly = build_F_poly(C12P)
    assert term_table(poly) == [
        (0, Fraction(1), Fraction(0)),
        (2, Fraction(9), Fraction(2)),
        (3, Fraction(16), Fraction(9)),
        (4, Fraction(9), Fraction(16)),
        (6, Fraction(1), Fraction(18)),
    ]
    assert poly.degree == 6


def test_F_constant_term_is_one_always() -> None:
    for cfg in (C12M, C12P, C15M, SolitonConfig.make(2, 3, "plus")):
        poly = build_F_poly(cfg)
        for t in (-1.5, 0.0, 0.8):
            coeffs = poly.coefficients_at(t)
            assert coeffs[0].value() == pytest.approx(1.0)


def test_build_requires_commensurable() -> None:
    with pytest.raises(ValueError):
        build_F_poly(SolitonConfig.make(1.0, 2.0))
    with pytest.raises(ValueError):
        build_G_poly(SolitonConfig.make(1.0, math.sqrt(2.0)))


# ---------------------------------------------------------------------------
# Evaluation consistency with the kernel
# ---------------------------------------------------------------------------


def test_exp_poly_matches_kernel_F_and_G() -> None:
    cases = [
        SolitonConfig.make(1, 2, "minus"),
        SolitonConfig.make(1, 2, "plus"),
        SolitonConfig.make(2, 3, "minus"),
        SolitonConfig.make(1, 2, "plus", x1=0.4, x2=-0.3),
    ]
    pts = [(0.3 + 0.4j, 0.2), (-1.1 - 0.9j, -0.7), (2.0 + 1.3j, 1.1)]
    for cfg in cases:
        fpoly = build_F_poly(cfg)
        gpoly = build_G_poly(cfg)
        for x, t in pts:
            y = x_to_y(x, fpoly.lam)
            for poly, kernel_fn in ((fpoly, F_scaled), (gpoly, G_scaled)):
                a = exp_poly_eval(poly, y, t).value()
                b = kernel_fn(cfg, x, t).value()
                assert abs(a - b) < 1e-12 * (1.0 + abs(b))


def test_exp_poly_derivative_matches_fd() -> None:
    poly = build_F_poly(C12M)
    y, t, h = 0.7 + 0.3j, 0.25, 1e-6
    fd = (exp_poly_eval(poly, y + h, t).value() - exp_poly_eval(poly, y - h, t).value()) / (2 * h)
    an = exp_poly_eval(poly, y, t, dy=1).value()
    assert abs(fd - an) < 1e-7 * (1.0 + abs(an))


# ---------------------------------------------------------------------------
# Strip mapping
# ---------------------------------------------------------------------------


def test_y_to_x_hand_values() -> None:
    assert y_to_x(1.0 + 0j, 1.0) == 0
    assert y_to_x(1j, 1.0) == pytest.approx(-0.5j * math.pi)
    # Negative real axis maps to the upper boundary Im x = +lambda pi.
    assert y_to_x(-1.0 + 0j, 1.0) == pytest.approx(1j * math.pi)
    assert y_to_x(-2.0 + 0j, 0.5).imag == pytest.approx(0.5 * math.pi)
    with pytest.raises(ValueError):
        y_to_x(0j, 1.0)


def test_y_to_x_roundtrip_and_strip() -> None:
    lam = 2.0
    for y in (0.3 + 0.8j, -1.7 + 0.01j, -1.7 - 0.01j, 5.0 + 0j, 1e-3 - 2j):
        x = y_to_x(y, lam)
        assert -lam * math.pi < x.imag <= lam * math.pi
        assert abs(x_to_y(x, lam) - y) < 1e-12 * abs(y)


# ---------------------------------------------------------------------------
# Global root oracle
# ---------------------------------------------------------------------------


def test_roots_F15_minus_t0_multiplicity4() -> None:
    # F(y, 0) = (y^2+1)^4 (y^4 - (7/4) y^2 + 1): two 4-fold roots at +-i and
    # four simple roots on the unit circle.
    rs = roots_at_time(build_F_poly(C15M), 0.0)
    assert rs.total_multiplicity() == 12
    quads = [y for y, m in rs.roots if m == 4]
    simples = [y for y, m in rs.roots if m == 1]
    assert len(quads) == 2 and len(simples) == 4
    assert sorted(y.imag for y in quads) == pytest.approx([-1.0, 1.0], abs=1e-9)
    for y in quads:
        assert abs(y.real) < 1e-9
    for y in simples:
        assert abs(abs(y) - 1.0) < 1e-9
    assert rs.worst_residual < 1e-8


def test_roots_F15_minus_small_t_all_simple() -> None:
    rs = roots_at_time(build_F_poly(C15M), 0.01)
    assert rs.total_multiplicity() == 12
    assert all(m == 1 for _, m in rs.roots)
    # The collision splits on cube-root-of-t scales: |dy| ~ (12 t)^{1/3} ~ 0.49.
    near_i = [y for y, _ in rs.roots if abs(y - 1j) < 0.6]
    near_mi = [y for y, _ in rs.roots if abs(y + 1j) < 0.6]
    assert len(near_i) == 4 and len(near_mi) == 4


def test_roots_G15_minus_t0_third_order_at_i() -> None:
    rs = roots_at_time(build_G_poly(C15M), 0.0)
    assert rs.total_multiplicity() == 11
    by_mult = {m: [] for _, m in rs.roots}
    for y, m in rs.roots:
        by_mult.setdefault(m, []).append(y)
    # y = 0 simple (lowest G degree is 1), y = +-i each of third order.
    triples = [y for y, m in rs.roots if m == 3]
    assert sorted(y.imag for y in triples) == pytest.approx([-1.0, 1.0], abs=1e-9)
    assert any(y == 0 for y, m in rs.roots if m == 1)


def test_degree_one_polynomial_exact_root() -> None:
    poly = ExpPoly(
        terms=(ExpTerm(0, -2.5, 0.0), ExpTerm(1, 1.0, 0.0)),
        lam=1.0,
        variant=Variant.MINUS,
        kind="G",
    )
    rs = roots_at_time(poly, 0.0)
    assert rs.roots == ((2.5 + 0j, 1),)


def test_roots_against_mpmath_polyroots() -> None:
    # Independent solver cross-check at a generic time.
    cfg = SolitonConfig.make(2, 3, "minus")
    poly = build_F_poly(cfg)
    t = 0.2
    rs = roots_at_time(poly, t)
    coeffs = [c.value() for c in poly.coefficients_at(t)]
    with mp.workdps(40):
        ref = mp.polyroots([mp.mpf(c.real) for c in reversed(coeffs)], maxsteps=200)
    mine = sorted(
        (y for y, m in rs.roots for _ in range(m)),
        key=lambda z: (z.real, z.imag),
    )
    ref_s = sorted((complex(r) for r in ref), key=lambda z: (z.real, z.imag))
    assert len(mine) == len(ref_s)
    for a, b in zip(mine, ref_s):
        assert abs(a - b) < 1e-8 * (1.0 + abs(b))


@pytest.mark.parametrize(
    "k1,k2",
    [(1, 2), (2, 3), (1, 4), (3, 5)],
)
@pytest.mark.parametrize("variant", ["minus", "plus"])
def test_pole_counts_and_exclusion_lines(k1: int, k2: int, variant: str) -> None:
    cfg = SolitonConfig.make(k1, k2, variant)
    assert cfg.comm is not None
    lam = cfg.comm.lam
    expect = 2 * (cfg.comm.p1 + cfg.comm.p2)
    for t in (-1.0, 0.0, 1.0):
        poles = oracle_poles(cfg, t=t)
        assert sum(m for _, m in poles) == expect
        for x, _ in poles:
            assert -lam * math.pi < x.imag <= lam * math.pi
            assert abs(x.imag) > 1e-9  # off the real axis
            assert abs(x.imag - lam * math.pi) > 1e-9  # off the boundary line
        # Conjugate pairing of the pole pattern.
        ims = sorted(x.imag for x, _ in poles)
        assert ims == pytest.approx([-v for v in reversed(ims)], abs=1e-9)


def test_kernel_F_small_at_oracle_poles() -> None:
    for cfg in (C12M, C12P):
        for x, _ in oracle_poles(cfg, t=0.3):
            assert F_scaled(cfg, x, 0.3).relative() < 1e-8


def test_oracle_poles_shift_translation() -> None:
    # Shifting both x1 and x2 by d translates every pole by +d.
    base = oracle_poles(C12M, t=0.15)
    shifted = oracle_poles(SolitonConfig.make(1, 2, "minus", x1=0.7, x2=0.7), t=0.15)
    assert len(base) == len(shifted)
    for (xb, mb), (xs, ms) in zip(base, shifted):
        assert mb == ms
        assert abs(xs - (xb + 0.7)) < 1e-8


def test_zero_sets_of_F_and_G_distinct_generic() -> None:
    # Away from exceptional data the pole positions (F zeros) stay clear of
    # the G zeros; at the (1,5) exceptional time they collide at y = +-i.
    t = 0.4
    f_roots = [y for y, _ in roots_at_time(build_F_poly(C12M), t).roots if y != 0]
    g_roots = [y for y, _ in roots_at_time(build_G_poly(C12M), t).roots if y != 0]
    dmin = min(abs(a - b) for a in f_roots for b in g_roots)
    assert dmin > 1e-3
    f15 = [y for y, _ in roots_at_time(build_F_poly(C15M), 0.0).roots]
    g15 = [y for y, _ in roots_at_time(build_G_poly(C15M), 0.0).roots]
    shared = min(abs(a - b) for a in f15 for b in g15)
    assert shared < 1e-9


def test_condition_estimates_finite_for_simple_roots() -> None:
    rs = roots_at_time(build_F_poly(C12M), 0.2)
    assert all(m == 1 for _, m in rs.roots)
    assert all(0 < c < 1e6 for c in rs.condition)


def test_residue_sum_continuity_at_collision() -> None:
    # Four simple poles near x = -i pi/2 at small |t| carry residues whose
    # sum approaches the residue of the order-(3,4) collision configuration:
    # u ~ 2 gamma (G'''/3!) / (F''''/4!) / (x - xc) there.
    cfg = C15M
    xc = -0.5j * math.pi
    g3 = G_scaled(cfg, xc, 0.0, dx=3)
    f4 = F_scaled(cfg, xc, 0.0, dx=4)
    res0 = 2.0 * cfg.gamma * 4.0 * g3.ratio(f4)
    for t in (1e-5, -1e-5):
        poles = oracle_poles(cfg, t=t)
        near = [x for x, m in poles if abs(x - xc) < 0.3 and m == 1]
        assert len(near) == 4
        total = 0j
        for x in near:
            G = G_scaled(cfg, x, t)
            Fx = F_scaled(cfg, x, t, dx=1)
            total += 2.0 * cfg.gamma * G.ratio(Fx)
        assert abs(total - res0) < 1e-4
