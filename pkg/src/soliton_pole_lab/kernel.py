"""Closed-form evaluation of two-soliton solutions of the modified KdV equation.

The focusing mKdV equation

    u_t + 6 u^2 u_x + u_xxx = 0

admits a two-parameter family of 2-soliton solutions that extend to
meromorphic functions of complex x for every real t.  With wavenumbers
0 < k1 < k2 and shift parameters x1, x2, the building blocks are

    f_j(x, t) = exp(-k_j (x - x_j) + k_j^3 t),      gamma = (k2+k1)/(k2-k1),

and the two sign variants of the solution are rational in f1, f2:

    u = 2 gamma G / F,
    F_minus = (1 + f1 f2)^2 + gamma^2 (f1 - f2)^2,
    G_minus = -k1 f1 (1 + f2^2) + k2 f2 (1 + f1^2),

with the Plus variant obtained by substituting f1 -> -f1.  Equivalently
u = 2 (arctan g)_x for the angle representation g (``eval_g``).  The poles of
u in the complex x-plane are exactly the zeros of F; everything downstream
(tracking, structure checks, blowup construction) is built on the evaluators
in this module.

All evaluation is log-balanced (see ``_balanced``): the largest exponential is
factored out before any floating-point sum, so accuracy is limited by pole
geometry rather than by exp() overflow.  The unscaled entry points (eval_f,
eval_FG) raise OverflowError only when the *result itself* cannot be
represented.

Convention for shifts: the shift factors exp(k_j x_j) are folded directly
into f_j above.  For zero shifts this is the normalized solution whose
soliton interaction happens at x = 0, t = 0.  ``interaction_point`` returns
the interaction point in the translated-family parametrization (see its
docstring for the exact correspondence).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence, Union

from ._balanced import Scaled, balanced_sum

__all__ = [
    "Variant",
    "CommensurabilityInfo",
    "SolitonConfig",
    "PoleMarker",
    "PoleError",
    "ConvergenceError",
    "eval_f",
    "eval_g",
    "eval_FG",
    "eval_u",
    "eval_u_sumform",
    "eval_one_soliton",
    "one_soliton_pole",
    "interaction_point",
    "symmetric_center",
    "eqg_residual",
    "pde_residual",
    "F_scaled",
    "G_scaled",
    "factor_scaled",
    "kdv_F_scaled",
    "eval_u_x",
    "eval_u_xx",
    "strip_scale",
    "is_pole",
]

ExactLike = Union[int, str, Fraction]
NumberLike = Union[int, float, str, Fraction]

# Dimensionless pole tolerance from the design contract:
# x is a pole when |F| < POLE_TOL * max(1, |F_x| * strip_scale).
POLE_TOL = 1e-12
# Tolerance on dimensionless denominators (angle representation, sech forms).
DENOM_TOL = 1e-12


class PoleError(ValueError):
    """Raised when an evaluation that requires a regular point hits a pole."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative refinement fails to converge."""


class Variant(Enum):
    """Sign variant of the two-soliton solution (f1 -> -f1 exchanges them)."""

    PLUS = "plus"
    MINUS = "minus"

    @classmethod
    def coerce(cls, value: "Variant | str") -> "Variant":
        if isinstance(value, Variant):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown variant {value!r}; expected 'plus' or 'minus'")

    @property
    def sign(self) -> int:
        """+1 for PLUS, -1 for MINUS (the sign flipped with f1)."""
        return 1 if self is Variant.PLUS else -1


@dataclass(frozen=True)
class CommensurabilityInfo:
    """Arithmetic data available when k2/k1 is rational.

    k2/k1 = p2/p1 in lowest terms and lam = p1/k1 = p2/k2 so that every
    f_j is a function of y = exp(-x/lam): the solution is periodic in x with
    minimal imaginary period 2*pi*lam*i, and the fundamental strip is
    -lam*pi < Im x <= lam*pi.
    """

    p1: int
    p2: int
    lam: float
    lam_exact: Optional[Fraction] = None

    def __post_init__(self) -> None:
        if self.p1 <= 0 or self.p2 <= 0:
            raise ValueError("p1, p2 must be positive")
        if math.gcd(self.p1, self.p2) != 1:
            raise ValueError("p1, p2 must be coprime")
        if not (self.lam > 0):
            raise ValueError("lam must be positive")

    @property
    def period(self) -> float:
        """Minimal imaginary period of the solution (as a positive real)."""
        return 2.0 * math.pi * self.lam


def _as_exact(value: NumberLike) -> Optional[Fraction]:
    """Exact-mode parse: ints, Fractions and strings like '7' or '3/2'.

    Floats (and float-looking strings, e.g. '1.5') signal approximate mode
    and yield None.
    """
    if isinstance(value, bool):
        raise TypeError("wavenumbers must be numbers, not bool")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        s = value.strip()
        if "/" in s:
            return Fraction(s)
        try:
            return Fraction(int(s))
        except ValueError:
            return None
    return None


def _as_float(value: NumberLike) -> float:
    if isinstance(value, str):
        s = value.strip()
        if "/" in s:
            return float(Fraction(s))
        return float(s)
    return float(value)


@dataclass(frozen=True)
class SolitonConfig:
    """Parameters of one two-soliton solution.

    Attributes
    ----------
    k1, k2 : wavenumbers, 0 < k1 < k2.
    x1, x2 : real shifts of the two solitons (default 0 = normalized).
    variant : PLUS or MINUS.
    k1_exact, k2_exact : Fractions when constructed from exact inputs.
    comm : commensurability data, present iff both wavenumbers are exact
        (a rational ratio is only trusted when stated exactly).
    """

    k1: float
    k2: float
    x1: float = 0.0
    x2: float = 0.0
    variant: Variant = Variant.MINUS
    k1_exact: Optional[Fraction] = None
    k2_exact: Optional[Fraction] = None
    comm: Optional[CommensurabilityInfo] = None

    @classmethod
    def make(
        cls,
        k1: NumberLike,
        k2: NumberLike,
        variant: "Variant | str" = Variant.MINUS,
        x1: float = 0.0,
        x2: float = 0.0,
    ) -> "SolitonConfig":
        """Build a config; exact inputs (ints, 'p/q' strings, Fractions) turn
        on exact mode and populate the commensurability data."""
        k1x, k2x = _as_exact(k1), _as_exact(k2)
        k1f, k2f = _as_float(k1), _as_float(k2)
        if not (0.0 < k1f < k2f):
            raise ValueError(f"wavenumbers must satisfy 0 < k1 < k2, got {k1f}, {k2f}")
        comm = None
        if k1x is not None and k2x is not None:
            ratio = k2x / k1x
            p1, p2 = ratio.denominator, ratio.numerator
            lam_exact = Fraction(p1) / k1x
            comm = CommensurabilityInfo(
                p1=p1, p2=p2, lam=float(lam_exact), lam_exact=lam_exact
            )
        return cls(
            k1=k1f,
            k2=k2f,
            x1=float(x1),
            x2=float(x2),
            variant=Variant.coerce(variant),
            k1_exact=k1x,
            k2_exact=k2x,
            comm=comm,
        )

    def __post_init__(self) -> None:
        if not (0.0 < self.k1 < self.k2):
            raise ValueError("wavenumbers must satisfy 0 < k1 < k2")

    @property
    def gamma(self) -> float:
        """gamma = (k2+k1)/(k2-k1) > 1."""
        return (self.k2 + self.k1) / (self.k2 - self.k1)

    @property
    def gamma_exact(self) -> Optional[Fraction]:
        if self.k1_exact is None or self.k2_exact is None:
            return None
        return (self.k2_exact + self.k1_exact) / (self.k2_exact - self.k1_exact)

    @property
    def exact(self) -> bool:
        return self.k1_exact is not None and self.k2_exact is not None

    def with_variant(self, variant: "Variant | str") -> "SolitonConfig":
        v = Variant.coerce(variant)
        if v is self.variant:
            return self
        return SolitonConfig(
            k1=self.k1,
            k2=self.k2,
            x1=self.x1,
            x2=self.x2,
            variant=v,
            k1_exact=self.k1_exact,
            k2_exact=self.k2_exact,
            comm=self.comm,
        )

    def with_shifts(self, x1: float, x2: float) -> "SolitonConfig":
        return SolitonConfig(
            k1=self.k1,
            k2=self.k2,
            x1=float(x1),
            x2=float(x2),
            variant=self.variant,
            k1_exact=self.k1_exact,
            k2_exact=self.k2_exact,
            comm=self.comm,
        )


@dataclass(frozen=True)
class PoleMarker:
    """Marks that an evaluation point sits on (numerically: within tolerance
    of) a pole.  This is a value, not an error: callers asking for u at a pole
    get the location back together with the tiny denominator magnitude."""

    x: complex
    t: float
    magnitude: float


def strip_scale(cfg: SolitonConfig) -> float:
    """Length scale of the pole pattern transverse to the real axis.

    lam*pi for commensurable configs (half the imaginary period); pi/k2 (the
    fast soliton's pole spacing) otherwise.
    """
    if cfg.comm is not None:
        return cfg.comm.lam * math.pi
    return math.pi / cfg.k2


# ---------------------------------------------------------------------------
# Exponential-sum term tables:  each entry (c, a1, a2) stands for
#       c * f1^a1 * f2^a2.
# Differentiation acts term-wise:  d/dx -> *(-(a1 k1 + a2 k2)),
#                                  d/dt -> *(a1 k1^3 + a2 k2^3).
# ---------------------------------------------------------------------------

Term = tuple[complex, int, int]


def _terms_F(cfg: SolitonConfig, variant: Variant) -> list[Term]:
    g2 = cfg.gamma**2
    s = -variant.sign  # +1 Minus, -1 Plus in front of the f1 f2 cross terms
    # (1 + s f1 f2)^2 + gamma^2 (f2 - s f1)^2, s = -sign(variant)
    return [
        (1.0, 0, 0),
        (2.0 * s, 1, 1),
        (1.0, 2, 2),
        (g2, 2, 0),
        (-2.0 * s * g2, 1, 1),
        (g2, 0, 2),
    ]


def _terms_G(cfg: SolitonConfig, variant: Variant) -> list[Term]:
    s = variant.sign  # G_plus has +k1 f1 terms, G_minus has -k1 f1 terms
    k1, k2 = cfg.k1, cfg.k2
    return [
        (s * k1, 1, 0),
        (s * k1, 1, 2),
        (k2, 0, 1),
        (k2, 2, 1),
    ]


def _terms_factor(cfg: SolitonConfig, variant: Variant, which: int) -> list[Term]:
    """F splits over C as F = F1 * F2 with

        F_plus_i  = 1 ± i gamma f1 ± i gamma f2 - f1 f2,
        F_minus_i = 1 ± i gamma f1 ∓ i gamma f2 + f1 f2,

    where i-th factor takes the upper sign for which=1."""
    if which not in (1, 2):
        raise ValueError("factor index must be 1 or 2")
    ig = 1j * cfg.gamma if which == 1 else -1j * cfg.gamma
    if variant is Variant.PLUS:
        return [(1.0, 0, 0), (ig, 1, 0), (ig, 0, 1), (-1.0, 1, 1)]
    return [(1.0, 0, 0), (ig, 1, 0), (-ig, 0, 1), (1.0, 1, 1)]


def _terms_kdv(cfg: SolitonConfig) -> list[Term]:
    """The KdV-form tau-like denominator 1 + gamma f1 + gamma f2 + f1 f2."""
    g = cfg.gamma
    return [(1.0, 0, 0), (g, 1, 0), (g, 0, 1), (1.0, 1, 1)]


def _w_pair(cfg: SolitonConfig, x: complex, t: float) -> tuple[complex, complex]:
    w1 = -cfg.k1 * (x - cfg.x1) + cfg.k1**3 * t
    w2 = -cfg.k2 * (x - cfg.x2) + cfg.k2**3 * t
    return w1, w2


def _eval_terms(
    cfg: SolitonConfig,
    terms: Sequence[Term],
    x: complex,
    t: float,
    dx: int = 0,
    dt: int = 0,
) -> Scaled:
    w1, w2 = _w_pair(cfg, x, t)
    k1, k2 = cfg.k1, cfg.k2
    out: list[tuple[complex, complex]] = []
    for c, a1, a2 in terms:
        if dx:
            c = c * (-(a1 * k1 + a2 * k2)) ** dx
        if dt:
            c = c * (a1 * k1**3 + a2 * k2**3) ** dt
        out.append((c, a1 * w1 + a2 * w2))
    return balanced_sum(out)


def F_scaled(
    cfg: SolitonConfig,
    x: complex,
    t: float,
    variant: Optional[Variant] = None,
    dx: int = 0,
    dt: int = 0,
) -> Scaled:
    """Log-balanced F (or a mixed x/t derivative of it)."""
    v = cfg.variant if variant is None else Variant.coerce(variant)
    return _eval_terms(cfg, _terms_F(cfg, v), x, t, dx, dt)


def G_scaled(
    cfg: SolitonConfig,
    x: complex,
    t: float,
    variant: Optional[Variant] = None,
    dx: int = 0,
    dt: int = 0,
) -> Scaled:
    """Log-balanced G (or a mixed x/t derivative of it)."""
    v = cfg.variant if variant is None else Variant.coerce(variant)
    return _eval_terms(cfg, _terms_G(cfg, v), x, t, dx, dt)


def factor_scaled(
    cfg: SolitonConfig,
    x: complex,
    t: float,
    which: int,
    variant: Optional[Variant] = None,
    dx: int = 0,
    dt: int = 0,
) -> Scaled:
    """Log-balanced complex factor F1 or F2 of F (or a derivative)."""
    v = cfg.variant if variant is None else Variant.coerce(variant)
    return _eval_terms(cfg, _terms_factor(cfg, v, which), x, t, dx, dt)


def kdv_F_scaled(
    cfg: SolitonConfig,
    x: complex,
    t: float,
    dx: int = 0,
    dt: int = 0,
) -> Scaled:
    """Log-balanced KdV-form denominator 1 + gamma f1 + gamma f2 + f1 f2."""
    return _eval_terms(cfg, _terms_kdv(cfg), x, t, dx, dt)


def is_pole(cfg: SolitonConfig, x: complex, t: float, variant: Optional[Variant] = None) -> bool:
    """Pole test: |F| < POLE_TOL * max(1, |F_x| * strip_scale)."""
    F = F_scaled(cfg, x, t, variant)
    Fx = F_scaled(cfg, x, t, variant, dx=1)
    bound = math.log(POLE_TOL) + max(0.0, Fx.log_abs() + math.log(strip_scale(cfg)))
    return F.log_abs() < bound


# ---------------------------------------------------------------------------
# Public evaluators
# ---------------------------------------------------------------------------


def eval_f(cfg: SolitonConfig, j: int, x: complex, t: float) -> complex:
    """f_j(x,t) = exp(-k_j (x - x_j) + k_j^3 t) for j in {1, 2}.

    Raises OverflowError (naming the offending exponent) when the real
    exponent exceeds the representable range.
    """
    if j not in (1, 2):
        raise ValueError("soliton index j must be 1 or 2")
    k = cfg.k1 if j == 1 else cfg.k2
    xs = cfg.x1 if j == 1 else cfg.x2
    w = -k * (complex(x) - xs) + k**3 * t
    if w.real > 709.0:
        raise OverflowError(
            f"exponent {w.real:.3f} of f_{j} exceeds the representable range"
        )
    return cmath.exp(w)


def eval_g(cfg: SolitonConfig, x: complex, t: float) -> "complex | PoleMarker":
    """Angle representation g with u = 2 (arctan g)_x:

        g_plus  = -gamma (f1 + f2) / (1 - f1 f2),
        g_minus =  gamma (f1 - f2) / (1 + f1 f2).

    Returns a PoleMarker when the denominator modulus falls below tolerance
    relative to its term scale.  Note g has poles that u does not inherit.
    """
    g = cfg.gamma
    if cfg.variant is Variant.PLUS:
        num_terms: list[Term] = [(-g, 1, 0), (-g, 0, 1)]
        den_terms: list[Term] = [(1.0, 0, 0), (-1.0, 1, 1)]
    else:
        num_terms = [(g, 1, 0), (-g, 0, 1)]
        den_terms = [(1.0, 0, 0), (1.0, 1, 1)]
    num = _eval_terms(cfg, num_terms, x, t)
    den = _eval_terms(cfg, den_terms, x, t)
    if den.relative() < DENOM_TOL:
        return PoleMarker(complex(x), t, den.relative())
    return num.ratio(den)


def eval_FG(cfg: SolitonConfig, x: complex, t: float) -> tuple[complex, complex]:
    """(F, G) as plain complex numbers, u = 2 gamma G / F where F != 0.

    Internally balanced; raises OverflowError only if F or G itself is not
    representable as a double.  Use ``F_scaled``/``G_scaled`` for large |t|.
    """
    return F_scaled(cfg, x, t).value(), G_scaled(cfg, x, t).value()


def eval_u(cfg: SolitonConfig, x: complex, t: float) -> "complex | PoleMarker":
    """The two-soliton solution u = 2 gamma G / F at complex x, real t.

    Returns a PoleMarker at zeros of F (tolerance scaled by |F_x| and the
    strip scale).  Never overflows: the ratio is formed in balanced form.
    """
    F = F_scaled(cfg, x, t)
    G = G_scaled(cfg, x, t)
    Fx = F_scaled(cfg, x, t, dx=1)
    bound = math.log(POLE_TOL) + max(0.0, Fx.log_abs() + math.log(strip_scale(cfg)))
    if F.log_abs() < bound:
        return PoleMarker(complex(x), t, F.relative())
    return 2.0 * cfg.gamma * G.ratio(F)


def _sech_scaled(w: complex) -> tuple[Scaled, Scaled]:
    """(numerator, denominator) of sech(w) = 2 / (e^w + e^-w), balanced."""
    num = balanced_sum([(2.0, 0j)])
    den = balanced_sum([(1.0, w), (1.0, -w)])
    return num, den


def eval_one_soliton(k: float, x0: float, x: complex, t: float) -> "complex | PoleMarker":
    """Single negative soliton u(x,t) = -k sech(-k (x - x0) + k^3 t).

    Meromorphic in x with simple poles at x0 + k^2 t + m pi i / (2k), m odd.
    """
    if not k > 0:
        raise ValueError("wavenumber k must be positive")
    w = -k * (complex(x) - x0) + k**3 * t
    num, den = _sech_scaled(w)
    if den.relative() < DENOM_TOL:
        return PoleMarker(complex(x), t, den.relative())
    return -k * num.ratio(den)


def one_soliton_pole(k: float, x0: float, t: float, m: int) -> complex:
    """The m-th (m odd) pole x0 + k^2 t + m pi i/(2k) of the one-soliton."""
    if m % 2 == 0:
        raise ValueError("pole index m must be odd")
    return x0 + k**2 * t + 1j * m * math.pi / (2.0 * k)


def eval_u_sumform(cfg: SolitonConfig, x: complex, t: float) -> "complex | PoleMarker":
    """u via the weighted sum of one-soliton profiles:

        u_plus  = gamma (u1 + u2) / D_plus,
        u_minus = gamma (-u1 + u2) / D_minus,

    where u_j = k_j sech(-k_j (x-x_j) + k_j^3 t) and
    D = F / ((1 + f1^2)(1 + f2^2)).  An independent route from eval_u; it has
    its own (spurious) pole set where 1 + f_j^2 = 0, marked accordingly.
    """
    w1, w2 = _w_pair(cfg, x, t)
    n1, d1 = _sech_scaled(w1)
    n2, d2 = _sech_scaled(w2)
    if d1.relative() < DENOM_TOL or d2.relative() < DENOM_TOL:
        return PoleMarker(complex(x), t, min(d1.relative(), d2.relative()))
    u1 = cfg.k1 * n1.ratio(d1)
    u2 = cfg.k2 * n2.ratio(d2)
    F = F_scaled(cfg, x, t)
    prod = balanced_sum(
        [(1.0, 0j), (1.0, 2 * w1), (1.0, 2 * w2), (1.0, 2 * w1 + 2 * w2)]
    )
    # D = F / ((1+f1^2)(1+f2^2)) is dimensionless and O(1) away from poles.
    if F.relative() < DENOM_TOL:
        return PoleMarker(complex(x), t, F.relative())
    D = F.ratio(prod)
    s = 1.0 if cfg.variant is Variant.PLUS else -1.0
    if abs(D) < DENOM_TOL:
        return PoleMarker(complex(x), t, abs(D))
    return cfg.gamma * (s * u1 + u2) / D


def eval_u_x(cfg: SolitonConfig, x: complex, t: float) -> complex:
    """d/dx of u, from the closed form u_x = 2 gamma (G_x F - G F_x) / F^2."""
    F = F_scaled(cfg, x, t)
    Fx = F_scaled(cfg, x, t, dx=1)
    G = G_scaled(cfg, x, t)
    Gx = G_scaled(cfg, x, t, dx=1)
    num = Gx * F - G * Fx
    return 2.0 * cfg.gamma * num.ratio(F * F)


def eval_u_xx(cfg: SolitonConfig, x: complex, t: float) -> complex:
    """Second x-derivative of u, closed form

        u_xx = 2 gamma [ (G_xx F - G F_xx) F - 2 F_x (G_x F - G F_x) ] / F^3.
    """
    F = F_scaled(cfg, x, t)
    Fx = F_scaled(cfg, x, t, dx=1)
    Fxx = F_scaled(cfg, x, t, dx=2)
    G = G_scaled(cfg, x, t)
    Gx = G_scaled(cfg, x, t, dx=1)
    Gxx = G_scaled(cfg, x, t, dx=2)
    num = (Gxx * F - G * Fxx) * F - 2.0 * (Fx * (Gx * F - G * Fx))
    return 2.0 * cfg.gamma * num.ratio(F * F * F)


# ---------------------------------------------------------------------------
# Interaction geometry
# ---------------------------------------------------------------------------


def interaction_point(cfg: SolitonConfig) -> tuple[float, float]:
    """Interaction center/time (x0, t0) in the translated-family convention:

        t0 = -(x2 - x1)/(k2^2 - k1^2) - log(gamma) / ((k2 + k1) k1 k2),
        x0 = (k2^2 x1 - k1^2 x2)/(k2^2 - k1^2)
             - (k1^2 + k1 k2 + k2^2) log(gamma) / ((k2 + k1) k1 k2).

    Geometrically (x0, t0) is where the incoming fast ridge line
    x = k2^2 t + x2 - log(gamma)/k2 crosses the outgoing slow ridge line
    x = k1^2 t + x1 - log(gamma)/k1.  In this module's shift convention the
    config with shifts (x1 - log(gamma)/k1, x2 - log(gamma)/k2) has both
    ridge exponents vanish at (x0, t0) — its u is even in x about x0 at time
    t0.  ``symmetric_center`` gives the evenness center of *this* config.
    """
    k1, k2 = cfg.k1, cfg.k2
    lg = math.log(cfg.gamma)
    denom = (k2 + k1) * k1 * k2
    t0 = -(cfg.x2 - cfg.x1) / (k2**2 - k1**2) - lg / denom
    x0 = (k2**2 * cfg.x1 - k1**2 * cfg.x2) / (k2**2 - k1**2) - (
        k1**2 + k1 * k2 + k2**2
    ) * lg / denom
    return x0, t0


def symmetric_center(cfg: SolitonConfig) -> tuple[float, float]:
    """(x0, t0) such that u(cfg) is even about x0 at time t0.

    In this module's shift convention these carry no log(gamma) offset:
    x0 = (k2^2 x1 - k1^2 x2)/(k2^2 - k1^2), t0 = -(x2 - x1)/(k2^2 - k1^2);
    zero shifts give the normalized interaction at the origin.
    """
    k1, k2 = cfg.k1, cfg.k2
    t0 = -(cfg.x2 - cfg.x1) / (k2**2 - k1**2)
    x0 = (k2**2 * cfg.x1 - k1**2 * cfg.x2) / (k2**2 - k1**2)
    return x0, t0


# ---------------------------------------------------------------------------
# Residual diagnostics
# ---------------------------------------------------------------------------

# Closed-form x/t derivatives of the angle representation g = N_g / D,
# D = 1 + s f1 f2 (s = +1 Minus; the Plus tables follow from f1 -> -f1).
# Each table lists (coeff(k1,k2), a1, a2) for the numerator over D^n.


def _g_tables_mp(cfg: SolitonConfig):
    """Derivative numerator tables with coefficients in mpmath precision.

    Built at the caller's working precision so that gamma = (k2+k1)/(k2-k1)
    and the k-polynomials are consistent with the float wavenumbers to the
    working precision (the identity below holds exactly for any real pair).
    """
    import mpmath as mp

    k1, k2 = mp.mpf(cfg.k1), mp.mpf(cfg.k2)
    g = (k2 + k1) / (k2 - k1)
    c2 = k1**2 + 4 * k1 * k2 + k2**2
    c3a = k1**3 + 4 * k2**3 + 6 * k1**2 * k2 + 12 * k1 * k2**2
    c3b = 4 * k1**3 + k2**3 + 6 * k1 * k2**2 + 12 * k1**2 * k2
    tables = {
        # g = N_g / D
        "g": [(g, 1, 0), (-g, 0, 1)],
        # g_t = N_t / D^2
        "gt": [
            (g * k1**3, 1, 0),
            (-g * k2**3, 0, 1),
            (g * k1**3, 1, 2),
            (-g * k2**3, 2, 1),
        ],
        # g_x = N_x / D^2
        "gx": [
            (-g * k1, 1, 0),
            (g * k2, 0, 1),
            (-g * k1, 1, 2),
            (g * k2, 2, 1),
        ],
        # g_xx = N_xx / D^3
        "gxx": [
            (g * k1**2, 1, 0),
            (-g * k2**2, 0, 1),
            (g * c2, 1, 2),
            (-g * c2, 2, 1),
            (-g * k1**2, 2, 3),
            (g * k2**2, 3, 2),
        ],
        # g_xxx = N_xxx / D^4
        "gxxx": [
            (-g * k1**3, 1, 0),
            (g * k2**3, 0, 1),
            (-g * c3a, 1, 2),
            (-g * c3a, 3, 2),
            (g * c3b, 2, 1),
            (g * c3b, 2, 3),
            (-g * k1**3, 3, 4),
            (g * k2**3, 4, 3),
        ],
    }
    if cfg.variant is Variant.PLUS:
        tables = {
            name: [(c * (-1) ** a1, a1, a2) for (c, a1, a2) in terms]
            for name, terms in tables.items()
        }
        den = [(mp.mpf(1), 0, 0), (mp.mpf(-1), 1, 1)]
    else:
        den = [(mp.mpf(1), 0, 0), (mp.mpf(1), 1, 1)]
    return tables, den


# Clearing the equation of denominators bounds the monomial degrees at
# (6, 5) in (f1, f2); used to size the working precision below.
_EQG_MAX_DEG = (6, 5)


def eqg_residual(cfg: SolitonConfig, x: complex, t: float) -> complex:
    """Relative residual of the governing equation for g,

        (1 + g^2)(g_t + g_xxx) + 6 g_x (g_x^2 - g g_xx) = 0,

    evaluated from the exact closed-form derivative numerators and
    normalized by the magnitude of the largest of the two composite terms.

    Multiplying by D^6 (D the denominator of g) turns both terms into
    polynomials in f1, f2 whose exact cancellation spans the full
    exponential range of the monomials — at large |t| that range exceeds
    double precision, so the evaluation runs in mpmath at a precision sized
    from the exponent spread.  Correct derivative tables give residuals at
    the working-precision floor (far below 1e-10); a wrong coefficient
    anywhere shows up at its monomial's relative scale.

    Raises PoleError at poles of g (denominator below tolerance).
    """
    import mpmath as mp

    # Pole pre-check in fast double-precision balanced arithmetic.
    s = -1.0 if cfg.variant is Variant.PLUS else 1.0
    D_dbl = _eval_terms(cfg, [(1.0, 0, 0), (s, 1, 1)], x, t)
    if D_dbl.relative() < DENOM_TOL:
        raise PoleError(
            f"angle representation has a pole near x={complex(x)}, t={t}; "
            "choose a different sample point"
        )
    w1, w2 = _w_pair(cfg, x, t)
    d1, d2 = _EQG_MAX_DEG
    corners = (0.0, d1 * w1.real, d2 * w2.real, d1 * w1.real + d2 * w2.real)
    spread = max(corners) - min(corners)
    digits = 35 + int(spread / math.log(10.0))
    if digits > 10000:
        raise ValueError(
            f"sample point needs {digits} digits to certify; move x or t "
            "closer to the interaction region"
        )
    with mp.workdps(digits):
        tables, den_terms = _g_tables_mp(cfg)
        F1 = mp.exp(mp.mpc(w1))
        F2 = mp.exp(mp.mpc(w2))

        def poly(terms) -> "mp.mpc":
            return sum(c * F1**a1 * F2**a2 for c, a1, a2 in terms)

        D = poly(den_terms)
        Ng = poly(tables["g"])
        Nt = poly(tables["gt"])
        Nx = poly(tables["gx"])
        Nxx = poly(tables["gxx"])
        Nxxx = poly(tables["gxxx"])
        D2 = D * D
        term1 = (D2 + Ng * Ng) * (Nt * D2 + Nxxx)
        term2 = 6 * (Nx * (Nx * Nx - Ng * Nxx))
        scale = max(abs(term1), abs(term2))
        if scale == 0:
            return 0j
        return complex((term1 + term2) / scale)


def pde_residual(cfg: SolitonConfig, x: complex, t: float, h: float) -> complex:
    """Finite-difference residual of u_t + 6 u^2 u_x + u_xxx at (x, t).

    Second-order stencils: half-grid offsets x ± h/2, x ± 3h/2 for the space
    derivatives and t ± h for the time derivative, so the residual scales as
    O(h^2) (Richardson halving divides it by ~4).  Raises PoleError if any
    stencil point sits on a pole.
    """
    if not h > 0:
        raise ValueError("step h must be positive")

    def u_at(xx: complex, tt: float) -> complex:
        val = eval_u(cfg, xx, tt)
        if isinstance(val, PoleMarker):
            raise PoleError(
                f"finite-difference stencil touches a pole near x={xx}, t={tt}"
            )
        return val

    um3 = u_at(x - 1.5 * h, t)
    um1 = u_at(x - 0.5 * h, t)
    up1 = u_at(x + 0.5 * h, t)
    up3 = u_at(x + 1.5 * h, t)
    u0 = u_at(x, t)
    ut = (u_at(x, t + h) - u_at(x, t - h)) / (2.0 * h)
    ux = (up1 - um1) / h
    uxxx = (up3 - 3.0 * up1 + 3.0 * um1 - um3) / h**3
    return ut + 6.0 * u0**2 * ux + uxxx
