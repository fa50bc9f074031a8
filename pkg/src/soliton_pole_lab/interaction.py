"""Diagnostics of the two-soliton field at the interaction point.

With zero shifts the interaction is centered at the origin, and the
field's local shape there is governed by closed forms in (k1, k2):

    plus variant:   u_xx(0,0) = -(k2 - k1) (k1^2 - 3 k1 k2 + k2^2),
    minus variant:  u_xx(0,0) = -(k2 + k1) (k1^2 + 3 k1 k2 + k2^2).

The minus value is negative for all 0 < k1 < k2 (a centered local
maximum), while the plus value changes sign at k2/k1 = (3 + sqrt 5)/2:
below that ratio the center is a local minimum flanked by two
symmetric maxima, above it the maxima have merged into one centered
peak.  Tracking the extremum path y(t) through the interaction and
differentiating u_x(y(t), t) = 0 gives the extremum speed

    y'(0) = -u_xt(0,0) / u_xx(0,0),

again in closed form: a reciprocal quartic over the quadratic whose
root is the same critical ratio (the plus speed is singular exactly
where the centered extremum degenerates).  Everything here is measured
twice -- closed form and centered finite differences of the field,
with optional Richardson extrapolation -- and local maxima of u(., 0)
are counted by sign changes of a centered first difference, refined by
Newton iteration on the closed-form u_x.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

from .kernel import (
    SolitonConfig,
    Variant,
    eval_u,
    eval_u_x,
    eval_u_xx,
    strip_scale,
)

__all__ = [
    "uxx_at_center",
    "extremum_speed",
    "measure_extremum_speed",
    "measure_uxx_at_center",
    "find_maxima",
    "count_maxima_at_interaction",
    "maxima_transition_ratio",
    "negative_speed_onset",
    "sweep_rows",
    "SWEEP_HEADER",
]

# The plus-variant quadratic k1^2 - 3 k1 k2 + k2^2 vanishes at
# k2/k1 = (3 + sqrt 5)/2; below this relative size the quadratic is
# treated as singular for the speed formula.
SINGULAR_RTOL = 1e-12

CRITICAL_RATIO = (3.0 + math.sqrt(5.0)) / 2.0


def _resolve(cfg: SolitonConfig, variant: Optional[Variant]) -> SolitonConfig:
    work = cfg if variant is None else cfg.with_variant(variant)
    if work.x1 != 0.0 or work.x2 != 0.0:
        raise ValueError(
            "interaction diagnostics require zero shifts "
            f"(got x1={work.x1}, x2={work.x2})"
        )
    return work


# ---------------------------------------------------------------------------
# Closed forms at the origin.
# ---------------------------------------------------------------------------


def uxx_at_center(cfg: SolitonConfig, variant: Optional[Variant] = None) -> float:
    """Closed-form u_xx(0,0); its sign classifies the centered extremum.

    Plus: -(k2 - k1)(k1^2 - 3 k1 k2 + k2^2), positive (local minimum)
    for 1 < k2/k1 < (3 + sqrt 5)/2 and negative above.  Minus:
    -(k2 + k1)(k1^2 + 3 k1 k2 + k2^2), negative for all k1 < k2.
    """
    work = _resolve(cfg, variant)
    k1, k2 = work.k1, work.k2
    if work.variant is Variant.PLUS:
        return -(k2 - k1) * (k1 * k1 - 3.0 * k1 * k2 + k2 * k2)
    return -(k2 + k1) * (k1 * k1 + 3.0 * k1 * k2 + k2 * k2)


def extremum_speed(cfg: SolitonConfig, variant: Optional[Variant] = None) -> float:
    """Closed-form speed y'(0) of the centered extremum path.

    Plus: (k1^4 - 3 k1^3 k2 + 3 k1^2 k2^2 - 3 k1 k2^3 + k2^4)
          / (k1^2 - 3 k1 k2 + k2^2), singular at k2/k1 = (3+sqrt 5)/2,
    and negative for ratios between ~2.1537 (the quartic's root) and
    the singular ratio.  Minus: the same with all plus signs, always
    positive.
    """
    work = _resolve(cfg, variant)
    k1, k2 = work.k1, work.k2
    if work.variant is Variant.PLUS:
        num = (
            k1**4
            - 3.0 * k1**3 * k2
            + 3.0 * k1**2 * k2**2
            - 3.0 * k1 * k2**3
            + k2**4
        )
        den = k1 * k1 - 3.0 * k1 * k2 + k2 * k2
        if abs(den) < SINGULAR_RTOL * k2 * k2:
            raise ValueError(
                "extremum speed is singular: k1^2 - 3 k1 k2 + k2^2 = 0 "
                f"at k2/k1 = (3 + sqrt 5)/2 (got k2/k1 = {k2 / k1})"
            )
        return num / den
    num = (
        k1**4
        + 3.0 * k1**3 * k2
        + 3.0 * k1**2 * k2**2
        + 3.0 * k1 * k2**3
        + k2**4
    )
    return num / (k1 * k1 + 3.0 * k1 * k2 + k2 * k2)


# ---------------------------------------------------------------------------
# Finite-difference measurements.
# ---------------------------------------------------------------------------


def _u_real(cfg: SolitonConfig, x: float, t: float) -> float:
    # On the real line (real x, real t) the field is real: both
    # exponentials are positive reals.
    return eval_u(cfg, complex(x, 0.0), t).real


def _fd_uxx(cfg: SolitonConfig, h: float) -> float:
    u = _u_real
    return (u(cfg, h, 0.0) - 2.0 * u(cfg, 0.0, 0.0) + u(cfg, -h, 0.0)) / (h * h)


def _fd_uxt(cfg: SolitonConfig, h: float) -> float:
    u = _u_real
    return (
        u(cfg, h, h) - u(cfg, h, -h) - u(cfg, -h, h) + u(cfg, -h, -h)
    ) / (4.0 * h * h)


def measure_uxx_at_center(
    cfg: SolitonConfig,
    variant: Optional[Variant] = None,
    h: float = 1e-3,
    richardson: bool = True,
) -> float:
    """u_xx(0,0) by centered second differences of the field.

    O(h^2) truncation; with richardson the h and h/2 estimates are
    combined to O(h^4).  Independent of the closed form (it samples
    eval_u only).
    """
    work = _resolve(cfg, variant)
    d_h = _fd_uxx(work, h)
    if not richardson:
        return d_h
    return (4.0 * _fd_uxx(work, 0.5 * h) - d_h) / 3.0


def measure_extremum_speed(
    cfg: SolitonConfig,
    variant: Optional[Variant] = None,
    h: float = 1e-4,
    richardson: bool = True,
) -> float:
    """y'(0) = -u_xt(0,0)/u_xx(0,0) by finite differences of the field.

    Both derivatives are centered O(h^2) stencils on eval_u; with
    richardson the h and h/2 speed estimates combine to O(h^4).
    Raises ValueError when the measured second derivative vanishes
    (the degenerate plus configuration).
    """
    work = _resolve(cfg, variant)

    def estimate(step: float) -> float:
        uxx = _fd_uxx(work, step)
        uxt = _fd_uxt(work, step)
        if abs(uxx) < 1e-8 * max(1.0, abs(uxt)):
            raise ValueError(
                "second x-derivative vanishes at the origin; the "
                "extremum speed is undefined there"
            )
        return -uxt / uxx

    d_h = estimate(h)
    if not richardson:
        return d_h
    return (4.0 * estimate(0.5 * h) - d_h) / 3.0


# ---------------------------------------------------------------------------
# Maxima counting at t = 0.
# ---------------------------------------------------------------------------


def _polish_max(cfg: SolitonConfig, lo: float, hi: float) -> float:
    """Root of u_x in a bracket where u_x goes + -> -.

    Newton iteration on the closed-form u_x, guarded by the bracket:
    any step leaving it falls back to bisection, so a maximum is
    refined even when the critical points have nearly merged and the
    Newton basins interleave.
    """
    x = 0.5 * (lo + hi)
    for _ in range(200):
        ux = eval_u_x(cfg, complex(x, 0.0), 0.0).real
        if ux > 0.0:
            lo = x
        elif ux < 0.0:
            hi = x
        else:
            return x
        uxx = eval_u_xx(cfg, complex(x, 0.0), 0.0).real
        x_new = x - ux / uxx if uxx != 0.0 else 0.5 * (lo + hi)
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if hi - lo < 1e-14 * max(1.0, abs(x)):
            return 0.5 * (lo + hi)
        x = x_new
    return 0.5 * (lo + hi)


def find_maxima(
    cfg: SolitonConfig,
    variant: Optional[Variant] = None,
    span: Optional[float] = None,
) -> list[float]:
    """Abscissas of the local maxima of u(., 0), sorted.

    A centered first difference with spacing strip_scale/200 flags the
    windows holding critical points; inside each window the closed-form
    u_x is sign-scanned on a fine sub-grid, and every + -> - bracket
    (a maximum by continuity, no curvature test needed) is polished by
    bracket-guarded Newton iteration on u_x.  The fine scan separates
    maxima that the coarse grid would merge: near the critical ratio
    the two side maxima approach the center like the square root of
    the parameter distance.
    """
    work = _resolve(cfg, variant)
    h = strip_scale(work) / 200.0
    half = span if span is not None else 12.0 / work.k1
    n = int(2.0 * half / h) + 2
    xs = [-half + 2.0 * half * i / (n - 1) for i in range(n)]
    us = [_u_real(work, x, 0.0) for x in xs]
    diffs = [us[i + 1] - us[i - 1] for i in range(1, n - 1)]

    windows: list[float] = []
    for i in range(len(diffs) - 1):
        if diffs[i] == 0.0 or (diffs[i] > 0.0) != (diffs[i + 1] > 0.0):
            center = 0.5 * (xs[i + 1] + xs[i + 2])
            if not windows or center - windows[-1] > 0.5 * h:
                windows.append(center)

    maxima: list[float] = []
    m = 601
    for center in windows:
        fine = [center - 1.5 * h + 3.0 * h * j / (m - 1) for j in range(m)]
        vals = [eval_u_x(work, complex(x, 0.0), 0.0).real for x in fine]
        for j in range(m - 1):
            if vals[j] > 0.0 >= vals[j + 1]:
                maxima.append(_polish_max(work, fine[j], fine[j + 1]))

    maxima.sort()
    out: list[float] = []
    for x in maxima:
        if not out or abs(x - out[-1]) > 1e-9 * max(1.0, abs(x)):
            out.append(x)
    return out


def count_maxima_at_interaction(
    cfg: SolitonConfig,
    variant: Optional[Variant] = None,
    span: Optional[float] = None,
) -> int:
    """Number of local maxima of u(., 0) on the real line.

    Plus variant: 2 below the critical ratio (3 + sqrt 5)/2, 1 above;
    minus variant: always 1.
    """
    return len(find_maxima(cfg, variant, span))


def maxima_transition_ratio(
    k1: float = 1.0,
    lo: float = 2.55,
    hi: float = 2.70,
    tol: float = 1e-4,
) -> tuple[float, float]:
    """Bisection bracket [lo, hi] for the plus-variant maxima merge.

    Requires count(lo) == 2 and count(hi) == 1; returns the final
    bracket, which contains the critical ratio (3 + sqrt 5)/2.
    """

    def count(ratio: float) -> int:
        return count_maxima_at_interaction(
            SolitonConfig.make(k1, ratio * k1, Variant.PLUS)
        )

    if count(lo) != 2 or count(hi) != 1:
        raise ValueError(
            f"bracket [{lo}, {hi}] does not straddle the maxima merge"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if count(mid) == 2:
            lo = mid
        else:
            hi = mid
    return lo, hi


def negative_speed_onset(
    k1: float = 1.0,
    lo: float = 2.0,
    hi: float = 2.5,
    tol: float = 1e-10,
) -> float:
    """Ratio where the plus-variant extremum speed turns negative.

    Bisection on the sign of the closed-form speed; the onset is the
    quartic root near 2.1537 (reported as a measurement -- the speed
    stays negative from here up to the singular ratio).
    """

    def speed(ratio: float) -> float:
        return extremum_speed(SolitonConfig.make(k1, ratio * k1, Variant.PLUS))

    s_lo, s_hi = speed(lo), speed(hi)
    if not (s_lo > 0.0 > s_hi):
        raise ValueError(
            f"bracket [{lo}, {hi}] does not straddle the sign change "
            f"(speeds {s_lo:.6f}, {s_hi:.6f})"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if speed(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Parameter sweeps.
# ---------------------------------------------------------------------------

SWEEP_HEADER = (
    "ratio",
    "maxima",
    "uxx_center",
    "speed_closed_form",
    "speed_measured",
)


def sweep_rows(
    ratios: Sequence[float],
    k1: float = 1.0,
    variant: Variant = Variant.PLUS,
) -> list[tuple[float, int, float, float, float]]:
    """Rows (ratio, maxima, uxx, closed speed, measured speed) for CSV.

    The closed-form speed is NaN at (near-)singular ratios; the
    measured speed is NaN when the finite-difference second derivative
    vanishes.
    """
    rows = []
    for ratio in ratios:
        cfg = SolitonConfig.make(k1, ratio * k1, variant)
        count = count_maxima_at_interaction(cfg)
        uxx = uxx_at_center(cfg)
        try:
            closed = extremum_speed(cfg)
        except ValueError:
            closed = math.nan
        try:
            measured = measure_extremum_speed(cfg)
        except ValueError:
            measured = math.nan
        rows.append((ratio, count, uxx, closed, measured))
    return rows
