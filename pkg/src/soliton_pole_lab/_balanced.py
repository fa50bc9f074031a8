"""Log-balanced arithmetic for finite sums of complex exponentials.

Every quantity this package evaluates is a finite sum  sum_i c_i * exp(w_i)
with complex coefficients c_i and complex exponents w_i whose real parts can
reach several hundred (far beyond float range once combined).  A ``Scaled``
value carries the common exponential factor separately::

    value = mant * exp(log)

so that sums, products and ratios stay inside double precision regardless of
the raw magnitudes involved.  ``norm`` tracks the balanced 1-norm of the term
list that produced the value, which makes ``relative()`` a dimensionless
backward-error measure: it is ~1 away from zeros and ~0 on top of one.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable

__all__ = ["Scaled", "balanced_sum"]

# exp() overflows just above this; used to detect unrepresentable unscaling.
_LOG_HUGE = math.log(1.7976931348623157e308)


@dataclass(frozen=True)
class Scaled:
    """A complex number stored as ``mant * exp(log)`` with a term-scale norm."""

    mant: complex
    log: float
    norm: float = 0.0

    def value(self) -> complex:
        """Return the plain complex value; raise OverflowError when it cannot
        be represented as a float pair (the message names the exponent)."""
        if self.mant == 0:
            return 0j
        total = self.log + math.log(abs(self.mant))
        if total > _LOG_HUGE:
            raise OverflowError(
                f"exponent {total:.3f} exceeds the representable range "
                f"(limit {_LOG_HUGE:.3f})"
            )
        return self.mant * math.exp(self.log)

    def log_abs(self) -> float:
        """log|value|; -inf for an exact zero."""
        if self.mant == 0:
            return -math.inf
        return self.log + math.log(abs(self.mant))

    def relative(self) -> float:
        """|value| divided by the balanced 1-norm of the generating terms."""
        if self.norm == 0.0:
            return abs(self.mant)
        return abs(self.mant) / self.norm

    def __mul__(self, other: "Scaled | complex | float") -> "Scaled":
        if isinstance(other, Scaled):
            return Scaled(
                self.mant * other.mant,
                self.log + other.log,
                self.norm * other.norm,
            )
        return Scaled(self.mant * other, self.log, self.norm * abs(other))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Scaled":
        return Scaled(self.mant**n, self.log * n, self.norm**n)

    def __add__(self, other: "Scaled") -> "Scaled":
        a, b = self, other
        if a.mant == 0:
            base = b.log
        elif b.mant == 0:
            base = a.log
        else:
            base = max(a.log, b.log)
        sa = math.exp(min(a.log - base, 0.0)) if a.mant != 0 else 0.0
        sb = math.exp(min(b.log - base, 0.0)) if b.mant != 0 else 0.0
        return Scaled(a.mant * sa + b.mant * sb, base, a.norm * sa + b.norm * sb)

    def __truediv__(self, other: "Scaled") -> "Scaled":
        """self / other kept in scaled form (norm reset to the quotient
        magnitude, i.e. relative() of a quotient is neutral)."""
        if other.mant == 0:
            raise ZeroDivisionError("scaled division by zero mantissa")
        q = self.mant / other.mant
        return Scaled(q, self.log - other.log, abs(q))

    def __neg__(self) -> "Scaled":
        return Scaled(-self.mant, self.log, self.norm)

    def __sub__(self, other: "Scaled") -> "Scaled":
        return self + (-other)

    def ratio(self, other: "Scaled") -> complex:
        """self / other as a plain complex; raises OverflowError if the
        magnitude difference itself exceeds float range."""
        if other.mant == 0:
            raise ZeroDivisionError("scaled division by zero mantissa")
        q = self.mant / other.mant
        if q == 0:
            return 0j
        dlog = self.log - other.log
        total = dlog + math.log(abs(q))
        if total > _LOG_HUGE:
            raise OverflowError(
                f"exponent {total:.3f} exceeds the representable range in ratio"
            )
        if total < -745.0:  # graceful underflow to zero
            return 0j
        return q * math.exp(dlog)


def balanced_sum(terms: Iterable[tuple[complex, complex]]) -> Scaled:
    """Sum ``c * exp(w)`` over (c, w) pairs with the largest Re w factored out.

    Terms whose real exponent falls more than ~745 below the maximum underflow
    harmlessly to zero inside the mantissa.
    """
    terms = list(terms)
    terms = [(c, w) for (c, w) in terms if c != 0]
    if not terms:
        return Scaled(0j, 0.0, 0.0)
    base = max(w.real for _, w in terms)
    mant = 0j
    norm = 0.0
    for c, w in terms:
        piece = c * cmath.exp(w - base)
        mant += piece
        norm += abs(piece)
    return Scaled(mant, base, norm)
