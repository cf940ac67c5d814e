"""Vectorised double-double arithmetic.

A double-double is an unevaluated sum ``hi + lo`` of two float64 values with
``|lo| <= ulp(hi) / 2``, giving roughly 106 bits (about 32 decimal digits) of
precision. Only the operations needed for circle-rotation orbits are provided:
error-free sums and products, addition, and reduction modulo one.

All functions accept numpy arrays or Python floats.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

import mpmath
import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1

#: unit roundoff of the double-double format
DD_EPS = 2.0 ** -104


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def quick_two_sum(a, b):
    # requires |a| >= |b|
    s = a + b
    err = b - (s - a)
    return s, err


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def two_prod(a, b):
    """Return ``(p, e)`` with ``p = fl(a*b)`` and ``p + e == a*b`` exactly."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    e = e + t
    s, e = quick_two_sum(s, e)
    e = e + f
    return quick_two_sum(s, e)


def dd_sub(ah, al, bh, bl):
    return dd_add(ah, al, -bh, -bl)


class DD(NamedTuple):
    """A scalar double-double constant."""

    hi: float
    lo: float = 0.0

    @classmethod
    def from_mpf(cls, value) -> "DD":
        hi = float(value)
        lo = float(value - mpmath.mpf(hi))
        hi, lo = quick_two_sum(hi, lo)
        return cls(float(hi), float(lo))

    @classmethod
    def from_fraction(cls, value: Fraction) -> "DD":
        with mpmath.workprec(256):
            return cls.from_mpf(mpmath.mpf(value.numerator) / value.denominator)

    @classmethod
    def from_string(cls, text: str) -> "DD":
        """Parse a decimal literal or ``p/q`` fraction to double-double."""
        text = text.strip()
        if "/" in text:
            return cls.from_fraction(Fraction(text))
        with mpmath.workprec(256):
            return cls.from_mpf(mpmath.mpf(text))

    def to_fraction(self) -> Fraction:
        return Fraction(self.hi) + Fraction(self.lo)

    def __float__(self) -> float:
        return self.hi + self.lo


def frac_affine(n: np.ndarray, alpha: DD, x0: DD):
    """Fractional part of ``x0 + n*alpha`` as a double-double array pair.

    ``n`` must be an integer array with ``|n| < 2**53`` so that it converts to
    float64 exactly. The returned ``hi`` lies in ``[0, 1)``. The absolute error
    is bounded by :func:`affine_error_bound`.
    """
    nf = np.asarray(n, dtype=np.float64)
    p, e = two_prod(nf, alpha.hi)
    p2 = nf * alpha.lo
    pf = p - np.floor(p)  # exact for float64
    hi, lo = dd_add(pf, e, x0.hi, x0.lo)
    hi, lo = dd_add(hi, lo, p2, 0.0)
    f = np.floor(hi)
    hi, lo = quick_two_sum(hi - f, lo)
    # one correction step brings the value back into [0, 1)
    neg = (hi < 0.0) | ((hi == 0.0) & (lo < 0.0))
    big = hi >= 1.0
    if np.any(neg):
        h2, l2 = dd_add(hi, lo, 1.0, 0.0)
        hi = np.where(neg, h2, hi)
        lo = np.where(neg, l2, lo)
    if np.any(big):
        h2, l2 = dd_add(hi, lo, -1.0, 0.0)
        hi = np.where(big, h2, hi)
        lo = np.where(big, l2, lo)
    return hi, lo


def affine_error_bound(n: np.ndarray, alpha: DD) -> np.ndarray:
    """Upper bound on the absolute error of :func:`frac_affine` per element.

    The only rounded steps are ``n * alpha.lo`` and two double-double
    additions; the bound is deliberately generous (factor 4).
    """
    nf = np.abs(np.asarray(n, dtype=np.float64))
    return 4.0 * (nf * abs(alpha.lo) * 2.0 ** -52 + 8.0 * DD_EPS)


def dd_sign(hi, lo):
    return np.where(hi != 0.0, np.sign(hi), np.sign(lo))


def dd_circular_distance(hi, lo, point: DD):
    """Distance on the circle R/Z between ``hi + lo`` (in [0,1)) and ``point``."""
    best = None
    for shift in (-1.0, 0.0, 1.0):
        dh, dl = dd_sub(hi, lo, point.hi + shift, point.lo)
        d = np.abs(dh + dl)
        best = d if best is None else np.minimum(best, d)
    return best


def exact_frac_times(k: np.ndarray, x: float) -> np.ndarray:
    """``frac(k * x)`` for integer ``k`` (|k| < 2**53) and float ``x``.

    The product is formed error-free, so the phase error stays at one ulp
    regardless of how large ``k`` is.
    """
    kf = np.asarray(k, dtype=np.float64)
    p, e = two_prod(kf, float(x))
    out = (p - np.floor(p)) + e
    return out - np.floor(out)
