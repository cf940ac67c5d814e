"""Infinite structured subsets of the integers, materialised per window.

Every :class:`LazySet` can restrict itself to a finite window (returning an
exact :class:`~densitylab.sets.WindowSet`) and can stream its maximal runs in
increasing order. Complements are deliberately not offered here: they only
make sense relative to a window, see :mod:`densitylab.expr`.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from fractions import Fraction
from math import ceil
from typing import Iterable, Iterator

import numpy as np

from .ddouble import DD, affine_error_bound, dd_circular_distance, dd_sign, dd_sub, frac_affine
from .errors import PrecisionError, RangeError
from .sets import Interval, WindowSet, _merge_sorted, as_window, clip_arrays

#: guard band around arc endpoints for rotation membership
GUARD_BAND = 1e-20

_ROT_CHUNK = 1 << 20
_EMPTY = np.zeros(0, dtype=np.int64)


class LazySet(ABC):
    """A rule that produces the members of an infinite set window by window."""

    #: smallest possible member, ``None`` when the set is unbounded below
    lower_bound: int | None = None
    #: one past the largest member, ``None`` when unbounded above
    upper_bound: int | None = None

    @abstractmethod
    def _arrays(self, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
        """Canonical ``(starts, ends)`` of the members inside ``[lo, hi)``."""

    @abstractmethod
    def spec(self) -> str:
        """Textual spec understood by :func:`densitylab.constructions.parse_set`."""

    def restrict(self, window) -> WindowSet:
        window = as_window(window)
        return WindowSet.from_arrays(window, *self._arrays(window.lo, window.hi))

    def __contains__(self, n) -> bool:
        n = int(n)
        s, _ = self._arrays(n, n + 1)
        return len(s) > 0

    def intervals(self, start: int | None = None, chunk: int = 1 << 16) -> Iterator[Interval]:
        """Maximal runs meeting ``[start, inf)`` in increasing order (clipped at ``start``)."""
        if start is None:
            if self.lower_bound is None:
                raise ValueError("set is unbounded below; pass an explicit start")
            start = self.lower_bound
        pending = None
        lo = start
        while self.upper_bound is None or lo < self.upper_bound:
            hi = lo + chunk
            if self.upper_bound is not None:
                hi = min(hi, self.upper_bound)
            s, e = self._arrays(lo, hi)
            for a, b in zip(s.tolist(), e.tolist()):
                if pending is not None and pending[1] == a:
                    pending = (pending[0], b)
                    continue
                if pending is not None:
                    yield Interval(*pending)
                pending = (a, b)
            lo = hi
            chunk = min(chunk * 2, 1 << 24)
        if pending is not None:
            yield Interval(*pending)

    def __repr__(self):
        return f"{type(self).__name__}({self.spec()!r})"

    def __eq__(self, other):
        return type(self) is type(other) and self.spec() == other.spec()

    def __hash__(self):
        return hash((type(self).__name__, self.spec()))


class HindmanBlocks(LazySet):
    """Union of blocks ``[ceil(lam * 2 * 4**n), 2 * 4**n)`` for ``n >= 0``.

    With ``lam = 1 - 3*b/4`` each block ends on a dyadic window end ``2**(2n+1)``
    and the density on those windows tends to ``b``. The default ``b = 2/3``
    gives Hindman's set ``[4**n, 2 * 4**n)``.
    """

    lower_bound = 0

    def __init__(self, block_density=Fraction(2, 3)):
        b = Fraction(block_density)
        if not 0 < b < 1:
            raise ValueError(f"block density must lie in (0, 1), got {b}")
        self.block_density = b
        self.lam = 1 - Fraction(3, 4) * b

    def block(self, n: int) -> tuple[int, int]:
        end = 2 * 4 ** n
        return ceil(self.lam * end), end

    def _arrays(self, lo, hi):
        s, e = [], []
        n = 0
        while True:
            a, b = self.block(n)
            if a >= hi:
                break
            if b > lo and a < b:
                s.append(max(a, lo))
                e.append(min(b, hi))
            n += 1
        return np.array(s, dtype=np.int64), np.array(e, dtype=np.int64)

    def spec(self):
        if self.block_density == Fraction(2, 3):
            return "hindman"
        return f"blocks b={self.block_density}"


class Periodic(LazySet):
    """``{n in Z : n mod modulus in residues}``."""

    def __init__(self, modulus: int, residues: Iterable[int]):
        modulus = int(modulus)
        if modulus <= 0:
            raise ValueError("modulus must be positive")
        res = sorted({int(r) % modulus for r in residues})
        self.modulus = modulus
        self.residues = tuple(res)
        self._runs = self._period_runs()

    def _period_runs(self):
        m, res = self.modulus, self.residues
        if not res or len(res) == m:
            return None
        runs = []
        for r in res:
            if runs and runs[-1][1] == r:
                runs[-1][1] = r + 1
            else:
                runs.append([r, r + 1])
        if len(runs) > 1 and runs[0][0] == 0 and runs[-1][1] == m:
            # the run through m-1 continues into the next period
            first = runs.pop(0)
            runs[-1][1] = m + first[1]
        return np.array(runs, dtype=np.int64)

    def _arrays(self, lo, hi):
        m = self.modulus
        if not self.residues:
            return _EMPTY, _EMPTY
        if len(self.residues) == m:
            return np.array([lo], dtype=np.int64), np.array([hi], dtype=np.int64)
        k0 = lo // m - 1
        k1 = hi // m + 1
        base = np.arange(k0, k1 + 1, dtype=np.int64) * m
        s = (base[:, None] + self._runs[:, 0][None, :]).ravel()
        e = (base[:, None] + self._runs[:, 1][None, :]).ravel()
        return clip_arrays(s, e, lo, hi)

    def spec(self):
        return f"periodic m={self.modulus} r={','.join(map(str, self.residues))}"


class BeattyRotation(LazySet):
    """Return times ``{n >= 0 : frac(x0 + n*alpha) in [arc_lo, arc_hi)}``.

    The orbit is computed in double-double arithmetic. If a point lands within
    the guard band of an arc endpoint the membership is undecidable at this
    precision and :class:`~densitylab.errors.PrecisionError` is raised.
    """

    lower_bound = 0

    def __init__(self, alpha: DD, arc_lo: DD, arc_hi: DD, x0: DD = DD(0.0), name=None):
        self.alpha, self.arc_lo, self.arc_hi, self.x0 = DD(*alpha), DD(*arc_lo), DD(*arc_hi), DD(*x0)
        a = self.alpha.to_fraction()
        u, v = self.arc_lo.to_fraction(), self.arc_hi.to_fraction()
        if not 0 < a < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0 <= u < v <= 1:
            raise ValueError("arc must satisfy 0 <= u < v <= 1")
        if not 0 <= self.x0.to_fraction() < 1:
            raise ValueError("x0 must lie in [0, 1)")
        self.full_arc = (v - u) == 1
        self._name = name

    def orbit(self, n: np.ndarray):
        """Double-double ``frac(x0 + n*alpha)`` for an integer array."""
        return frac_affine(n, self.alpha, self.x0)

    def _chunk_mask(self, lo, hi):
        n = np.arange(lo, hi, dtype=np.int64)
        vh, vl = self.orbit(n)
        ge_u = dd_sign(*dd_sub(vh, vl, self.arc_lo.hi, self.arc_lo.lo)) >= 0
        lt_v = dd_sign(*dd_sub(vh, vl, self.arc_hi.hi, self.arc_hi.lo)) < 0
        dist = np.minimum(dd_circular_distance(vh, vl, self.arc_lo),
                          dd_circular_distance(vh, vl, self.arc_hi))
        tol = np.maximum(GUARD_BAND, affine_error_bound(n, self.alpha))
        tol = np.where(n == 0, 0.0, tol)  # n = 0 involves no rounding
        bad = dist < tol
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise PrecisionError(
                f"orbit point n={int(n[i])} lies within {float(tol[i]):.3g} of an arc endpoint",
                index=int(n[i]), distance=float(dist[i]))
        return ge_u & lt_v

    def _arrays(self, lo, hi):
        lo = max(lo, 0)
        if hi <= lo:
            return _EMPTY, _EMPTY
        if hi > 2 ** 53:
            raise RangeError("rotation orbits are supported for n < 2**53 only")
        if self.full_arc:
            return np.array([lo], dtype=np.int64), np.array([hi], dtype=np.int64)
        ss, es = [], []
        for a in range(lo, hi, _ROT_CHUNK):
            b = min(a + _ROT_CHUNK, hi)
            mask = self._chunk_mask(a, b)
            d = np.diff(mask.astype(np.int8), prepend=np.int8(0), append=np.int8(0))
            ss.append(np.flatnonzero(d == 1).astype(np.int64) + a)
            es.append(np.flatnonzero(d == -1).astype(np.int64) + a)
        s = np.concatenate(ss)
        e = np.concatenate(es)
        if len(ss) > 1 and len(s):
            s, e = _merge_sorted(s, e)
        return s, e

    def spec(self):
        if self._name:
            return self._name
        fmt = lambda d: repr(float(d)) if d.lo == 0.0 else f"{d.hi!r}+{d.lo!r}"
        return (f"rot alpha={fmt(self.alpha)} u={fmt(self.arc_lo)} "
                f"v={fmt(self.arc_hi)} x0={fmt(self.x0)}")


class ABSet(LazySet):
    """``A ∩ {floor(n*b/a) : n >= 0}`` with ``A`` the block family of density ``b``.

    Along the dyadic windows the blocks have density ``b`` and the Beatty set
    thins them to density ``a``; unions of a few consecutive shifts refill the
    blocks, so their density returns to ``b``.
    """

    lower_bound = 0

    def __init__(self, a, b):
        a, b = Fraction(a), Fraction(b)
        if not (0 < a <= b < 1):
            raise ValueError(f"need 0 < a <= b < 1, got a={a}, b={b}")
        self.a, self.b = a, b
        self.beta = b / a
        self.blocks = HindmanBlocks(b)
        p, q = self.beta.numerator, self.beta.denominator
        # floor((n + q) p / q) = floor(n p / q) + p, so the Beatty set is periodic
        self.beatty = Periodic(p, [(n * p) // q for n in range(q)])

    def _arrays(self, lo, hi):
        bs, be = self.blocks._arrays(lo, hi)
        parts_s, parts_e = [], []
        for a, b in zip(bs.tolist(), be.tolist()):
            s, e = self.beatty._arrays(a, b)
            parts_s.append(s)
            parts_e.append(e)
        if not parts_s:
            return _EMPTY, _EMPTY
        return np.concatenate(parts_s), np.concatenate(parts_e)

    def spec(self):
        return f"ab a={self.a} b={self.b}"


class ExplicitIntervals(LazySet):
    """A finite set given by a list of intervals (merged to canonical form)."""

    def __init__(self, intervals: Iterable = ()):
        pairs = sorted((iv.lo, iv.hi) if isinstance(iv, Interval) else (int(iv[0]), int(iv[1]))
                       for iv in intervals)
        pairs = [(a, b) for a, b in pairs if a < b]
        if pairs:
            arr = np.array(pairs, dtype=np.int64)
            s, e = _merge_sorted(arr[:, 0], arr[:, 1])
        else:
            s, e = _EMPTY, _EMPTY
        self._s, self._e = s, e
        self.lower_bound = int(s[0]) if len(s) else 0
        self.upper_bound = int(e[-1]) if len(e) else 0

    @classmethod
    def from_points(cls, points) -> "ExplicitIntervals":
        return cls((p, p + 1) for p in points)

    def _arrays(self, lo, hi):
        return clip_arrays(self._s, self._e, lo, hi)

    def spec(self):
        body = "".join(f"[{a},{b})" for a, b in zip(self._s.tolist(), self._e.tolist()))
        return f"intervals {body}" if body else "empty"
