"""Exact finite subsets of the integers stored as sorted disjoint intervals.

A :class:`WindowSet` is a subset of a half-open :class:`Window`, kept in
canonical form: intervals are half-open, sorted, pairwise disjoint and never
adjacent. Interval endpoints live in read-only ``int64`` arrays so that set
algebra on hundreds of thousands of runs stays vectorised.

Serialization::

    window=[0,16) intervals=[1,2)[4,8)
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InsufficientWindowError,
    RangeError,
    SpecSyntaxError,
    WindowMismatchError,
)

#: largest supported window length and coordinate magnitude
MAX_LENGTH = 2 ** 62
MAX_COORD = 2 ** 62


@dataclass(frozen=True, order=True)
class Interval:
    """Half-open integer interval ``[lo, hi)`` with ``lo < hi``."""

    lo: int
    hi: int

    def __post_init__(self):
        lo, hi = int(self.lo), int(self.hi)
        if lo >= hi:
            raise ValueError(f"empty interval [{lo},{hi})")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def length(self) -> int:
        return self.hi - self.lo

    def __len__(self):
        return self.length

    def __contains__(self, n) -> bool:
        return self.lo <= n < self.hi

    def __str__(self):
        return f"[{self.lo},{self.hi})"


class Window(Interval):
    """An ambient interval; length and coordinates are capped at ``2**62``."""

    def __post_init__(self):
        super().__post_init__()
        if self.hi - self.lo > MAX_LENGTH:
            raise RangeError(f"window length {self.hi - self.lo} exceeds 2**62")
        if abs(self.lo) > MAX_COORD or abs(self.hi) > MAX_COORD:
            raise RangeError(f"window {self} has coordinates beyond +-2**62")

    def pad(self, left: int, right: int | None = None) -> "Window":
        right = left if right is None else right
        return Window(self.lo - left, self.hi + right)

    def shifted(self, h: int) -> "Window":
        return Window(self.lo + h, self.hi + h)

    def contains_window(self, other: Interval) -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


def as_window(w) -> Window:
    if isinstance(w, Window):
        return w
    if isinstance(w, Interval):
        return Window(w.lo, w.hi)
    lo, hi = w
    return Window(lo, hi)


@total_ordering
@dataclass(frozen=True, eq=False)
class DensityValue:
    """Exact density ``numer / denom`` of a set inside a window.

    ``numer`` is the element count and ``denom`` the window length; they are
    kept unreduced so the raw count survives. Comparison and hashing use the
    rational value.
    """

    numer: int
    denom: int

    def __post_init__(self):
        numer, denom = int(self.numer), int(self.denom)
        if denom <= 0:
            raise ValueError("density denominator must be positive")
        if not 0 <= numer <= denom:
            raise ValueError(f"density {numer}/{denom} outside [0, 1]")
        object.__setattr__(self, "numer", numer)
        object.__setattr__(self, "denom", denom)

    @property
    def value(self) -> Fraction:
        return Fraction(self.numer, self.denom)

    def decimal(self, places: int = 12) -> str:
        return format_decimal(self.value, places)

    def __float__(self):
        return self.numer / self.denom

    def __str__(self):
        return f"{self.numer}/{self.denom}"

    def __repr__(self):
        return f"DensityValue({self.numer}/{self.denom})"

    def _coerce(self, other):
        if isinstance(other, DensityValue):
            return other.value
        if isinstance(other, (int, Fraction)):
            return Fraction(other)
        if isinstance(other, float):
            return Fraction(other)
        return NotImplemented

    def __eq__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self.value == o

    def __lt__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self.value < o

    def __hash__(self):
        return hash(self.value)


def format_decimal(value: Fraction, places: int = 12) -> str:
    """Round a rational to ``places`` decimals (half-even), deterministically."""
    value = Fraction(value)
    with localcontext() as ctx:
        ctx.prec = max(50, places + 30)
        d = Decimal(value.numerator) / Decimal(value.denominator)
        return format(d.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN), "f")


# ---------------------------------------------------------------------------
# array kernels; every function takes and returns canonical (starts, ends)

_EMPTY = np.zeros(0, dtype=np.int64)


def _frozen(a) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int64)
    a.setflags(write=False)
    return a


def combine(parts: Sequence[tuple[np.ndarray, np.ndarray]], need: int):
    """Points covered by at least ``need`` of the canonical interval lists.

    ``need=1`` gives the union, ``need=len(parts)`` the intersection.
    """
    parts = [p for p in parts if len(p[0])] if need == 1 else list(parts)
    if not parts or (need >= len(parts) and any(len(p[0]) == 0 for p in parts)):
        return _EMPTY, _EMPTY
    if len(parts) == 1 and need == 1:
        return parts[0]
    pos = np.concatenate([p[0] for p in parts] + [p[1] for p in parts])
    n_starts = sum(len(p[0]) for p in parts)
    delta = np.empty(len(pos), dtype=np.int64)
    delta[:n_starts] = 1
    delta[n_starts:] = -1
    order = np.argsort(pos, kind="stable")
    pos = pos[order]
    delta = delta[order]
    first = np.flatnonzero(np.concatenate(([True], pos[1:] != pos[:-1])))
    upos = pos[first]
    cover = np.cumsum(np.add.reduceat(delta, first))
    inside = cover >= need
    prev = np.concatenate(([False], inside[:-1]))
    starts = upos[inside & ~prev]
    ends = upos[~inside & prev]
    return starts, ends


def complement_arrays(starts, ends, lo: int, hi: int):
    cs = np.concatenate(([lo], ends)).astype(np.int64)
    ce = np.concatenate((starts, [hi])).astype(np.int64)
    keep = cs < ce
    return cs[keep], ce[keep]


def clip_arrays(starts, ends, lo: int, hi: int):
    i = np.searchsorted(ends, lo, side="right")
    j = np.searchsorted(starts, hi, side="left")
    s = starts[i:j].copy()
    e = ends[i:j].copy()
    if len(s):
        s[0] = max(s[0], lo)
        e[-1] = min(e[-1], hi)
    return s, e


def mask_to_arrays(mask: np.ndarray, lo: int):
    m = np.asarray(mask, dtype=np.int8)
    d = np.diff(m, prepend=np.int8(0), append=np.int8(0))
    starts = np.flatnonzero(d == 1).astype(np.int64) + lo
    ends = np.flatnonzero(d == -1).astype(np.int64) + lo
    return starts, ends


def arrays_to_mask(starts, ends, lo: int, hi: int) -> np.ndarray:
    # canonical form: no start coincides with an end, so plain indexing is safe
    marks = np.zeros(hi - lo + 1, dtype=np.int8)
    marks[starts - lo] = 1
    marks[ends - lo] = -1
    return np.cumsum(marks[:-1], dtype=np.int8) > 0


def prefix_counts(starts, ends, points) -> np.ndarray:
    """Number of members strictly below each point."""
    points = np.asarray(points, dtype=np.int64)
    lengths = ends - starts
    cum = np.concatenate(([0], np.cumsum(lengths)))
    i = np.searchsorted(starts, points, side="left")
    out = cum[i]
    has = i > 0
    if np.any(has):
        last_end = ends[np.maximum(i - 1, 0)]
        over = np.where(has, np.maximum(last_end - points, 0), 0)
        out = out - over
    return out


def member_arrays(starts, ends, points) -> np.ndarray:
    points = np.asarray(points, dtype=np.int64)
    idx = np.searchsorted(starts, points, side="right") - 1
    ok = idx >= 0
    safe = np.maximum(idx, 0)
    if len(ends) == 0:
        return np.zeros(points.shape, dtype=bool)
    return ok & (points < ends[safe])


# ---------------------------------------------------------------------------


_SER_RE = re.compile(r"^window=\[(-?\d+),(-?\d+)\)\s+intervals=((?:\[-?\d+,-?\d+\))*)$")
_IV_RE = re.compile(r"\[(-?\d+),(-?\d+)\)")


class WindowSet:
    """Immutable subset of a window in canonical interval form."""

    __slots__ = ("_window", "_starts", "_ends", "_count")

    def __init__(self, window, intervals: Iterable = ()):
        window = as_window(window)
        pairs = []
        for iv in intervals:
            lo, hi = (iv.lo, iv.hi) if isinstance(iv, Interval) else iv
            lo, hi = int(lo), int(hi)
            if lo > hi:
                raise ValueError(f"reversed interval [{lo},{hi})")
            if lo == hi:
                continue
            if lo < window.lo or hi > window.hi:
                raise ValueError(f"interval [{lo},{hi}) outside window {window}")
            pairs.append((lo, hi))
        if pairs:
            arr = np.array(sorted(pairs), dtype=np.int64)
            starts, ends = _merge_sorted(arr[:, 0], arr[:, 1])
        else:
            starts, ends = _EMPTY, _EMPTY
        self._init(window, starts, ends)

    def _init(self, window, starts, ends):
        self._window = window
        self._starts = _frozen(starts)
        self._ends = _frozen(ends)
        self._count = None

    @classmethod
    def from_arrays(cls, window, starts, ends) -> "WindowSet":
        """Trusting constructor; ``starts``/``ends`` must already be canonical."""
        obj = cls.__new__(cls)
        obj._init(as_window(window), starts, ends)
        return obj

    @classmethod
    def from_mask(cls, window, mask) -> "WindowSet":
        window = as_window(window)
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (window.length,):
            raise ValueError("mask length does not match window")
        return cls.from_arrays(window, *mask_to_arrays(mask, window.lo))

    @classmethod
    def from_points(cls, window, points) -> "WindowSet":
        window = as_window(window)
        pts = np.unique(np.asarray(list(points), dtype=np.int64))
        if len(pts) and (pts[0] < window.lo or pts[-1] >= window.hi):
            raise ValueError("point outside window")
        mask = np.zeros(window.length, dtype=bool)
        mask[pts - window.lo] = True
        return cls.from_mask(window, mask)

    @classmethod
    def full(cls, window) -> "WindowSet":
        window = as_window(window)
        return cls.from_arrays(window, [window.lo], [window.hi])

    @classmethod
    def empty(cls, window) -> "WindowSet":
        return cls.from_arrays(as_window(window), _EMPTY, _EMPTY)

    # -- accessors ---------------------------------------------------------

    @property
    def window(self) -> Window:
        return self._window

    @property
    def starts(self) -> np.ndarray:
        return self._starts

    @property
    def ends(self) -> np.ndarray:
        return self._ends

    @property
    def arrays(self):
        return self._starts, self._ends

    @property
    def intervals(self) -> list[Interval]:
        return [Interval(int(a), int(b)) for a, b in zip(self._starts, self._ends)]

    @property
    def n_intervals(self) -> int:
        return len(self._starts)

    @property
    def count(self) -> int:
        if self._count is None:
            # int64 is enough: the total never exceeds the 2**62 window cap
            self._count = int(np.sum(self._ends - self._starts, dtype=np.int64))
        return self._count

    def __len__(self):
        return self.count

    def __bool__(self):
        return len(self._starts) > 0

    def __iter__(self):
        for a, b in zip(self._starts.tolist(), self._ends.tolist()):
            yield from range(a, b)

    def __contains__(self, n) -> bool:
        return bool(member_arrays(self._starts, self._ends, [n])[0])

    def density(self) -> DensityValue:
        return DensityValue(self.count, self._window.length)

    def count_in(self, lo: int, hi: int) -> int:
        c = prefix_counts(self._starts, self._ends, [lo, hi])
        return int(c[1] - c[0])

    def window_counts(self, starts, length: int) -> np.ndarray:
        """Counts in the windows ``[s, s + length)`` for every ``s`` in ``starts``."""
        starts = np.asarray(starts, dtype=np.int64)
        return prefix_counts(self._starts, self._ends, starts + length) - \
            prefix_counts(self._starts, self._ends, starts)

    def to_mask(self) -> np.ndarray:
        w = self._window
        return arrays_to_mask(self._starts, self._ends, w.lo, w.hi)

    # -- algebra -----------------------------------------------------------

    def _check(self, other: "WindowSet"):
        if self._window != other._window:
            raise WindowMismatchError(f"windows differ: {self._window} vs {other._window}")

    def union(self, other: "WindowSet") -> "WindowSet":
        self._check(other)
        return WindowSet.from_arrays(self._window, *combine([self.arrays, other.arrays], 1))

    def intersect(self, other: "WindowSet") -> "WindowSet":
        self._check(other)
        return WindowSet.from_arrays(self._window, *combine([self.arrays, other.arrays], 2))

    def complement(self) -> "WindowSet":
        w = self._window
        return WindowSet.from_arrays(w, *complement_arrays(self._starts, self._ends, w.lo, w.hi))

    def difference(self, other: "WindowSet") -> "WindowSet":
        return self.intersect(other.complement())

    __or__ = union
    __and__ = intersect
    __invert__ = complement
    __sub__ = difference

    def shift(self, h: int, window) -> "WindowSet":
        """``{n in window : n + h in self}``.

        The source window must cover ``window`` shifted by ``h``; otherwise
        members near the boundary would be silently lost.
        """
        window = as_window(window)
        h = int(h)
        need = Interval(window.lo + h, window.hi + h)
        if not self._window.contains_window(need):
            raise InsufficientWindowError(
                f"shift by {h} into {window} needs source window {need}, have {self._window}")
        s, e = clip_arrays(self._starts, self._ends, need.lo, need.hi)
        return WindowSet.from_arrays(window, s - h, e - h)

    def restrict(self, window) -> "WindowSet":
        return self.shift(0, window)

    # -- identity & text ---------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, WindowSet):
            return NotImplemented
        return (self._window == other._window
                and np.array_equal(self._starts, other._starts)
                and np.array_equal(self._ends, other._ends))

    def __hash__(self):
        return hash((self._window, self._starts.tobytes(), self._ends.tobytes()))

    def serialize(self) -> str:
        w = self._window
        body = "".join(f"[{a},{b})" for a, b in zip(self._starts.tolist(), self._ends.tolist()))
        return f"window=[{w.lo},{w.hi}) intervals={body}"

    __str__ = serialize

    @classmethod
    def parse(cls, text: str) -> "WindowSet":
        m = _SER_RE.match(text.strip())
        if not m:
            raise SpecSyntaxError("malformed window set", text, 0)
        window = Window(int(m.group(1)), int(m.group(2)))
        pairs = [(int(a), int(b)) for a, b in _IV_RE.findall(m.group(3))]
        for (a, b), nxt in zip(pairs, pairs[1:] + [None]):
            if a >= b or (nxt is not None and b >= nxt[0]):
                raise SpecSyntaxError("intervals not in canonical form", text, 0)
        obj = cls(window, pairs)
        return obj

    def __repr__(self):
        n = len(self._starts)
        if n <= 6:
            return f"WindowSet({self.serialize()})"
        return f"WindowSet(window={self._window}, {n} intervals, count={self.count})"


def _merge_sorted(starts, ends):
    # starts sorted ascending; merge overlapping and adjacent runs
    run_end = np.maximum.accumulate(ends)
    new = np.concatenate(([True], starts[1:] > run_end[:-1]))
    idx = np.flatnonzero(new)
    out_s = starts[idx]
    out_e = np.maximum.reduceat(ends, idx)
    return out_s, out_e
