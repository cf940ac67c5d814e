"""Interval Følner families ``N -> F_N`` on the integers."""

from __future__ import annotations

import re
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Callable, Sequence

from .errors import RangeError, SpecSyntaxError
from .sets import MAX_LENGTH, Window, as_window


class FolnerFamily(ABC):
    """A sequence of windows whose lengths grow without bound."""

    @abstractmethod
    def window(self, N: int) -> Window:
        ...

    @abstractmethod
    def spec(self) -> str:
        ...

    def windows(self, Nmax: int, start: int = 1):
        return [(N, self.window(N)) for N in range(start, Nmax + 1)]

    def defect(self, N: int, g: int) -> Fraction:
        """Exact ``|F_N Δ (F_N - g)| / |F_N|``.

        For an interval this is ``min(2|g|, 2|F_N|) / |F_N|``.
        """
        w = self.window(N)
        length = w.length
        overlap = max(0, length - abs(int(g)))
        return Fraction(2 * (length - overlap), length)

    def __repr__(self):
        return f"{type(self).__name__}({self.spec()!r})"


def _checked(lo: int, hi: int) -> Window:
    if hi - lo > MAX_LENGTH:
        raise RangeError(f"Følner window length {hi - lo} exceeds 2**62")
    return Window(lo, hi)


class InitialSegments(FolnerFamily):
    """``F_N = [0, N)``."""

    def window(self, N):
        if N < 1:
            raise ValueError("N must be >= 1")
        return _checked(0, N)

    def spec(self):
        return "initial"


class DyadicEven(FolnerFamily):
    """``F_N = [0, 2**(2N+1))``; the windows end exactly at Hindman block ends."""

    def window(self, N):
        if N < 0:
            raise ValueError("N must be >= 0")
        return _checked(0, 2 ** (2 * N + 1))

    def spec(self):
        return "dyadic"


class ShiftedIntervals(FolnerFamily):
    """``F_N = [a_N, b_N)`` from a rule returning the endpoints."""

    def __init__(self, rule: Callable[[int], tuple[int, int]], name: str = "shifted"):
        self.rule = rule
        self.name = name

    @classmethod
    def drifting(cls, power: int = 2) -> "ShiftedIntervals":
        """``F_N = [N**power, N**power + N)``: Følner, but running away from 0."""
        return cls(lambda N: (N ** power, N ** power + N), name=f"shifted p={power}")

    def window(self, N):
        if N < 1:
            raise ValueError("N must be >= 1")
        lo, hi = self.rule(N)
        return _checked(int(lo), int(hi))

    def spec(self):
        return self.name


class ExplicitList(FolnerFamily):
    """A finite list of windows, indexed from ``N = 1``."""

    def __init__(self, windows: Sequence):
        self._windows = [as_window(w) for w in windows]
        if not self._windows:
            raise ValueError("empty window list")

    def window(self, N):
        if not 1 <= N <= len(self._windows):
            raise IndexError(f"N={N} outside explicit list of {len(self._windows)} windows")
        return self._windows[N - 1]

    def spec(self):
        return "list " + "".join(str(w) for w in self._windows)


def parse_family(text: str) -> FolnerFamily:
    """``initial``, ``dyadic``, ``shifted p=2`` or ``list [a,b)[c,d)...``."""
    stripped = " ".join(text.split())
    head, _, rest = stripped.partition(" ")
    if head == "initial" and not rest:
        return InitialSegments()
    if head == "dyadic" and not rest:
        return DyadicEven()
    if head == "shifted":
        m = re.fullmatch(r"(?:p=(\d+))?", rest)
        if not m:
            raise SpecSyntaxError("expected 'shifted p=<int>'", text, len(head) + 1)
        return ShiftedIntervals.drifting(int(m.group(1) or 2))
    if head == "list":
        body = rest.replace(" ", "")
        pairs = re.findall(r"\[(-?\d+),(-?\d+)\)", body)
        if not pairs or re.sub(r"\[(-?\d+),(-?\d+)\)", "", body):
            raise SpecSyntaxError("malformed window list", text, len(head) + 1)
        try:
            return ExplicitList([(int(a), int(b)) for a, b in pairs])
        except ValueError as exc:
            raise SpecSyntaxError(str(exc), text, len(head) + 1) from None
    raise SpecSyntaxError(f"unknown Følner family {head!r}", text, 0)
