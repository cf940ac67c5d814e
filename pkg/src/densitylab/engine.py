"""Density engine: expression evaluation, densities along Følner families,
Banach-density lower bounds and shift correlations.

Everything here is exact integer arithmetic. Expressions are evaluated either
on interval arrays or on a boolean mask of the padded window, whichever is
cheaper for the source at hand; both routes give identical sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .expr import Atom, ShiftExpr, Union, flatten, max_abs_shift, n_atoms
from .folner import FolnerFamily
from .lazysets import LazySet
from .sets import (
    DensityValue,
    Window,
    WindowSet,
    as_window,
    clip_arrays,
    combine,
    complement_arrays,
    prefix_counts,
)

#: masks are never built for padded windows longer than this
MASK_LIMIT = 1 << 28


class Evaluator:
    """Evaluate many expressions of one source set on one window.

    The source is restricted once, to the window padded by ``pad`` on each
    side; any expression whose shifts stay within ``pad`` can then be
    evaluated exactly.
    """

    def __init__(self, source: LazySet, window, pad: int = 0, route: str = "auto"):
        self.window = as_window(window)
        self.pad = int(pad)
        self.padded = self.window.pad(self.pad)
        self.src = source.restrict(self.padded)
        if route not in ("auto", "mask", "intervals"):
            raise ValueError(f"unknown route {route!r}")
        self.forced_route = route
        self._src_mask = None

    @classmethod
    def for_expr(cls, source: LazySet, window, expr: ShiftExpr, **kw) -> "Evaluator":
        return cls(source, window, max_abs_shift(expr), **kw)

    # -- route choice --------------------------------------------------------

    def route(self, expr: ShiftExpr) -> str:
        if self.forced_route != "auto":
            return self.forced_route
        if self.padded.length > MASK_LIMIT:
            return "intervals"
        k = n_atoms(expr)
        interval_cost = 8 * (self.src.n_intervals + 1) * k
        mask_cost = self.padded.length * (k + 2) / 8
        return "mask" if mask_cost < interval_cost else "intervals"

    def _check(self, expr):
        m = max_abs_shift(expr)
        if m > self.pad:
            raise ValueError(f"expression shift {m} exceeds evaluator padding {self.pad}")

    @property
    def src_mask(self) -> np.ndarray:
        if self._src_mask is None:
            self._src_mask = self.src.to_mask()
        return self._src_mask

    # -- interval route ------------------------------------------------------

    def _atom_arrays(self, atom: Atom):
        w = self.window
        s, e = clip_arrays(self.src.starts, self.src.ends, w.lo + atom.shift, w.hi + atom.shift)
        s, e = s - atom.shift, e - atom.shift
        if atom.complemented:
            s, e = complement_arrays(s, e, w.lo, w.hi)
        return s, e

    def _intervals(self, expr):
        if isinstance(expr, Atom):
            return self._atom_arrays(expr)
        parts = [self._intervals(c) for c in flatten(expr)]
        need = 1 if isinstance(expr, Union) else len(parts)
        return combine(parts, need)

    # -- mask route ----------------------------------------------------------

    def _atom_mask(self, atom: Atom, copy: bool):
        off = self.pad + atom.shift
        view = self.src_mask[off: off + self.window.length]
        if atom.complemented:
            return ~view
        return view.copy() if copy else view

    def _mask(self, expr, copy=True):
        if isinstance(expr, Atom):
            return self._atom_mask(expr, copy)
        parts = flatten(expr)
        op = np.logical_or if isinstance(expr, Union) else np.logical_and
        acc = self._mask(parts[0], copy=True)
        for c in parts[1:]:
            op(acc, self._mask(c, copy=False), out=acc)
        return acc

    # -- public --------------------------------------------------------------

    def evaluate(self, expr: ShiftExpr) -> WindowSet:
        self._check(expr)
        if self.route(expr) == "mask":
            return WindowSet.from_mask(self.window, self._mask(expr))
        return WindowSet.from_arrays(self.window, *self._intervals(expr))

    def mask(self, expr: ShiftExpr) -> np.ndarray:
        self._check(expr)
        return self._mask(expr)

    def count(self, expr: ShiftExpr) -> int:
        self._check(expr)
        if self.route(expr) == "mask":
            return int(np.count_nonzero(self._mask(expr, copy=False)))
        s, e = self._intervals(expr)
        return int(np.sum(e - s, dtype=np.int64))

    def density(self, expr: ShiftExpr) -> DensityValue:
        return DensityValue(self.count(expr), self.window.length)

    def window_counts(self, expr: ShiftExpr, starts, length: int) -> np.ndarray:
        """Member counts of ``expr`` in each sub-window ``[s, s + length)``."""
        self._check(expr)
        starts = np.asarray(starts, dtype=np.int64)
        if self.route(expr) == "mask":
            cs = np.concatenate(([0], np.cumsum(self._mask(expr, copy=False), dtype=np.int64)))
            rel = starts - self.window.lo
            return cs[rel + length] - cs[rel]
        s, e = self._intervals(expr)
        return prefix_counts(s, e, starts + length) - prefix_counts(s, e, starts)

    def correlation_counts(self, shifts: Sequence[int]) -> np.ndarray:
        """``|E ∩ (E - g) ∩ window|`` for every ``g`` in ``shifts``."""
        shifts = [int(g) for g in shifts]
        if shifts and max(abs(g) for g in shifts) > self.pad:
            raise ValueError("shift exceeds evaluator padding")
        out = np.empty(len(shifts), dtype=np.int64)
        use_mask = self.forced_route == "mask" or (
            self.forced_route == "auto"
            and self.padded.length <= MASK_LIMIT
            and self.padded.length / 8 < 8 * (self.src.n_intervals + 1))
        if use_mask:
            base = self._atom_mask(Atom(0), copy=False)
            for i, g in enumerate(shifts):
                out[i] = np.count_nonzero(base & self._atom_mask(Atom(g), copy=False))
        else:
            base = self._atom_arrays(Atom(0))
            for i, g in enumerate(shifts):
                s, e = combine([base, self._atom_arrays(Atom(g))], 2)
                out[i] = int(np.sum(e - s, dtype=np.int64))
        return out


def eval_expr(expr: ShiftExpr, source: LazySet, window, route: str = "auto") -> WindowSet:
    """``{n in window : expr holds at n}``, exact."""
    return Evaluator.for_expr(source, window, expr, route=route).evaluate(expr)


def density(x: WindowSet) -> DensityValue:
    return x.density()


def expr_density(expr: ShiftExpr, source: LazySet, window, route: str = "auto") -> DensityValue:
    return Evaluator.for_expr(source, window, expr, route=route).density(expr)


@dataclass(frozen=True)
class DensityTrace:
    """Window densities ``|F_N ∩ X| / |F_N|`` for ``N = 1..Nmax`` with running maxima."""

    Ns: tuple[int, ...]
    values: tuple[DensityValue, ...]
    running_max: tuple[DensityValue, ...]

    @property
    def final(self) -> DensityValue:
        return self.values[-1]

    @property
    def limsup_surrogate(self) -> DensityValue:
        return self.running_max[-1]

    def rows(self):
        return list(zip(self.Ns, self.values, self.running_max))


def upper_density_along(source: LazySet, family: FolnerFamily, Nmax: int,
                        expr: ShiftExpr = Atom(0)) -> DensityTrace:
    """Densities of ``expr`` (default ``E`` itself) on ``F_1 .. F_Nmax``."""
    if Nmax < 1:
        raise ValueError("Nmax must be >= 1")
    Ns, vals, runs = [], [], []
    best = None
    for N in range(1, Nmax + 1):
        w = family.window(N)
        v = expr_density(expr, source, w)
        best = v if best is None or v > best else best
        Ns.append(N)
        vals.append(v)
        runs.append(best)
    return DensityTrace(tuple(Ns), tuple(vals), tuple(runs))


@dataclass(frozen=True)
class BanachBound:
    """Best scanned window density: a certified lower bound for ``d*``."""

    value: DensityValue
    witness: Window
    L: int
    B: int
    stride: int
    n_windows: int = field(default=0)


def scan_starts(L: int, B: int, stride: int) -> np.ndarray:
    if L < 1 or stride < 1 or B < L:
        raise ValueError(f"need L >= 1, stride >= 1, B >= L (got L={L}, B={B}, stride={stride})")
    return np.arange(0, B - L + 1, stride, dtype=np.int64)


def banach_from_evaluator(ev: Evaluator, expr: ShiftExpr, L: int, B: int, stride: int) -> BanachBound:
    starts = scan_starts(L, B, stride)
    counts = ev.window_counts(expr, starts, L)
    i = int(np.argmax(counts))  # first maximum wins ties
    s = int(starts[i])
    return BanachBound(DensityValue(int(counts[i]), L), Window(s, s + L), L, B, stride, len(starts))


def banach_lower_bound(source: LazySet, L: int, B: int, stride: int,
                       expr: ShiftExpr = Atom(0)) -> BanachBound:
    """Max density of ``expr`` over windows ``[s, s+L)``, ``s = 0, stride, ... <= B-L``."""
    scan_starts(L, B, stride)
    ev = Evaluator.for_expr(source, Window(0, B), expr)
    return banach_from_evaluator(ev, expr, L, B, stride)


def correlation_counts(source: LazySet, window, shifts: Sequence[int]) -> np.ndarray:
    pad = max((abs(int(g)) for g in shifts), default=0)
    return Evaluator(source, window, pad).correlation_counts(shifts)


def mean_fraction(counts, denom: int) -> Fraction:
    return Fraction(int(np.sum(counts, dtype=object)), denom * len(counts))
