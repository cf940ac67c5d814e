"""Empirical cylinder frequencies of a set's indicator orbit.

For shifts ``h_1 < ... < h_k`` and a word ``w`` in ``{0,1}^k`` the cylinder
frequency on a window ``W`` is the share of ``n`` in ``W`` with
``1_E(n + h_i) = w_i`` for all ``i``. Expression densities can then be
recomputed as sums of cylinder frequencies, which must agree exactly with the
direct interval evaluation.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._parallel import pmap
from .engine import Evaluator, upper_density_along
from .expr import Atom, ShiftExpr, eval_words, format_expr, intersection_of, shifts
from .folner import FolnerFamily
from .lazysets import LazySet
from .sets import DensityValue, Window, as_window, clip_arrays, member_arrays

#: expressions with more distinct shifts than this are refused
MAX_SHIFTS = 20
DEFAULT_GAP_EPS = Fraction(1, 20)


@dataclass(frozen=True)
class CylinderSpec:
    shifts: tuple[int, ...]
    word: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "shifts", tuple(int(h) for h in self.shifts))
        object.__setattr__(self, "word", tuple(int(b) for b in self.word))
        if len(self.shifts) != len(self.word):
            raise ValueError("word length must match the number of shifts")
        if any(a >= b for a, b in zip(self.shifts, self.shifts[1:])):
            raise ValueError("shifts must be strictly increasing")
        if any(b not in (0, 1) for b in self.word):
            raise ValueError("word letters must be 0 or 1")

    @classmethod
    def from_pairs(cls, pairs) -> "CylinderSpec":
        """Canonical spec from unordered ``(shift, letter)`` pairs."""
        pairs = sorted((int(h), int(b)) for h, b in pairs)
        return cls(tuple(h for h, _ in pairs), tuple(b for _, b in pairs))

    def shifted(self, s: int) -> "CylinderSpec":
        return CylinderSpec(tuple(h + s for h in self.shifts), self.word)

    @property
    def spread(self) -> int:
        return self.shifts[-1] - self.shifts[0] if self.shifts else 0

    def expr(self) -> ShiftExpr:
        return intersection_of([Atom(h, not b) for h, b in zip(self.shifts, self.word)])


def cylinder_frequency(source: LazySet, spec: CylinderSpec, window) -> DensityValue:
    """Exact frequency of the cylinder on the window, by interval algebra."""
    w = as_window(window)
    if not spec.shifts:
        return DensityValue(w.length, w.length)
    expr = spec.expr()
    ev = Evaluator.for_expr(source, w, expr, route="intervals")
    return ev.density(expr)


def word_histogram(source: LazySet, shift_list: Sequence[int], window) -> tuple[np.ndarray, np.ndarray]:
    """Observed word codes and their exact multiplicities on the window.

    Bit ``i`` of a code is ``1_E(n + shift_list[i])``. The window is cut at
    every point where one of the shifted copies enters or leaves the source,
    so each piece carries a single word; only words that occur are returned.
    """
    w = as_window(window)
    shift_list = [int(h) for h in shift_list]
    pad = max((abs(h) for h in shift_list), default=0)
    src = source.restrict(w.pad(pad))
    cuts = [np.array([w.lo, w.hi], dtype=np.int64)]
    shifted = []
    for h in shift_list:
        s, e = clip_arrays(src.starts, src.ends, w.lo + h, w.hi + h)
        s, e = s - h, e - h
        shifted.append((s, e))
        cuts += [s, e]
    bounds = np.unique(np.concatenate(cuts))
    left, lengths = bounds[:-1], np.diff(bounds)
    codes = np.zeros(len(left), dtype=np.int64)
    for i, (s, e) in enumerate(shifted):
        codes |= member_arrays(s, e, left).astype(np.int64) << i
    uniq, inv = np.unique(codes, return_inverse=True)
    weights = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(weights, inv, lengths)
    return uniq, weights


def expr_via_cylinders(source: LazySet, expr: ShiftExpr, window) -> DensityValue:
    """Density of ``expr`` recomputed as a sum of cylinder frequencies."""
    w = as_window(window)
    shift_list = list(shifts(expr))
    if len(shift_list) > MAX_SHIFTS:
        raise ValueError(f"expression has {len(shift_list)} distinct shifts (max {MAX_SHIFTS})")
    codes, weights = word_histogram(source, shift_list, w)
    truth = eval_words(expr, codes, shift_list)
    return DensityValue(int(weights[truth].sum()), w.length)


class EmpiricalMeasure:
    """Memoised cylinder frequencies of one source on one window.

    Writes happen under a lock until :meth:`freeze`; afterwards the memo is
    read-only, lookups of new specs are computed without being stored, and
    any number of threads may read concurrently.
    """

    def __init__(self, source: LazySet, window):
        self.source = source
        self.window = as_window(window)
        self.memo: dict[CylinderSpec, DensityValue] = {}
        self._lock = threading.Lock()
        self._frozen = False

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> "EmpiricalMeasure":
        with self._lock:
            self._frozen = True
        return self

    def _store(self, spec, value):
        if self._frozen:
            return
        with self._lock:
            if not self._frozen:
                self.memo.setdefault(spec, value)

    def frequency(self, spec: CylinderSpec) -> DensityValue:
        hit = self.memo.get(spec)
        if hit is not None:
            return hit
        value = cylinder_frequency(self.source, spec, self.window)
        self._store(spec, value)
        return value

    def partition(self, shift_list: Sequence[int]) -> dict[tuple[int, ...], DensityValue]:
        """Frequencies of all ``2**k`` words over the shifts (zeros included)."""
        shift_list = tuple(int(h) for h in shift_list)
        k = len(shift_list)
        codes, weights = word_histogram(self.source, shift_list, self.window)
        seen = dict(zip(codes.tolist(), weights.tolist()))
        out = {}
        for code in range(1 << k):
            word = tuple((code >> i) & 1 for i in range(k))
            value = DensityValue(seen.get(code, 0), self.window.length)
            self._store(CylinderSpec(shift_list, word), value)
            out[word] = value
        return out

    def __len__(self):
        return len(self.memo)


# -- tables ---------------------------------------------------------------


@dataclass(frozen=True)
class TableRow:
    expr_id: int
    N: int
    value: DensityValue
    running_max: DensityValue
    gap_flag: bool


@dataclass(frozen=True)
class CorrespondenceTable:
    exprs: tuple[str, ...]
    rows: tuple[TableRow, ...]
    eps: Fraction

    def final(self, expr_id: int) -> DensityValue:
        return [r for r in self.rows if r.expr_id == expr_id][-1].value

    def flagged(self) -> list[TableRow]:
        return [r for r in self.rows if r.gap_flag]

    def to_csv(self) -> str:
        lines = ["exprId,N,numer,denom,decimal"]
        for r in self.rows:
            lines.append(f"{r.expr_id},{r.N},{r.value.numer},{r.value.denom},{r.value.decimal()}")
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {
            "exprs": {str(i): e for i, e in enumerate(self.exprs)},
            "eps": str(self.eps),
            "monotone_gap": [{"exprId": r.expr_id, "N": r.N} for r in self.flagged()],
            "final": {str(i): str(self.final(i)) for i in range(len(self.exprs))},
        }

    def to_json(self) -> str:
        data = self.summary()
        data["rows"] = [
            {"exprId": r.expr_id, "N": r.N, "value": str(r.value), "decimal": r.value.decimal(),
             "running_max": str(r.running_max), "monotone_gap": r.gap_flag}
            for r in self.rows
        ]
        return json.dumps(data, indent=2, sort_keys=True)


def correspondence_table(source: LazySet, exprs: Sequence[ShiftExpr], family: FolnerFamily,
                         Nmax: int, eps=DEFAULT_GAP_EPS, threads: int | None = None) -> CorrespondenceTable:
    """Exact densities of each expression along ``F_1 .. F_Nmax``.

    A row is flagged MONOTONE-GAP when the final running maximum exceeds its
    value by more than ``eps``.
    """
    eps = Fraction(eps)
    traces = pmap(lambda e: upper_density_along(source, family, Nmax, e), list(exprs), threads)
    rows = []
    for i, tr in enumerate(traces):
        top = tr.limsup_surrogate.value
        for N, v, m in tr.rows():
            rows.append(TableRow(i, N, v, m, top - v.value > eps))
    return CorrespondenceTable(tuple(format_expr(e) for e in exprs), tuple(rows), eps)


@dataclass(frozen=True)
class AveragedCorrelation:
    """Partial averages ``(1/h) sum_{g<h} d(E ∩ (E - g))`` for ``h = 1..H``."""

    window: Window
    partials: tuple[Fraction, ...]
    reference: Fraction
    correlations: tuple[DensityValue, ...]

    @property
    def final(self) -> Fraction:
        return self.partials[-1]

    @property
    def boundary(self) -> Fraction:
        """``(H + largest shift) / |window|``."""
        H = len(self.partials)
        return Fraction(H + (H - 1), self.window.length)

    def min_excess(self) -> Fraction:
        return min(p - self.reference for p in self.partials)

    def to_csv(self) -> str:
        lines = ["h,numer,denom,decimal"]
        for h, p in enumerate(self.partials, start=1):
            lines.append(f"{h},{p.numerator},{p.denominator},{DensityValue(p.numerator, p.denominator).decimal()}")
        r = self.reference
        lines.append(f"ref,{r.numerator},{r.denominator},{DensityValue(r.numerator, r.denominator).decimal()}")
        return "\n".join(lines) + "\n"


def averaged_correlation(source: LazySet, window=None, H: int = 1000, *,
                         family: FolnerFamily | None = None, K: int | None = None) -> AveragedCorrelation:
    """Shift-averaged self-correlations on a fixed window.

    The window is given directly or as ``family.window(K)``. Shifts run over
    ``g = 0 .. H-1``; the reference is ``d(E)**2`` on the same window.
    """
    if H < 1:
        raise ValueError("H must be >= 1")
    if window is None:
        if family is None or K is None:
            raise ValueError("pass a window or a family with K")
        window = family.window(K)
    w = as_window(window)
    ev = Evaluator(source, w, H)
    counts = ev.correlation_counts(range(H))
    partials = []
    run = 0
    for h, c in enumerate(counts.tolist(), start=1):
        run += c
        partials.append(Fraction(run, h * w.length))
    d = Fraction(int(counts[0]), w.length)
    return AveragedCorrelation(w, tuple(partials), d * d,
                               tuple(DensityValue(int(c), w.length) for c in counts))
