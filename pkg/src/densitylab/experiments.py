"""End-to-end drivers: covering curves, the union-stability counterexample,
complement witnesses and the sweeping-out classifier.

Thresholds used by :func:`sweeping_classifier` are heuristics; finite scans
give evidence, never proof.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from ._parallel import pmap
from .engine import BanachBound, Evaluator, banach_from_evaluator, scan_starts
from .expr import Atom, Intersect, shift_union
from .folner import DyadicEven
from .lazysets import HindmanBlocks, LazySet
from .sequences import IntSequence
from .sets import DensityValue, Window

COVERED = Fraction(95, 100)
PLATEAU_CEILING = Fraction(9, 10)
PLATEAU_RISE = Fraction(1, 100)


def default_stride(L: int) -> int:
    return max(1, L // 8)


@dataclass(frozen=True)
class CoveringRow:
    K: int
    n_shifts: int
    best: BanachBound

    @property
    def value(self) -> DensityValue:
        return self.best.value


@dataclass(frozen=True)
class CoveringReport:
    set_spec: str
    seq_spec: str
    L: int
    B: int
    stride: int
    rows: tuple[CoveringRow, ...]

    @property
    def values(self) -> list[DensityValue]:
        return [r.value for r in self.rows]

    def is_monotone(self) -> bool:
        v = self.values
        return all(a <= b for a, b in zip(v, v[1:]))

    def first_reaching(self, threshold) -> int | None:
        t = Fraction(threshold)
        for r in self.rows:
            if r.value.value >= t:
                return r.K
        return None

    def to_csv(self) -> str:
        lines = ["K,shifts,numer,denom,decimal,witness_lo,witness_hi"]
        for r in self.rows:
            v, w = r.value, r.best.witness
            lines.append(f"{r.K},{r.n_shifts},{v.numer},{v.denom},{v.decimal()},{w.lo},{w.hi}")
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {
            "set": self.set_spec, "seq": self.seq_spec, "L": self.L, "B": self.B, "stride": self.stride,
            "monotone": self.is_monotone(),
            "rows": [{"K": r.K, "shifts": r.n_shifts, "value": str(r.value), "decimal": r.value.decimal(),
                      "witness": str(r.best.witness)} for r in self.rows],
        }


def covering_curve(source: LazySet, seq: IntSequence, Ks: Sequence[int], L: int, B: int,
                   stride: int | None = None, threads: int | None = None) -> CoveringReport:
    """Best-window density of ``⋃_{n<=K} (E - k_n)`` for each checkpoint ``K``."""
    Ks = [int(K) for K in Ks]
    if not Ks or Ks[0] < 1 or any(a >= b for a, b in zip(Ks, Ks[1:])):
        raise ValueError("Ks must be positive and strictly increasing")
    stride = default_stride(L) if stride is None else int(stride)
    scan_starts(L, B, stride)
    ks = seq.values_up_to(Ks[-1])
    pad = int(np.max(np.abs(ks)))
    ev = Evaluator(source, Window(0, B), pad)

    def one(K):
        expr = shift_union(ks[:K].tolist())
        n = len(set(ks[:K].tolist()))
        return CoveringRow(K, n, banach_from_evaluator(ev, expr, L, B, stride))

    rows = pmap(one, Ks, threads)
    return CoveringReport(source.spec(), seq.spec(), L, B, stride, tuple(rows))


# -- union stability ---------------------------------------------------------


def counterexample_bound(K: int, N: int) -> Fraction:
    """Allowed distance of the union density from 2/3 at ``K`` and ``N``."""
    return Fraction((K + 1) * (N + 1), 2 ** (2 * N + 1)) + Fraction(1, 4 ** N)


@dataclass(frozen=True)
class CounterexampleRow:
    K: int
    N: int
    value: DensityValue
    bound: Fraction

    @property
    def deviation(self) -> Fraction:
        return abs(self.value.value - Fraction(2, 3))

    @property
    def within_bound(self) -> bool:
        return self.deviation <= self.bound


@dataclass(frozen=True)
class CounterexampleTable:
    rows: tuple[CounterexampleRow, ...]

    @property
    def all_within(self) -> bool:
        return all(r.within_bound for r in self.rows)

    def row(self, K: int, N: int) -> CounterexampleRow:
        return next(r for r in self.rows if r.K == K and r.N == N)

    def to_csv(self) -> str:
        lines = ["K,N,numer,denom,decimal,bound,within_bound"]
        for r in self.rows:
            lines.append(f"{r.K},{r.N},{r.value.numer},{r.value.denom},{r.value.decimal()},"
                         f"{r.bound},{int(r.within_bound)}")
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {"all_within_bound": self.all_within,
                "rows": [{"K": r.K, "N": r.N, "value": str(r.value), "decimal": r.value.decimal(),
                          "bound": str(r.bound), "within_bound": r.within_bound} for r in self.rows]}


def hindman_counterexample(Nmax: int, Ks: Sequence[int], threads: int | None = None) -> CounterexampleTable:
    """Density of ``⋃_{i=0..K} (E - i)`` on ``[0, 2**(2N+1))`` for Hindman's set."""
    if Nmax < 1:
        raise ValueError("Nmax must be >= 1")
    if any(int(K) < 0 for K in Ks):
        raise ValueError("Ks must be non-negative")
    E = HindmanBlocks()
    fam = DyadicEven()

    def one(job):
        K, N = job
        expr = shift_union(range(K + 1))
        ev = Evaluator(E, fam.window(N), K, route="intervals")
        return CounterexampleRow(K, N, ev.density(expr), counterexample_bound(K, N))

    jobs = [(int(K), N) for K in Ks for N in range(1, Nmax + 1)]
    return CounterexampleTable(tuple(pmap(one, jobs, threads)))


# -- complement witness --------------------------------------------------------


@dataclass(frozen=True)
class WitnessResult:
    scores: tuple[tuple[int, BanachBound], ...]
    best: tuple[int, BanachBound] | None

    def to_csv(self) -> str:
        lines = ["h,numer,denom,decimal,witness_lo,witness_hi,best"]
        best_h = self.best[0] if self.best else None
        for h, b in self.scores:
            lines.append(f"{h},{b.value.numer},{b.value.denom},{b.value.decimal()},"
                         f"{b.witness.lo},{b.witness.hi},{int(h == best_h)}")
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        if self.best is None:
            return {"best": "NONE"}
        h, b = self.best
        return {"best": {"h": h, "value": str(b.value), "decimal": b.value.decimal(),
                         "witness": str(b.witness)}}


def complement_witness_search(source: LazySet, hMax: int, L: int, B: int, stride: int | None = None,
                              threads: int | None = None) -> WitnessResult:
    """Best ``h`` in ``[1, hMax]`` for the Banach bound of ``E^c ∩ (E - h)``."""
    if hMax < 1:
        raise ValueError("hMax must be >= 1")
    stride = default_stride(L) if stride is None else int(stride)
    scan_starts(L, B, stride)
    ev = Evaluator(source, Window(0, B), hMax)

    def one(h):
        return h, banach_from_evaluator(ev, Intersect(Atom(0, True), Atom(h)), L, B, stride)

    scores = pmap(one, range(1, hMax + 1), threads)
    best = None
    for h, b in scores:
        if best is None or b.value > best[1].value:
            best = (h, b)
    if best is not None and best[1].value.numer == 0:
        best = None
    return WitnessResult(tuple(scores), best)


# -- sweeping-out classifier -----------------------------------------------------

CAVEAT_HEURISTIC = ("thresholds 0.95 / 0.9 / 0.01 are heuristics; a finite scan is evidence, "
                    "not a proof of sweeping out or of its failure")
CAVEAT_SLOW = ("this sequence has no effective bound on when coverage approaches 1; "
               "OBSTRUCTED at desk scale does not contradict sweeping out")


@dataclass(frozen=True)
class SetVerdict:
    name: str
    report: CoveringReport
    status: str  # COVERED, PLATEAU or UNDECIDED


@dataclass(frozen=True)
class ClassifierResult:
    seq_spec: str
    sets: tuple[SetVerdict, ...]
    caveats: tuple[str, ...] = field(default=())

    @property
    def verdict(self) -> str:
        if all(s.status == "COVERED" for s in self.sets):
            return "SWEEPING-EVIDENCE"
        blocked = [s.name for s in self.sets if s.status == "PLATEAU"]
        if blocked:
            return "OBSTRUCTED(" + "; ".join(blocked) + ")"
        return "INCONCLUSIVE"

    def to_csv(self) -> str:
        lines = ["set,K,numer,denom,decimal"]
        for s in self.sets:
            for r in s.report.rows:
                lines.append(f"{s.name},{r.K},{r.value.numer},{r.value.denom},{r.value.decimal()}")
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {"seq": self.seq_spec, "verdict": self.verdict,
                "sets": {s.name: s.status for s in self.sets}, "caveats": list(self.caveats)}


def _status(report: CoveringReport) -> str:
    vals = [v.value for v in report.values]
    final, mid = vals[-1], vals[len(vals) // 2]
    if max(vals) >= COVERED:
        return "COVERED"
    if final < PLATEAU_CEILING and final - mid < PLATEAU_RISE:
        return "PLATEAU"
    return "UNDECIDED"


def sweeping_classifier(seq: IntSequence, test_sets: Mapping[str, LazySet] | Sequence[LazySet],
                        Ks: Sequence[int], L: int, B: int, stride: int | None = None,
                        threads: int | None = None) -> ClassifierResult:
    """Covering curve per test set, then a heuristic verdict.

    SWEEPING-EVIDENCE when every curve exceeds 0.95; OBSTRUCTED when some curve
    ends below 0.9 and rose by less than 0.01 since its midpoint checkpoint.
    """
    if not isinstance(test_sets, Mapping):
        test_sets = {s.spec(): s for s in test_sets}
    names = list(test_sets)

    def one(name):
        rep = covering_curve(test_sets[name], seq, Ks, L, B, stride)
        return SetVerdict(name, rep, _status(rep))

    verdicts = tuple(pmap(one, names, threads))
    caveats = [CAVEAT_HEURISTIC]
    if seq.kind in ("poly_plus_log", "floor_log"):
        caveats.append(CAVEAT_SLOW)
    return ClassifierResult(seq.spec(), verdicts, tuple(caveats))


def to_json(obj) -> str:
    return json.dumps(obj.summary(), indent=2, sort_keys=True)
