"""Seeded property checks over every module.

Each check draws its randomness from its own generator, derived from the run
seed and the check name, so results do not depend on scheduling. The report
holds no timings and no thread counts; two runs with the same seed produce
identical text.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np

from ._parallel import pmap
from .constructions import (
    CONSTANTS,
    ab_set,
    evens,
    explicit_set,
    hindman_set,
    integers,
    periodic_set,
    rotation_return_set,
)
from .correspondence import (
    CylinderSpec,
    EmpiricalMeasure,
    averaged_correlation,
    cylinder_frequency,
    expr_via_cylinders,
)
from .engine import banach_lower_bound, eval_expr, upper_density_along
from .experiments import complement_witness_search, covering_curve, hindman_counterexample
from .expr import Atom, Intersect, Union, format_expr, parse_expr
from .folner import DyadicEven, InitialSegments, ShiftedIntervals
from .sequences import floor_log, floor_power, identity, poly_plus_log, prime_power
from .sets import DensityValue, Window, WindowSet
from .weyl import TrigPoly, spectral_identity_check, weyl_magnitude, weyl_sum

CHECKS: list[tuple[str, Callable]] = []


def check(name):
    def deco(fn):
        CHECKS.append((name, fn))
        return fn
    return deco


def random_points(rng: random.Random, lo: int, hi: int) -> set[int]:
    p = rng.random()
    return {n for n in range(lo, hi) if rng.random() < p}


def random_expr(rng: random.Random, depth: int, pool) -> object:
    if depth == 0 or rng.random() < 0.25:
        return Atom(rng.choice(pool), rng.random() < 0.3)
    kind = Union if rng.random() < 0.5 else Intersect
    return kind(random_expr(rng, depth - 1, pool), random_expr(rng, depth - 1, pool))


def random_source(rng: random.Random):
    pick = rng.randrange(5)
    if pick == 0:
        return hindman_set()
    if pick == 1:
        m = rng.randint(2, 9)
        return periodic_set(m, rng.sample(range(m), rng.randint(1, m - 1)))
    if pick == 2:
        u = Fraction(rng.randint(0, 80), 100)
        return rotation_return_set(rng.choice(sorted(CONSTANTS)), arc=(u, u + Fraction(rng.randint(5, 20), 100)))
    if pick == 3:
        return ab_set(Fraction(1, 3), Fraction(2, 3))
    pts = sorted(random_points(rng, -40, 4200))
    return explicit_set([(p, p + 1) for p in pts])


def bitset_expr(expr, members: set[int], lo: int, hi: int) -> int:
    def holds(node, n):
        if isinstance(node, Atom):
            v = (n + node.shift) in members
            return not v if node.complemented else v
        if isinstance(node, Union):
            return holds(node.left, n) or holds(node.right, n)
        return holds(node.left, n) and holds(node.right, n)
    return sum(1 for n in range(lo, hi) if holds(expr, n))


# -- core sets -----------------------------------------------------------------


@check("sets.algebra_matches_python_sets")
def _(rng):
    for _ in range(40):
        lo = rng.randint(-50, 50)
        w = Window(lo, lo + rng.randint(1, 120))
        a, b = random_points(rng, w.lo, w.hi), random_points(rng, w.lo, w.hi)
        A, B = WindowSet.from_points(w, a), WindowSet.from_points(w, b)
        full = set(range(w.lo, w.hi))
        pairs = [(A | B, a | b), (A & B, a & b), (~A, full - a), (A - B, a - b)]
        for got, want in pairs:
            if set(got) != want or got.count != len(want):
                return False, f"mismatch on {w}"
        if ~(A | B) != (~A & ~B):
            return False, "De Morgan fails"
        if WindowSet.parse(A.serialize()) != A:
            return False, "serialize round trip fails"
    return True, "40 random pairs"


@check("sets.shift_is_pointwise")
def _(rng):
    for _ in range(30):
        w = Window(0, 200)
        pts = random_points(rng, 0, 200)
        A = WindowSet.from_points(w, pts)
        h = rng.randint(-20, 20)
        target = Window(max(0, -h), min(200, 200 - h))
        got = A.shift(h, target)
        want = {n for n in range(target.lo, target.hi) if n + h in pts}
        if set(got) != want:
            return False, f"shift {h} wrong"
    return True, "30 shifts"


@check("sets.density_decimal_rendering")
def _(rng):
    for _ in range(200):
        d = rng.randint(1, 10 ** 15)
        v = DensityValue(rng.randint(0, d), d)
        text = v.decimal()
        if abs(Fraction(text) - v.value) > Fraction(1, 2 * 10 ** 12):
            return False, f"{v} rendered as {text}"
    return True, "200 values within half a unit of the 12th place"


# -- constructions -------------------------------------------------------------


@check("constructions.restrict_is_consistent")
def _(rng):
    for _ in range(20):
        src = random_source(rng)
        big = src.restrict((-64, 5000))
        lo = rng.randint(-64, 4000)
        hi = rng.randint(lo + 1, 5000)
        if src.restrict((lo, hi)) != big.restrict((lo, hi)):
            return False, f"{src.spec()} on [{lo},{hi})"
        n = rng.randint(-64, 4999)
        if (n in src) != (n in big):
            return False, f"membership of {n} in {src.spec()}"
    return True, "20 random sources"


@check("constructions.hindman_dyadic_counts")
def _(rng):
    for N in range(1, 13):
        want = Fraction((4 ** (N + 1) - 1) // 3, 2 ** (2 * N + 1))
        got = upper_density_along(hindman_set(), DyadicEven(), N).final.value
        if got != want:
            return False, f"N={N}: {got} != {want}"
    return True, "N=1..12 exact"


@check("constructions.rotation_three_distance")
def _(rng):
    for _ in range(6):
        u = Fraction(rng.randint(0, 70), 100)
        E = rotation_return_set(rng.choice(sorted(CONSTANTS)), arc=(u, u + Fraction(rng.randint(5, 30), 100)))
        pts = np.array(list(E.restrict((0, 20000))))
        gaps = set(np.diff(pts).tolist())
        if len(gaps) > 3:
            return False, f"{E.spec()} has gaps {sorted(gaps)}"
    return True, "6 rotation sets"


@check("constructions.rotation_matches_mpmath")
def _(rng):
    with mpmath.workprec(256):
        alpha = (mpmath.sqrt(5) - 1) / 2
        E = rotation_return_set("golden")
        for _ in range(300):
            n = rng.randrange(0, 10 ** 9)
            x = mpmath.frac(n * alpha)
            if (x < mpmath.mpf(1) / 2) != (n in E):
                return False, f"n={n}"
    return True, "300 indices"


@check("constructions.folner_defect")
def _(rng):
    for fam in (InitialSegments(), DyadicEven(), ShiftedIntervals.drifting()):
        for _ in range(10):
            N = rng.randint(1, 6)
            g = rng.randint(-40, 40)
            w = fam.window(N)
            F = set(range(w.lo, w.hi))
            sym = len(F ^ {n - g for n in F})
            if fam.defect(N, g) != Fraction(sym, w.length):
                return False, f"{fam.spec()} N={N} g={g}"
    return True, "three families"


# -- engine ------------------------------------------------------------------------


@check("engine.routes_agree_with_bitset")
def _(rng):
    for _ in range(25):
        src = random_source(rng)
        expr = random_expr(rng, 4, list(range(-8, 9)))
        w = Window(rng.randint(0, 100), rng.randint(200, 1200))
        members = set(src.restrict(w.pad(8)))
        want = bitset_expr(expr, members, w.lo, w.hi)
        a = eval_expr(expr, src, w, route="mask")
        b = eval_expr(expr, src, w, route="intervals")
        if a != b or a.count != want:
            return False, f"{format_expr(expr)} on {src.spec()}"
    return True, "25 expressions"


@check("engine.expression_text_round_trip")
def _(rng):
    for _ in range(100):
        e = random_expr(rng, 5, list(range(-16, 17)))
        if parse_expr(format_expr(e)) != e and format_expr(parse_expr(format_expr(e))) != format_expr(e):
            return False, format_expr(e)
    return True, "100 expressions"


@check("engine.banach_bound_is_attained")
def _(rng):
    for _ in range(8):
        src = random_source(rng)
        b = banach_lower_bound(src, 64, 2048, 16)
        direct = src.restrict(b.witness).count
        if direct != b.value.numer or b.value.denom != 64:
            return False, src.spec()
    return True, "8 sources"


# -- sequences ----------------------------------------------------------------------


@check("sequences.floor_power_vs_mpmath")
def _(rng):
    c = Fraction(CONSTANTS["sqrt2"].to_fraction() + 1)
    seq = floor_power(1, c)
    ns = sorted(rng.randrange(1, 10 ** 7) for _ in range(300))
    with mpmath.workprec(256):
        cm = mpmath.mpf(c.numerator) / c.denominator
        for n in ns:
            k = seq.eval(n)
            if int(mpmath.floor(mpmath.power(n, cm))) != k:
                return False, f"n={n}"
    return True, "300 indices"


@check("sequences.floor_log_image_and_monotone")
def _(rng):
    N = rng.randint(100, 100000)
    v = floor_log().values_up_to(N)
    if set(v.tolist()) != set(range(int(math.log(N)) + 1)):
        return False, f"image at N={N}"
    for seq in (floor_power(1, Fraction(3, 2)), poly_plus_log()):
        w = seq.values_up_to(2000)
        if np.any(np.diff(w) < 0):
            return False, seq.spec()
    if prime_power(Fraction(1, 2)).values_up_to(4).tolist() != [1, 1, 2, 2]:
        return False, "prime power"
    return True, f"N={N}"


# -- weyl ----------------------------------------------------------------------------


@check("weyl.bounds_and_symmetry")
def _(rng):
    for seq in (identity(), floor_log(), floor_power(1, Fraction(3, 2)), poly_plus_log()):
        N = rng.randint(1, 5000)
        ks = seq.values_up_to(N)
        if weyl_magnitude(ks, 0.0) != 1.0:
            return False, "S_N(0) != 1"
        x = rng.random()
        a, b = weyl_magnitude(ks, x), weyl_magnitude(ks, 1.0 - x)
        r = weyl_magnitude(ks[::-1], x)
        if not 0.0 <= a <= 1.0 or abs(a - b) > 1e-12 or abs(a - r) > 1e-12:
            return False, seq.spec()
    return True, "four sequences"


@check("weyl.spectral_identity")
def _(rng):
    nrng = np.random.default_rng(rng.randrange(2 ** 32))
    worst = 0.0
    for _ in range(10):
        f = TrigPoly.random(nrng, rng.randint(0, 8))
        seq = rng.choice([identity(), floor_log(), floor_power(1, Fraction(3, 2))])
        res = spectral_identity_check(seq, rng.random(), f, rng.randint(1, 3000))
        worst = max(worst, res.gap)
    if worst > 1e-9:
        return False, f"gap {worst:.3e}"
    return True, "10 polynomials, gap <= 1e-9"


@check("weyl.identity_closed_form")
def _(rng):
    x = float(CONSTANTS["golden"])
    for N in (10, 100, 1000, 12345):
        exact = abs(math.sin(math.pi * N * x)) / (N * abs(math.sin(math.pi * x)))
        if abs(weyl_sum(identity(), N, x) - exact) > 1e-12:
            return False, f"N={N}"
    return True, "geometric-series closed form"


# -- correspondence ------------------------------------------------------------------


@check("correspondence.word_totals")
def _(rng):
    for _ in range(10):
        src = random_source(rng)
        k = rng.randint(0, 8)
        sh = sorted(rng.sample(range(-12, 13), k))
        m = EmpiricalMeasure(src, (0, 3000))
        total = sum(v.value for v in m.partition(sh).values())
        if total != 1:
            return False, src.spec()
        for word, v in list(m.partition(sh).items())[:4]:
            if cylinder_frequency(src, CylinderSpec(tuple(sh), word), (0, 3000)) != v:
                return False, "partition disagrees with cylinder frequency"
    return True, "10 shift tuples"


@check("correspondence.dual_evaluation")
def _(rng):
    for _ in range(40):
        src = random_source(rng)
        pool = rng.sample(range(-16, 17), 10)
        e = random_expr(rng, 6, pool)
        w = (0, rng.randint(100, 4096))
        a, b = expr_via_cylinders(src, e, w), eval_expr(e, src, w).density()
        if a.numer != b.numer or a.denom != b.denom:
            return False, format_expr(e)
    return True, "40 expressions"


@check("correspondence.averaged_correlation_lower_bound")
def _(rng):
    for src, w in ((evens(), (0, 100000)), (hindman_set(), (0, 2 ** 17)),
                   (rotation_return_set("golden"), (0, 200000))):
        ac = averaged_correlation(src, w, 200)
        if ac.min_excess() < -ac.boundary:
            return False, src.spec()
    return True, "evens, Hindman, golden rotation"


# -- experiments --------------------------------------------------------------------


@check("experiments.counterexample_bound")
def _(rng):
    table = hindman_counterexample(8, [0, 1, 10])
    return table.all_within, f"{len(table.rows)} rows"


@check("experiments.periodic_covering_closed_form")
def _(rng):
    for _ in range(5):
        m = rng.randint(2, 8)
        res = sorted(rng.sample(range(m), rng.randint(1, m - 1)))
        src = periodic_set(m, res)
        rep = covering_curve(src, identity(), list(range(1, m + 1)), 8 * m, 64 * m, 1)
        for row in rep.rows:
            covered = {(r - i) % m for r in res for i in range(1, row.K + 1)}
            if row.value.value != Fraction(len(covered), m):
                return False, f"m={m} K={row.K}"
        if rep.values[-1].value != 1 or not rep.is_monotone():
            return False, f"m={m} final"
    return True, "5 periodic sets"


@check("experiments.witness_controls")
def _(rng):
    if complement_witness_search(integers(), 5, 100, 1000).best is not None:
        return False, "full set gave a witness"
    got = complement_witness_search(evens(), 3, 100, 1000).best
    if got is None or got[0] != 1 or got[1].value.value != Fraction(1, 2):
        return False, "evens witness"
    return True, "full set and evens"


def run_selftest(seed: int = 0, threads: int | None = None) -> tuple[str, bool]:
    """Run every check; return the report text and overall success."""

    def one(item):
        name, fn = item
        rng = random.Random(f"{seed}:{name}")
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crash is a failed check, not a crashed run
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        return name, bool(ok), detail

    results = pmap(one, CHECKS, threads)
    lines = [f"selftest seed={seed}"]
    for name, ok, detail in results:
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    n_ok = sum(ok for _, ok, _ in results)
    lines.append(f"{n_ok}/{len(results)} checks passed")
    return "\n".join(lines) + "\n", n_ok == len(results)
