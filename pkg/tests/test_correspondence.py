import random
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np
import pytest

from conftest import hindman_member, random_expr
from densitylab.constructions import evens, hindman_set, periodic_set, rotation_return_set
from densitylab.correspondence import (
    MAX_SHIFTS,
    CylinderSpec,
    EmpiricalMeasure,
    averaged_correlation,
    correspondence_table,
    cylinder_frequency,
    expr_via_cylinders,
    word_histogram,
)
from densitylab.engine import expr_density
from densitylab.expr import Atom, parse_expr, shift_union
from densitylab.folner import DyadicEven, InitialSegments
from densitylab.sets import Window


def hindman_mask(lo, hi):
    return np.array([hindman_member(n) for n in range(lo, hi)], dtype=bool)


def test_cylinder_spec_validation():
    assert CylinderSpec.from_pairs([(3, 1), (-1, 0)]) == CylinderSpec((-1, 3), (0, 1))
    assert CylinderSpec((0, 2), (1, 0)).shifted(5).shifts == (5, 7)
    with pytest.raises(ValueError):
        CylinderSpec((2, 1), (0, 0))
    with pytest.raises(ValueError):
        CylinderSpec((0,), (2,))


def test_hindman_block_top_cylinder():
    # n in E, n + 1 not in E: exactly the block tops 2*4^k - 1 inside the window
    w = Window(0, 2 ** 21)
    got = cylinder_frequency(hindman_set(), CylinderSpec((0, 1), (1, 0)), w)
    m = hindman_mask(0, 2 ** 21 + 1)
    assert got.numer == int(np.count_nonzero(m[:-1] & ~m[1:]))
    assert got.value == Fraction(11, 2 ** 21)


def test_histogram_matches_brute_force():
    src = rotation_return_set("e", arc=(Fraction(1, 5), Fraction(2, 3)))
    shifts = [-3, 0, 2, 7]
    w = Window(0, 2000)
    codes, weights = word_histogram(src, shifts, w)
    members = set(src.restrict((-10, 2010)))
    want = {}
    for n in range(w.lo, w.hi):
        c = sum(((n + h) in members) << i for i, h in enumerate(shifts))
        want[c] = want.get(c, 0) + 1
    assert dict(zip(codes.tolist(), weights.tolist())) == want


def test_expr_via_cylinders_agrees_with_direct_evaluation():
    rng = random.Random(9)
    sources = [hindman_set(), evens(), rotation_return_set("pi", arc=(Fraction(1, 3), Fraction(4, 5)))]
    pool = list(range(-6, 7))
    for _ in range(60):
        src = rng.choice(sources)
        e = random_expr(rng, pool, 6)
        w = Window(rng.randint(0, 500), rng.randint(1000, 4096))
        assert expr_via_cylinders(src, e, w) == expr_density(e, src, w)


def test_expr_via_cylinders_shift_cap():
    with pytest.raises(ValueError):
        expr_via_cylinders(evens(), shift_union(range(MAX_SHIFTS + 1)), (0, 100))


def test_partition_sums_to_one_and_memo_freezes():
    m = EmpiricalMeasure(hindman_set(), (0, 4096))
    part = m.partition([0, 1, 4])
    assert len(part) == 8
    assert sum(v.value for v in part.values()) == 1
    assert len(m) == 8
    spec = CylinderSpec((0, 1, 4), (1, 0, 1))
    assert m.frequency(spec) == part[(1, 0, 1)]
    m.freeze()
    m.frequency(CylinderSpec((0, 9), (1, 1)))
    assert len(m) == 8


def test_measure_concurrent_reads():
    m = EmpiricalMeasure(periodic_set(6, [0, 1, 4]), (0, 600))
    specs = [CylinderSpec((0, h), (1, 1)) for h in range(1, 30)]
    with ThreadPoolExecutor(4) as pool:
        got = list(pool.map(m.frequency, specs * 3))
    assert got[:29] == got[29:58] == got[58:]


def test_correspondence_table_and_flags():
    exprs = [Atom(0), parse_expr("E | E@1")]
    t = correspondence_table(hindman_set(), exprs, InitialSegments(), 64)
    assert len(t.rows) == 128
    assert t.to_csv().splitlines()[0] == "exprId,N,numer,denom,decimal"
    # initial segments of Hindman's set swing: the running max sits far above later values
    assert any(r.expr_id == 0 for r in t.flagged())
    t2 = correspondence_table(hindman_set(), [Atom(0)], DyadicEven(), 8)
    assert not t2.flagged()


def test_correspondence_table_thread_invariant():
    exprs = [parse_expr(s) for s in ("E", "E & ~E@3", "(E@1 | E@2) & ~E")]
    a = correspondence_table(rotation_return_set("golden"), exprs, InitialSegments(), 50, threads=1)
    b = correspondence_table(rotation_return_set("golden"), exprs, InitialSegments(), 50, threads=4)
    assert a.to_csv() == b.to_csv()


def test_averaged_correlation_brute_force():
    src = periodic_set(5, [0, 2])
    res = averaged_correlation(src, (0, 500), H=12)
    members = set(src.restrict((0, 520)))
    for h, p in enumerate(res.partials, start=1):
        tot = sum(1 for g in range(h) for n in range(500) if n in members and n + g in members)
        assert p == Fraction(tot, h * 500)
    assert res.reference == Fraction(4, 25)
    assert res.boundary == Fraction(23, 500)


def test_averaged_correlation_via_family():
    res = averaged_correlation(hindman_set(), family=DyadicEven(), K=5, H=20)
    assert res.window == DyadicEven().window(5)
    assert res.to_csv().splitlines()[-1].startswith("ref,")
    with pytest.raises(ValueError):
        averaged_correlation(hindman_set(), H=5)


def test_cylinder_trivial_cases():
    w = Window(0, 1000)
    assert cylinder_frequency(evens(), CylinderSpec((0, 1), (1, 0)), w).value == Fraction(1, 2)
    assert cylinder_frequency(hindman_set(), CylinderSpec((), ()), w).value == 1
    assert expr_via_cylinders(hindman_set(), Atom(0) | Atom(0, True), w).value == 1
    assert expr_via_cylinders(hindman_set(), Atom(0), w) == expr_density(Atom(0), hindman_set(), w)


def test_word_totals_are_one():
    rng = random.Random(12)
    srcs = [hindman_set(), rotation_return_set("sqrt3", arc=(Fraction(1, 4), Fraction(2, 3)))]
    for src in srcs:
        for k in (1, 5, 12):
            shift_list = sorted(rng.sample(range(-30, 31), k))
            m = EmpiricalMeasure(src, (0, 5000))
            assert sum(v.value for v in m.partition(shift_list).values()) == 1


def test_shift_invariance_up_to_boundary():
    rng = random.Random(13)
    src = rotation_return_set("golden", arc=(Fraction(1, 10), Fraction(6, 10)))
    w = Window(0, 3000)
    for _ in range(30):
        k = rng.randint(1, 5)
        spec = CylinderSpec.from_pairs(zip(rng.sample(range(-10, 11), k), [rng.randint(0, 1) for _ in range(k)]))
        s = rng.randint(-40, 40)
        diff = abs(cylinder_frequency(src, spec.shifted(s), w).value - cylinder_frequency(src, spec, w).value)
        assert diff <= Fraction(abs(s) + spec.spread, w.length)


def test_table_on_hindman_dyadic():
    exprs = [Atom(0), parse_expr("E | E@1"), parse_expr("~E & E@1")]
    t = correspondence_table(hindman_set(), exprs, DyadicEven(), 10)
    assert abs(t.final(0).value - Fraction(2, 3)) < Fraction(1, 1000)
    assert abs(t.final(1).value - Fraction(2, 3)) < Fraction(1, 1000)
    assert t.final(2).value <= Fraction(10 * 11, 2 ** 21)


def test_table_evens_periodic():
    t = correspondence_table(evens(), [parse_expr("E & E@2")], DyadicEven(), 6)
    assert all(r.value.value == Fraction(1, 2) for r in t.rows)


def test_averaged_correlation_examples():
    ev = averaged_correlation(evens(), (0, 10 ** 4), H=100)
    assert ev.final == Fraction(1, 4) and ev.reference == Fraction(1, 4)
    hd = averaged_correlation(hindman_set(), family=DyadicEven(), K=10, H=1000)
    assert hd.final >= Fraction(4, 9) - Fraction(2, 100)
