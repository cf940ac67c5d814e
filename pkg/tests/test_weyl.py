import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from densitylab.constructions import evens, rotation_return_set
from densitylab.sequences import NAMED_REALS, explicit, floor_log, floor_power, identity
from densitylab.weyl import (
    TrigPoly,
    correlation_vs_product,
    default_grid,
    ergodicity_scan,
    phases,
    spectral_identity_check,
    weyl_sum,
)

GOLDEN = (math.sqrt(5) - 1) / 2


def identity_closed_form(N, x):
    return abs(math.sin(math.pi * N * x)) / (N * abs(math.sin(math.pi * x)))


def test_default_grid():
    g = default_grid()
    assert len(g) == 16
    assert 0.25 not in g and 0.5 not in g and 0.05 in g


@pytest.mark.parametrize("N", [1, 10, 1000, 10 ** 5])
@pytest.mark.parametrize("x", [0.05, GOLDEN, 0.3])
def test_identity_matches_closed_form(N, x):
    assert weyl_sum(identity(), N, x) == pytest.approx(identity_closed_form(N, x), abs=1e-12)


def test_phases_exact_for_large_k():
    ks = np.array([10 ** 15 + 7, 2 ** 52 - 1])
    x = 0.1
    with mpmath.workprec(300):
        want = [float(mpmath.frac(int(k) * mpmath.mpf(x))) for k in ks]
    assert np.allclose(phases(ks, x), want, atol=1e-15)
    with pytest.raises(OverflowError):
        phases([2 ** 53], x)


def test_floor_log_half_against_counting_oracle():
    # (-1)^floor(log n) summed by counting n in each [ceil(e^k), ceil(e^(k+1)))
    N = 10 ** 4
    total, k = 0, 0
    while math.ceil(math.exp(k)) <= N:
        lo = math.ceil(math.exp(k))
        hi = min(math.ceil(math.exp(k + 1)), N + 1)
        total += (-1) ** k * (hi - lo)
        k += 1
    got = weyl_sum(floor_log(), N, 0.5)
    assert got == pytest.approx(abs(total) / N, abs=1e-12)


def test_floor_power_sqrt2_small_sum_against_cmath():
    seq = floor_power(1, NAMED_REALS["sqrt2"])
    ks = seq.values_up_to(2000).tolist()
    x = 0.35
    z = sum(cmath.exp(2j * math.pi * float(mpmath.frac(k * mpmath.mpf(x)))) for k in ks) / len(ks)
    assert weyl_sum(seq, 2000, x) == pytest.approx(abs(z), abs=1e-12)


def test_scan_verdicts_and_csv():
    rep = ergodicity_scan(identity(), [100, 10_000])
    assert all(v["verdict"] == "DECAYING" for v in rep.verdicts())
    assert rep.to_csv().splitlines()[0] == "x,N,magnitude"
    assert len(rep.to_csv().splitlines()) == 1 + 16 * 2
    rep = ergodicity_scan(explicit([4] * 50), [5, 50], x_grid=[0.3])
    assert rep.verdict(0.3) == "NOT-DECAYING"


def test_scan_is_thread_invariant():
    seq = floor_power(1, Fraction(3, 2))
    a = ergodicity_scan(seq, [100, 1000, 5000], threads=1)
    b = ergodicity_scan(seq, [100, 1000, 5000], threads=4)
    assert a.to_csv() == b.to_csv()


def test_scan_rejects_bad_checkpoints():
    with pytest.raises(ValueError):
        ergodicity_scan(identity(), [100, 10])
    with pytest.raises(ValueError):
        ergodicity_scan(identity(), [10], x_grid=[1.0])


def test_trig_poly_evaluation():
    rng = np.random.default_rng(1)
    f = TrigPoly.random(rng, 4)
    t = rng.random(20)
    direct = [sum(c * cmath.exp(2j * math.pi * j * s) for j, c in f.coeffs.items()) for s in t]
    assert np.allclose(f(t), direct, atol=1e-12)
    assert f.degree == 4


def test_spectral_monomial_is_weyl_squared():
    chk = spectral_identity_check(identity(), GOLDEN, TrigPoly.monomial(1), 100)
    assert chk.rhs == pytest.approx(identity_closed_form(100, GOLDEN) ** 2, abs=1e-12)
    assert chk.gap <= 1e-9


def test_spectral_random_polys():
    rng = np.random.default_rng(2)
    seq = floor_power(1, NAMED_REALS["sqrt2"])
    for _ in range(10):
        f = TrigPoly.random(rng, int(rng.integers(1, 8)))
        assert spectral_identity_check(seq, math.sqrt(3) - 1, f, 500).gap <= 1e-9


def test_spectral_rejects_small_grid():
    with pytest.raises(ValueError):
        spectral_identity_check(identity(), GOLDEN, TrigPoly.monomial(3), 10, grid_size=8)


def test_correlation_on_evens_exact():
    avg, prod = correlation_vs_product(identity(), evens(), 10, (0, 1000))
    assert avg == Fraction(1, 4) and prod == Fraction(1, 4)


def test_correlation_golden_near_product():
    avg, prod = correlation_vs_product(identity(), rotation_return_set("golden"), 1000, (0, 10 ** 5))
    assert abs(avg - prod) <= Fraction(2, 100)


def test_trivial_sums():
    assert weyl_sum(identity(), 2, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert weyl_sum(floor_log(), 1000, 0.0) == 1.0


def test_conjugate_symmetry():
    seq = floor_power(1, Fraction(3, 2))
    for x in (0.1, 0.37, GOLDEN):
        assert weyl_sum(seq, 3000, x) == pytest.approx(weyl_sum(seq, 3000, 1 - x), abs=1e-12)


def test_summation_order_insensitive():
    from densitylab.weyl import weyl_magnitude
    ks = floor_power(1, NAMED_REALS["sqrt2"]).values_up_to(10 ** 6)
    for x in (0.05, 0.35, 0.85):
        assert abs(weyl_magnitude(ks, x) - weyl_magnitude(ks[::-1].copy(), x)) < 1e-10


def test_floor_power_sqrt2_small_at_million():
    rep = ergodicity_scan(floor_power(1, NAMED_REALS["sqrt2"]), [10 ** 6])
    assert rep.max_magnitude(10 ** 6) < 0.1


def test_spectral_constant_is_zero():
    chk = spectral_identity_check(floor_log(), GOLDEN, TrigPoly({0: 2.5}), 500)
    assert chk.lhs == pytest.approx(0.0, abs=1e-20) and chk.rhs == 0.0


def test_correlation_full_arc():
    avg, prod = correlation_vs_product(identity(), rotation_return_set("golden", arc=(0, 1)), 100, (0, 10 ** 4))
    assert avg == prod == 1


def test_floor_log_non_ergodicity_witness():
    # frozen by pilot search over named constants and arcs
    src = rotation_return_set("sqrt2", arc=(0, Fraction(1, 2)))
    avg, prod = correlation_vs_product(floor_log(), src, 1000, (0, 10 ** 6))
    assert abs(avg - prod) > Fraction(5, 100)
