import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from densitylab.errors import PrecisionError, SpecSyntaxError
from densitylab.sequences import (
    NAMED_REALS,
    explicit,
    first_primes,
    floor_log,
    floor_power,
    floor_power_log,
    floor_power_log_sum,
    floor_power_sum,
    floor_terms,
    identity,
    parse_sequence,
    poly_plus_log,
    prime_power,
)


def mp_floor(fn, n):
    with mpmath.workdps(60):
        return int(mpmath.floor(fn(mpmath.mpf(n))))


def naive_primes(n):
    out, k = [], 2
    while len(out) < n:
        if all(k % p for p in out if p * p <= k):
            out.append(k)
        k += 1
    return out


def test_identity_and_log_values():
    assert identity().values_up_to(5).tolist() == [1, 2, 3, 4, 5]
    vals = floor_log().values_up_to(3000)
    assert vals[0] == 0
    # floor(log n) steps exactly at ceil(e^k)
    for k in range(1, 8):
        first = int(np.argmax(vals >= k)) + 1
        assert first == math.ceil(math.exp(k))


def test_floor_power_sqrt2_against_mpmath():
    seq = floor_power(1, NAMED_REALS["sqrt2"])
    got = seq.values_up_to(5000)
    with mpmath.workdps(60):
        c = mpmath.sqrt(2)
    assert got.tolist() == [mp_floor(lambda x: x ** c, n) for n in range(1, 5001)]


def test_integer_valued_points_refined_exactly():
    # n^(3/2) is an integer at perfect squares; float noise must not drop it by one
    seq = floor_power(1, Fraction(3, 2))
    for r in range(1, 3000, 37):
        assert seq.eval(r * r) == r ** 3
    assert floor_power(Fraction(1, 3), 2).eval(3) == 3


@pytest.mark.parametrize("seq, fn", [
    (floor_power_sum(1, 2, Fraction(1, 2), Fraction(3, 2)),
     lambda x: x ** 2 + x ** mpmath.mpf(1.5) / 2),
    (floor_power_log(1, Fraction(3, 2), 2), lambda x: x ** mpmath.mpf(1.5) * mpmath.log(x) ** 2),
    (floor_power_log_sum(1, 1, 1, 2), lambda x: x + mpmath.log(x) ** 2),
    (poly_plus_log(), lambda x: x ** 2 + mpmath.log(x)),
])
def test_families_against_mpmath(seq, fn):
    got = seq.values_up_to(2000).tolist()
    assert got == [mp_floor(fn, n) for n in range(1, 2001)]


def test_log_power_at_one():
    assert floor_power_log(1, 2, 1).eval(1) == 0
    assert floor_power_log(1, 2, 0).eval(1) == 1
    with pytest.raises(ValueError):
        floor_power_log(1, 2, -1).eval(1)


def test_prime_power_matches_naive_primes():
    ps = naive_primes(3000)
    assert first_primes(3000).tolist() == ps
    got = prime_power(Fraction(1, 2)).values_up_to(3000).tolist()
    assert got == [math.isqrt(p) for p in ps]
    assert prime_power(Fraction(3, 2)).eval(10) == math.isqrt(29 ** 3)


def test_sieve_is_shared_and_readonly():
    with ThreadPoolExecutor(4) as pool:
        outs = list(pool.map(first_primes, [10_000, 20_000, 5_000, 20_000]))
    assert outs[1].tolist() == outs[3].tolist()
    assert outs[2].tolist() == outs[1][:5000].tolist()
    with pytest.raises(ValueError):
        outs[0][0] = 4


def test_ambiguous_floor_raises():
    seq = floor_power_sum(1, 2, Fraction(1, 10 ** 25), Fraction(1, 2))
    with pytest.raises(PrecisionError):
        seq.eval(2)


def test_builders_validate():
    with pytest.raises(ValueError):
        floor_power(1, 1)
    with pytest.raises(ValueError):
        floor_power(-1, 2)
    with pytest.raises(ValueError):
        floor_power_sum(1, 2, 1, 2)
    with pytest.raises(ValueError):
        floor_power_log_sum(1, 1, 1, 1)
    with pytest.raises(ValueError):
        prime_power(2)


def test_explicit_sequence():
    s = explicit([1, 4, 9])
    assert s.values_up_to(3).tolist() == [1, 4, 9]
    assert s.eval(2) == 4
    with pytest.raises(IndexError):
        s.values_up_to(4)


@pytest.mark.parametrize("text, first", [
    ("id", [1, 2, 3]),
    ("pow c=2", [1, 4, 9]),
    ("pow b=1/2 c=2", [0, 2, 4]),
    ("powsum b=1 c=2 d=1 a=1", [2, 6, 12]),
    ("log", [0, 0, 1]),
    ("prime c=0.5", [1, 1, 2]),
    ("list 5,7,9", [5, 7, 9]),
])
def test_parse_sequence(text, first):
    seq = parse_sequence(text)
    assert seq.values_up_to(3).tolist() == first
    assert seq.spec() == " ".join(text.split())


@pytest.mark.parametrize("text", ["nope", "pow", "pow c=2 x=1", "pow c=2 junk", "pow c=1/0", "prime c=2"])
def test_parse_sequence_errors(text):
    with pytest.raises(SpecSyntaxError):
        parse_sequence(text)


def test_floor_power_random_points_against_256_bit():
    rng = np.random.default_rng(4)
    ns = rng.integers(1, 10 ** 7 + 1, size=10 ** 4)
    c = NAMED_REALS["sqrt2"]
    vals = floor_terms(floor_power(1, c).terms, ns)
    with mpmath.workprec(256):
        cm = mpmath.mpf(c.numerator) / c.denominator
        for n, k in zip(ns.tolist(), vals.tolist()):
            exact = mpmath.power(n, cm)
            assert 0 <= exact - k < 1
