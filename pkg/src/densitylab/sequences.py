"""Integer sequences ``n -> k_n`` of the ergodic-sequence families.

Every real-valued family is a sum of terms ``coef * x**power * (log x)**log_power``
floored to an integer. Evaluation is vectorised in float64 and any value whose
fractional part lies within the float error margin of an integer is
re-evaluated exactly (rational arithmetic when the value is algebraic and
provably rational) or at 256-bit precision. A value still within ``1e-20`` of
an integer raises :class:`~densitylab.errors.PrecisionError`: an off-by-one in
``k_n`` would silently corrupt every Weyl sum built on it.

``log`` is the natural logarithm throughout. Sequence specs (CLI ``--seq``)::

    id
    pow b=1 c=1.4142135623730951
    powsum b=1 c=2 d=0.5 a=1.5
    powlog b=1 c=1.5 d=2
    powlogsum b=1 c=1 d=1 a=2
    log
    poly2log
    prime c=0.5
    list 1,4,9,16
"""

from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .errors import PrecisionError, RangeError, SpecSyntaxError

#: distance to the nearest integer below which a floor is refused
INTEGER_GUARD = 1e-20
_FLOAT_REL_MARGIN = 1e-13
_MP_PREC = 256
_MAX_VALUE = 2 ** 62
MAX_PRIME_INDEX = 50_000_000


@dataclass(frozen=True)
class Term:
    coef: Fraction
    power: Fraction = Fraction(0)
    log_power: Fraction = Fraction(0)

    def floats(self, x: np.ndarray, logx: np.ndarray) -> np.ndarray:
        v = float(self.coef) * np.power(x, float(self.power))
        if self.log_power != 0:
            with np.errstate(divide="ignore", invalid="ignore"):
                v = v * np.power(logx, float(self.log_power))
        return v

    def exact(self, n: int) -> Fraction | None:
        """The term as an exact rational, or ``None`` when it is irrational."""
        if self.log_power != 0:
            if n != 1:
                return None
            if self.log_power < 0:
                raise ValueError("(log n)**d with d < 0 is undefined at n = 1")
            return Fraction(0)
        p, q = self.power.numerator, self.power.denominator
        if q == 1:
            return self.coef * Fraction(n) ** p
        r = _iroot(n, q)
        if r is None:
            return None
        return self.coef * Fraction(r) ** p

    def mp(self, n: int):
        v = mpmath.mpf(self.coef.numerator) / self.coef.denominator
        if self.power != 0:
            v *= mpmath.power(n, mpmath.mpf(self.power.numerator) / self.power.denominator)
        if self.log_power != 0:
            v *= mpmath.power(mpmath.log(n), mpmath.mpf(self.log_power.numerator) / self.log_power.denominator)
        return v


def _iroot(n: int, q: int) -> int | None:
    if n in (0, 1):
        return n
    if n < 0 or q >= n.bit_length():
        return None
    r = round(n ** (1.0 / q))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** q == n:
            return cand
    return None


def floor_exact(terms: Sequence[Term], n: int) -> int:
    """``floor(sum of terms at n)`` evaluated exactly or at 256-bit precision."""
    exact = [t.exact(n) for t in terms]
    if all(v is not None for v in exact):
        return math.floor(sum(exact, Fraction(0)))
    with mpmath.workprec(_MP_PREC):
        v = mpmath.fsum(t.mp(n) for t in terms)
        k = mpmath.floor(v)
        dist = min(v - k, k + 1 - v)
        if dist < INTEGER_GUARD:
            raise PrecisionError(
                f"value at n={n} is within {float(dist):.3g} of an integer; floor is ambiguous",
                index=n, distance=float(dist))
        return int(k)


def floor_terms(terms: Sequence[Term], args) -> np.ndarray:
    """Vectorised ``floor(sum of terms)`` at each positive integer in ``args``."""
    args = np.asarray(args, dtype=np.int64)
    if len(args) and args.min() < 1:
        raise ValueError("sequence arguments must be >= 1")
    x = args.astype(np.float64)
    logx = np.log(x)
    total = np.zeros(len(x))
    mag = np.zeros(len(x))
    for t in terms:
        v = t.floats(x, logx)
        total += v
        mag += np.abs(v)
    with np.errstate(invalid="ignore"):
        fl = np.floor(total)
        fr = total - fl
        margin = _FLOAT_REL_MARGIN * (mag + 1.0)
        suspect = ~np.isfinite(total) | (fr < margin) | (fr > 1.0 - margin) | (args == 1)
    if np.any(np.abs(np.where(suspect, 0.0, total)) >= _MAX_VALUE):
        raise RangeError("sequence value exceeds 2**62")
    out = np.where(suspect, 0, fl).astype(np.int64)
    for i in np.flatnonzero(suspect):
        k = floor_exact(terms, int(args[i]))
        if abs(k) >= _MAX_VALUE:
            raise RangeError("sequence value exceeds 2**62")
        out[i] = k
    return out


# -- primes ---------------------------------------------------------------

_sieve_lock = threading.Lock()
_sieve: np.ndarray = np.array([2, 3, 5, 7, 11, 13], dtype=np.int64)
_sieve_limit = 14


def _sieve_upto(limit: int) -> np.ndarray:
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_p[p]:
            is_p[p * p::p] = False
    return np.flatnonzero(is_p).astype(np.int64)


def nth_prime_upper_bound(n: int) -> int:
    if n < 6:
        return 14
    ln = math.log(n)
    return int(n * (ln + math.log(ln))) + 3


def first_primes(n: int) -> np.ndarray:
    """The first ``n`` primes; the sieve is extended once and then shared read-only."""
    global _sieve, _sieve_limit
    if n > MAX_PRIME_INDEX:
        raise ValueError(f"prime index {n} outside sieved range (max {MAX_PRIME_INDEX})")
    with _sieve_lock:
        if len(_sieve) < n:
            limit = max(nth_prime_upper_bound(n), 2 * _sieve_limit)
            _sieve = _sieve_upto(limit)
            _sieve.setflags(write=False)
            _sieve_limit = limit
        return _sieve[:n]


# -- sequence types -------------------------------------------------------


class IntSequence:
    """Base class: ``eval(n)`` for ``n >= 1`` and ``values_up_to(N)``."""

    kind = "abstract"
    #: spec text as the user wrote it; overrides the generated one
    label: str | None = None

    def values_up_to(self, N: int) -> np.ndarray:
        raise NotImplementedError

    def eval(self, n: int) -> int:
        if n < 1:
            raise ValueError("sequence index starts at 1")
        return int(self._eval_many(np.array([n], dtype=np.int64))[0])

    def _eval_many(self, ns: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def spec(self) -> str:
        return self.label or self._spec_text()

    def _spec_text(self) -> str:
        raise NotImplementedError

    def __call__(self, n):
        return self.eval(n)

    def __repr__(self):
        return f"{type(self).__name__}({self.spec()!r})"


class TermSequence(IntSequence):
    """``k_n = floor(sum of terms at n)``."""

    def __init__(self, kind: str, terms: Sequence[Term], spec: str):
        self.kind = kind
        self.terms = tuple(terms)
        self._spec = spec

    def _eval_many(self, ns):
        return floor_terms(self.terms, ns)

    def values_up_to(self, N):
        if N < 1:
            raise ValueError("N must be >= 1")
        if self.kind == "identity":
            return np.arange(1, N + 1, dtype=np.int64)
        return floor_terms(self.terms, np.arange(1, N + 1, dtype=np.int64))

    def _spec_text(self):
        return self._spec


class PrimePowerSequence(IntSequence):
    """``k_n = floor(p_n ** c)`` with ``p_n`` the n-th prime."""

    kind = "prime_power"

    def __init__(self, c):
        c = Fraction(c)
        if c <= 0 or c.denominator == 1:
            raise ValueError("prime power exponent must be a positive non-integer")
        self.c = c
        self.terms = (Term(Fraction(1), c),)

    def _eval_many(self, ns):
        primes = first_primes(int(ns.max()))
        return floor_terms(self.terms, primes[ns - 1])

    def values_up_to(self, N):
        return floor_terms(self.terms, first_primes(N))

    def _spec_text(self):
        return f"prime c={_fmt(self.c)}"


class ExplicitSequence(IntSequence):
    kind = "explicit"

    def __init__(self, values):
        self.values = np.array([int(v) for v in values], dtype=np.int64)
        if len(self.values) == 0:
            raise ValueError("explicit sequence is empty")
        self.values.setflags(write=False)

    def _eval_many(self, ns):
        if ns.max() > len(self.values):
            raise IndexError(f"explicit sequence has only {len(self.values)} terms")
        return self.values[ns - 1]

    def values_up_to(self, N):
        if N > len(self.values):
            raise IndexError(f"explicit sequence has only {len(self.values)} terms")
        return self.values[:N].copy()

    def __len__(self):
        return len(self.values)

    def _spec_text(self):
        return "list " + ",".join(str(v) for v in self.values.tolist())


def _fmt(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    s = repr(float(x))
    return s if Fraction(s) == x else f"{x.numerator}/{x.denominator}"


def _nonzero(**kw):
    for k, v in kw.items():
        if v == 0:
            raise ValueError(f"{k} must be non-zero")


# -- builders -------------------------------------------------------------
# Restriction: the dominant term must have a positive coefficient, so that
# k_n >= 0 eventually.


def identity() -> TermSequence:
    return TermSequence("identity", [Term(Fraction(1), Fraction(1))], "id")


def floor_power(b, c) -> TermSequence:
    """``[b n^c]``, ``c > 1``."""
    b, c = Fraction(b), Fraction(c)
    _nonzero(b=b)
    if c <= 1:
        raise ValueError("need c > 1")
    if b < 0:
        raise ValueError("need b > 0 so that k_n >= 0 eventually")
    return TermSequence("floor_power", [Term(b, c)], f"pow b={_fmt(b)} c={_fmt(c)}")


def floor_power_sum(b, c, d, a) -> TermSequence:
    """``[b n^c + d n^a]``, ``c >= 1``, ``a > 0``, ``a != c``."""
    b, c, d, a = map(Fraction, (b, c, d, a))
    _nonzero(b=b, d=d)
    if c < 1 or a <= 0 or a == c:
        raise ValueError("need c >= 1, a > 0 and a != c")
    if (b if c > a else d) < 0:
        raise ValueError("dominant coefficient must be positive")
    return TermSequence("floor_power_sum", [Term(b, c), Term(d, a)],
                        f"powsum b={_fmt(b)} c={_fmt(c)} d={_fmt(d)} a={_fmt(a)}")


def floor_power_log(b, c, d) -> TermSequence:
    """``[b n^c (log n)^d]``, ``c > 1``.

    At ``n = 1`` the log factor is 0 for ``d > 0`` and 1 for ``d = 0``; for
    ``d < 0`` the first term is undefined and evaluation raises.
    """
    b, c, d = map(Fraction, (b, c, d))
    _nonzero(b=b)
    if c <= 1:
        raise ValueError("need c > 1")
    if b < 0:
        raise ValueError("need b > 0 so that k_n >= 0 eventually")
    return TermSequence("floor_power_log", [Term(b, c, d)],
                        f"powlog b={_fmt(b)} c={_fmt(c)} d={_fmt(d)}")


def floor_power_log_sum(b, c, d, a) -> TermSequence:
    """``[b n^c + d (log n)^a]``, ``c >= 1``, ``a > 1``."""
    b, c, d, a = map(Fraction, (b, c, d, a))
    _nonzero(b=b, d=d)
    if c < 1 or a <= 1:
        raise ValueError("need c >= 1 and a > 1")
    if b < 0:
        raise ValueError("need b > 0 so that k_n >= 0 eventually")
    return TermSequence("floor_power_log_sum", [Term(b, c), Term(d, Fraction(0), a)],
                        f"powlogsum b={_fmt(b)} c={_fmt(c)} d={_fmt(d)} a={_fmt(a)}")


def floor_log() -> TermSequence:
    """``[log n]``: takes every non-negative integer value, but is not ergodic."""
    return TermSequence("floor_log", [Term(Fraction(1), Fraction(0), Fraction(1))], "log")


def poly_plus_log() -> TermSequence:
    """``[n^2 + log n]``."""
    return TermSequence("poly_plus_log",
                        [Term(Fraction(1), Fraction(2)), Term(Fraction(1), Fraction(0), Fraction(1))],
                        "poly2log")


def prime_power(c) -> PrimePowerSequence:
    return PrimePowerSequence(Fraction(c))


def explicit(values) -> ExplicitSequence:
    return ExplicitSequence(values)


# -- spec parsing ---------------------------------------------------------

def _named_reals():
    with mpmath.workprec(200):
        vals = {"sqrt2": mpmath.sqrt(2), "sqrt3": mpmath.sqrt(3), "e": mpmath.e,
                "pi": mpmath.pi, "phi": (1 + mpmath.sqrt(5)) / 2}
        # exact rational images of the double-double roundings
        out = {}
        for k, v in vals.items():
            hi = float(v)
            lo = float(v - hi)
            out[k] = Fraction(hi) + Fraction(lo)
        return out


NAMED_REALS = _named_reals()


def parse_number(text: str) -> Fraction:
    text = text.strip()
    if text in NAMED_REALS:
        return NAMED_REALS[text]
    return Fraction(text)


_KV = re.compile(r"(\w+)=(\S+)")


def parse_sequence(text: str) -> IntSequence:
    """Build a sequence from its textual spec (see the module docstring)."""
    stripped = text.strip()
    head, _, rest = stripped.partition(" ")
    offset = len(head) + 1
    try:
        if head == "list":
            vals = [int(v) for v in rest.replace(" ", "").split(",") if v]
            return explicit(vals)
        params = {}
        pos = 0
        for m in _KV.finditer(rest):
            if rest[pos:m.start()].strip():
                raise SpecSyntaxError("unexpected token", text, offset + pos)
            params[m.group(1)] = parse_number(m.group(2))
            pos = m.end()
        if rest[pos:].strip():
            raise SpecSyntaxError("unexpected token", text, offset + pos)
        builders = {
            "id": (identity, ()),
            "log": (floor_log, ()),
            "poly2log": (poly_plus_log, ()),
            "pow": (floor_power, ("b", "c")),
            "powsum": (floor_power_sum, ("b", "c", "d", "a")),
            "powlog": (floor_power_log, ("b", "c", "d")),
            "powlogsum": (floor_power_log_sum, ("b", "c", "d", "a")),
            "prime": (prime_power, ("c",)),
        }
        if head not in builders:
            raise SpecSyntaxError(f"unknown sequence kind {head!r}", text, 0)
        fn, names = builders[head]
        unknown = set(params) - set(names)
        if unknown:
            raise SpecSyntaxError(f"unknown parameter {sorted(unknown)[0]!r}", text, offset)
        if head == "pow":
            params.setdefault("b", Fraction(1))
        seq = fn(*(params[n] for n in names))
        seq.label = " ".join(stripped.split())
        return seq
    except KeyError as exc:
        raise SpecSyntaxError(f"missing parameter {exc.args[0]!r}", text, offset) from None
    except SpecSyntaxError:
        raise
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecSyntaxError(str(exc), text, offset) from None
