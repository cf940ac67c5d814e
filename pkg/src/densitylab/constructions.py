"""Builders for the named sets, plus the textual set-spec parser.

Set specs (CLI ``--set``)::

    hindman
    ab a=1/3 b=2/3
    rot alpha=golden u=0 v=0.5 x0=0
    blocks b=3/5
    periodic m=3 r=0,1
    evens | all | empty
    intervals [0,5)[9,12)
"""

from __future__ import annotations

import re
from fractions import Fraction

import mpmath

from .ddouble import DD
from .errors import SpecSyntaxError
from .lazysets import ABSet, BeattyRotation, ExplicitIntervals, HindmanBlocks, LazySet, Periodic


def _named_constants():
    with mpmath.workprec(256):
        sqrt5, sqrt2, sqrt3 = mpmath.sqrt(5), mpmath.sqrt(2), mpmath.sqrt(3)
        return {
            "golden": DD.from_mpf((sqrt5 - 1) / 2),
            "sqrt2": DD.from_mpf(sqrt2 - 1),
            "sqrt3": DD.from_mpf(sqrt3 - 1),
            "e": DD.from_mpf(mpmath.e - 2),
            "pi": DD.from_mpf(mpmath.pi - 3),
        }


#: fractional parts of common irrationals, exact to double-double precision
CONSTANTS: dict[str, DD] = _named_constants()

MIN_ALPHA_DIGITS = 31


def _significant_digits(text: str) -> int:
    mant = re.split(r"[eE]", text.strip().lstrip("+-"))[0].replace(".", "")
    return len(mant.lstrip("0"))


def parse_real(value, *, name: str = "value", min_digits: int = 0) -> DD:
    """Convert a named constant, decimal/fraction string, number or DD to DD."""
    if isinstance(value, DD):
        return value
    if isinstance(value, tuple):
        return DD(*value)
    if isinstance(value, Fraction):
        return DD.from_fraction(value)
    if isinstance(value, int):
        return DD(float(value))
    if isinstance(value, float):
        return DD(value)
    text = str(value).strip()
    if text in CONSTANTS:
        return CONSTANTS[text]
    if "/" in text:
        return DD.from_fraction(Fraction(text))
    if min_digits and _significant_digits(text) < min_digits:
        raise ValueError(
            f"{name}={text!r} has fewer than {min_digits} significant digits; "
            "pass a named constant or a longer decimal")
    try:
        return DD.from_string(text)
    except (ValueError, TypeError) as exc:
        raise ValueError(f"cannot parse {name}={text!r}") from exc


def hindman_set() -> HindmanBlocks:
    """``⋃ [4**n, 2 * 4**n)``: upper density 2/3 along dyadic windows."""
    return HindmanBlocks(Fraction(2, 3))


def block_family(b) -> HindmanBlocks:
    return HindmanBlocks(Fraction(b))


def ab_set(a, b) -> ABSet:
    return ABSet(Fraction(a), Fraction(b))


def rotation_return_set(alpha, x0=0, arc=(0, Fraction(1, 2))) -> BeattyRotation:
    """``{n >= 0 : frac(x0 + n*alpha) in [u, v)}``.

    ``alpha`` given as a decimal string must carry at least 31 significant
    digits; named constants (``golden``, ``sqrt2``, ...) are accepted as is.
    """
    u, v = arc
    return BeattyRotation(
        parse_real(alpha, name="alpha", min_digits=MIN_ALPHA_DIGITS),
        parse_real(u, name="u"),
        parse_real(v, name="v"),
        parse_real(x0, name="x0"),
    )


def periodic_set(modulus: int, residues) -> Periodic:
    return Periodic(modulus, residues)


def evens() -> Periodic:
    return Periodic(2, [0])


def integers() -> Periodic:
    return Periodic(1, [0])


def empty_set() -> ExplicitIntervals:
    return ExplicitIntervals([])


def explicit_set(intervals) -> ExplicitIntervals:
    return ExplicitIntervals(intervals)


# ---------------------------------------------------------------------------

_KV = re.compile(r"(\w+)=(\S+)")
_IVS = re.compile(r"\[(-?\d+),(-?\d+)\)")


def _params(text: str, rest: str, allowed: set[str], offset: int) -> dict[str, str]:
    out = {}
    pos = 0
    for m in _KV.finditer(rest):
        if rest[pos:m.start()].strip():
            raise SpecSyntaxError("unexpected token", text, offset + pos)
        key = m.group(1)
        if key not in allowed:
            raise SpecSyntaxError(f"unknown parameter {key!r}", text, offset + m.start())
        out[key] = m.group(2)
        pos = m.end()
    if rest[pos:].strip():
        raise SpecSyntaxError("unexpected token", text, offset + pos)
    return out


def parse_set(text: str) -> LazySet:
    """Build a set from its textual spec (see the module docstring)."""
    stripped = text.strip()
    if not stripped:
        raise SpecSyntaxError("empty set spec", text, 0)
    head, _, rest = stripped.partition(" ")
    offset = len(head) + 1
    try:
        if head == "hindman":
            _params(text, rest, set(), offset)
            return hindman_set()
        if head == "evens":
            _params(text, rest, set(), offset)
            return evens()
        if head == "all":
            _params(text, rest, set(), offset)
            return integers()
        if head == "empty":
            _params(text, rest, set(), offset)
            return empty_set()
        if head == "blocks":
            p = _params(text, rest, {"b"}, offset)
            return block_family(Fraction(p["b"]))
        if head == "ab":
            p = _params(text, rest, {"a", "b"}, offset)
            return ab_set(Fraction(p["a"]), Fraction(p["b"]))
        if head == "rot":
            p = _params(text, rest, {"alpha", "u", "v", "x0"}, offset)
            s = rotation_return_set(p.get("alpha", "golden"), p.get("x0", "0"),
                                    (p.get("u", "0"), p.get("v", "1/2")))
            s._name = " ".join(["rot"] + [f"{k}={p[k]}" for k in ("alpha", "u", "v", "x0") if k in p])
            return s
        if head == "periodic":
            p = _params(text, rest, {"m", "r"}, offset)
            return periodic_set(int(p["m"]), [int(r) for r in p.get("r", "0").split(",") if r])
        if head == "intervals":
            body = rest.replace(" ", "")
            pairs = [(int(a), int(b)) for a, b in _IVS.findall(body)]
            if _IVS.sub("", body):
                raise SpecSyntaxError("malformed interval list", text, offset)
            return explicit_set(pairs)
    except KeyError as exc:
        raise SpecSyntaxError(f"missing parameter {exc.args[0]!r}", text, offset) from None
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, SpecSyntaxError):
            raise
        raise SpecSyntaxError(str(exc), text, offset) from None
    raise SpecSyntaxError(f"unknown set kind {head!r}", text, 0)
