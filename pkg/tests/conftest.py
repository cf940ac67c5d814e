"""Shared oracles: brute-force membership and bitset evaluation, independent of the engine."""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from densitylab.expr import Atom, Union

ACCEPTANCE_LINES: list[str] = []


def hindman_member(n: int) -> bool:
    if n < 1:
        return False
    k = (n.bit_length() - 1) // 2
    return 4 ** k <= n < 2 * 4 ** k


def beatty_member(n: int, beta: Fraction) -> bool:
    """Is ``n == floor(k * beta)`` for some integer ``k >= 0``?"""
    if n < 0:
        return False
    k = math.ceil(Fraction(n) / beta)
    return math.floor(k * beta) == n


def rotation_members(alpha_mp, u: Fraction, v: Fraction, lo: int, hi: int) -> set[int]:
    out = set()
    with mpmath.workprec(256):
        um = mpmath.mpf(u.numerator) / u.denominator
        vm = mpmath.mpf(v.numerator) / v.denominator
        for n in range(max(lo, 0), hi):
            x = mpmath.frac(n * alpha_mp)
            if um <= x < vm:
                out.add(n)
    return out


def bitset_eval(expr, members: set[int], lo: int, hi: int) -> np.ndarray:
    """Truth of ``expr`` at each ``n`` in ``[lo, hi)`` from a plain membership set."""
    pad = 64
    base = np.array([(n in members) for n in range(lo - pad, hi + pad)], dtype=bool)

    def rec(node):
        if isinstance(node, Atom):
            v = base[pad + node.shift: pad + node.shift + (hi - lo)]
            return ~v if node.complemented else v
        a, b = rec(node.left), rec(node.right)
        return (a | b) if isinstance(node, Union) else (a & b)

    return rec(expr)


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_expr(rng, pool, depth):
    """Random expression tree over atoms whose shifts come from ``pool``."""
    if depth == 0 or rng.random() < 0.25:
        return Atom(rng.choice(pool), rng.random() < 0.3)
    left = random_expr(rng, pool, depth - 1)
    right = random_expr(rng, pool, depth - 1)
    return (left | right) if rng.random() < 0.5 else (left & right)
