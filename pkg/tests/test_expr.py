import random

import numpy as np
import pytest

from conftest import random_expr
from densitylab.errors import SpecSyntaxError
from densitylab.expr import (
    Atom,
    Intersect,
    Union,
    atoms,
    depth,
    eval_words,
    format_expr,
    max_abs_shift,
    n_atoms,
    negate,
    parse_expr,
    shift_union,
    shifts,
)


def test_parse_example():
    e = parse_expr("((E@1 | ~E@2) & E@3)")
    assert e == Intersect(Union(Atom(1), Atom(2, True)), Atom(3))
    assert shifts(e) == (1, 2, 3)
    assert max_abs_shift(e) == 3
    assert n_atoms(e) == 3


def test_negation_pushed_to_atoms():
    e = parse_expr("~(E | E@-4)")
    assert e == Intersect(Atom(0, True), Atom(-4, True))
    assert negate(negate(e)) == e
    assert all(isinstance(a, Atom) for a in atoms(~e))


@pytest.mark.parametrize("text, pos", [
    ("E |", 3),
    ("E | E & E", 6),
    ("(E", 2),
    ("E@", 2),
    ("F", 0),
    ("E E", 2),
])
def test_parse_errors_report_position(text, pos):
    with pytest.raises(SpecSyntaxError) as info:
        parse_expr(text)
    assert info.value.position == pos


def test_format_round_trip():
    rng = random.Random(7)
    for _ in range(200):
        e = random_expr(rng, list(range(-6, 7)), 5)
        text = format_expr(e)
        assert format_expr(parse_expr(text)) == text


def test_shift_union_dedupes():
    e = shift_union([3, 1, 2, 1])
    assert shifts(e) == (1, 2, 3)
    assert depth(e) == 2


def test_eval_words_matches_direct_truth():
    rng = random.Random(11)
    pool = [-2, 0, 1, 5]
    for _ in range(50):
        e = random_expr(rng, pool, 4)
        sl = list(shifts(e))
        codes = np.arange(1 << len(sl))
        got = eval_words(e, codes, sl)
        for c in range(1 << len(sl)):
            bits = {h: bool((c >> i) & 1) for i, h in enumerate(sl)}
            assert got[c] == _truth(e, bits)


def _truth(node, bits):
    if isinstance(node, Atom):
        return bits[node.shift] != node.complemented
    a, b = _truth(node.left, bits), _truth(node.right, bits)
    return (a or b) if isinstance(node, Union) else (a and b)
