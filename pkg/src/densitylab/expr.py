"""Boolean expressions over shifted copies of a set and of its complement.

``Atom(h)`` stands for ``E - h = {n : n + h in E}`` and ``Atom(h, True)`` for
its complement inside the evaluation window. ``Union`` and ``Intersect``
combine them. Expressions support ``|``, ``&`` and ``~`` (negation is pushed
down to the atoms by De Morgan's laws, so trees only ever hold complemented
atoms).

Text grammar::

    expr  := term | term ("|" term)+ | term ("&" term)+
    term  := "~" term | atom | "(" expr ")"
    atom  := "E" ["@" integer]

e.g. ``((E@1 | ~E@2) & E@3)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import SpecSyntaxError


class _Ops:
    def __or__(self, other):
        return Union(self, other)

    def __and__(self, other):
        return Intersect(self, other)

    def __invert__(self):
        return negate(self)

    def __str__(self):
        return format_expr(self)


@dataclass(frozen=True, repr=False)
class Atom(_Ops):
    shift: int = 0
    complemented: bool = False

    def __repr__(self):
        return f"Atom({self.shift}{', True' if self.complemented else ''})"


@dataclass(frozen=True, repr=False)
class Union(_Ops):
    left: "ShiftExpr"
    right: "ShiftExpr"

    def __repr__(self):
        return f"Union({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Intersect(_Ops):
    left: "ShiftExpr"
    right: "ShiftExpr"

    def __repr__(self):
        return f"Intersect({self.left!r}, {self.right!r})"


ShiftExpr = Atom | Union | Intersect

#: the identity expression ``E``
E = Atom(0)


def atoms(expr: ShiftExpr) -> Iterator[Atom]:
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            yield node
        else:
            stack.append(node.right)
            stack.append(node.left)


def shifts(expr: ShiftExpr) -> tuple[int, ...]:
    """Distinct atom shifts in increasing order."""
    return tuple(sorted({a.shift for a in atoms(expr)}))


def max_abs_shift(expr: ShiftExpr) -> int:
    return max(abs(a.shift) for a in atoms(expr))


def n_atoms(expr: ShiftExpr) -> int:
    return sum(1 for _ in atoms(expr))


def depth(expr: ShiftExpr) -> int:
    if isinstance(expr, Atom):
        return 0
    return 1 + max(depth(expr.left), depth(expr.right))


def flatten(expr: ShiftExpr) -> list[ShiftExpr]:
    """Operands of a maximal chain of the same operator at the root."""
    kind = type(expr)
    out, stack = [], [expr]
    while stack:
        node = stack.pop()
        if type(node) is kind and not isinstance(node, Atom):
            stack.append(node.right)
            stack.append(node.left)
        else:
            out.append(node)
    return out


def negate(expr: ShiftExpr) -> ShiftExpr:
    if isinstance(expr, Atom):
        return Atom(expr.shift, not expr.complemented)
    if isinstance(expr, Union):
        return Intersect(negate(expr.left), negate(expr.right))
    return Union(negate(expr.left), negate(expr.right))


def _balanced(nodes: Sequence[ShiftExpr], kind) -> ShiftExpr:
    if not nodes:
        raise ValueError("need at least one operand")
    nodes = list(nodes)
    while len(nodes) > 1:
        nxt = [kind(nodes[i], nodes[i + 1]) for i in range(0, len(nodes) - 1, 2)]
        if len(nodes) % 2:
            nxt.append(nodes[-1])
        nodes = nxt
    return nodes[0]


def union_of(nodes: Sequence[ShiftExpr]) -> ShiftExpr:
    """Balanced union, so long chains stay shallow."""
    return _balanced(nodes, Union)


def intersection_of(nodes: Sequence[ShiftExpr]) -> ShiftExpr:
    return _balanced(nodes, Intersect)


def shift_union(ks: Sequence[int]) -> ShiftExpr:
    """``⋃ (E - k)`` over the distinct values in ``ks``."""
    return union_of([Atom(int(k)) for k in sorted(set(int(k) for k in ks))])


def eval_words(expr: ShiftExpr, codes: np.ndarray, shift_list: Sequence[int]) -> np.ndarray:
    """Truth value of ``expr`` on each word code.

    Bit ``i`` of a code is the membership indicator at offset ``shift_list[i]``.
    """
    index = {h: i for i, h in enumerate(shift_list)}
    codes = np.asarray(codes, dtype=np.int64)

    def rec(node):
        if isinstance(node, Atom):
            bit = ((codes >> index[node.shift]) & 1).astype(bool)
            return ~bit if node.complemented else bit
        parts = [rec(c) for c in flatten(node)]
        op = np.logical_or if isinstance(node, Union) else np.logical_and
        return op.reduce(parts)

    return rec(expr)


def format_expr(expr: ShiftExpr) -> str:
    if isinstance(expr, Atom):
        s = "~E" if expr.complemented else "E"
        return s if expr.shift == 0 else f"{s}@{expr.shift}"
    sep = " | " if isinstance(expr, Union) else " & "
    return "(" + sep.join(format_expr(c) for c in flatten(expr)) + ")"


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg):
        raise SpecSyntaxError(msg, self.text, self.pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def parse(self):
        node = self.expr()
        if self.peek():
            self.error("unexpected trailing input")
        return node

    def expr(self):
        first = self.term()
        op = self.peek()
        if op not in ("|", "&"):
            return first
        nodes = [first]
        while self.peek() == op:
            self.pos += 1
            nodes.append(self.term())
        if self.peek() in ("|", "&"):
            self.error("mixed '|' and '&' need parentheses")
        kind = Union if op == "|" else Intersect
        node = nodes[0]
        for nxt in nodes[1:]:
            node = kind(node, nxt)
        return node

    def term(self):
        ch = self.peek()
        if ch == "~":
            self.pos += 1
            return negate(self.term())
        if ch == "(":
            self.pos += 1
            node = self.expr()
            self.take(")")
            return node
        if ch == "E":
            self.pos += 1
            shift = 0
            if self.peek() == "@":
                self.pos += 1
                self.skip()
                start = self.pos
                if self.pos < len(self.text) and self.text[self.pos] in "+-":
                    self.pos += 1
                while self.pos < len(self.text) and self.text[self.pos].isdigit():
                    self.pos += 1
                digits = self.text[start:self.pos]
                if digits in ("", "+", "-"):
                    self.pos = start
                    self.error("expected integer shift")
                shift = int(digits)
            return Atom(shift)
        self.error("expected 'E', '~' or '('")


def parse_expr(text: str) -> ShiftExpr:
    """Parse the textual expression grammar; errors report the offending position."""
    return _Parser(text).parse()
