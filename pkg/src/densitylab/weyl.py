"""Weyl sums of integer sequences and the spectral identity on circle rotations.

``S_N(x) = (1/N) sum_{n=1..N} exp(2 pi i k_n x)``. Phases ``frac(k_n x)`` are
formed with an error-free product, so large ``k_n`` cost no accuracy, and the
real and imaginary parts are summed with ``math.fsum`` (exactly rounded, hence
independent of summation order).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from ._parallel import pmap
from .ddouble import exact_frac_times
from .engine import Evaluator
from .lazysets import LazySet
from .sequences import IntSequence
from .sets import as_window

TWO_PI = 2.0 * math.pi
_K_LIMIT = 2 ** 53

#: an x decays when |S_Nmax(x)| <= DECAY_RATIO * |S_Nmin(x)|
DECAY_RATIO = 1.0 / 3.0
RATIO_FLOOR = 1e-12


def _check_k(ks: np.ndarray):
    if len(ks) and int(np.max(np.abs(ks))) >= _K_LIMIT:
        raise OverflowError("sequence values must stay below 2**53 in magnitude")


def phases(ks, x) -> np.ndarray:
    """``frac(k * x)`` for every ``k``."""
    ks = np.asarray(ks, dtype=np.int64)
    _check_k(ks)
    return exact_frac_times(ks, float(x))


def weyl_sum_complex(ks, x) -> complex:
    """``(1/N) sum exp(2 pi i k x)`` over the given values."""
    ks = np.asarray(ks, dtype=np.int64)
    if len(ks) == 0:
        raise ValueError("need at least one term")
    t = TWO_PI * phases(ks, x)
    n = len(ks)
    return complex(math.fsum(np.cos(t)) / n, math.fsum(np.sin(t)) / n)


def weyl_magnitude(ks, x) -> float:
    z = weyl_sum_complex(ks, x)
    return min(1.0, math.hypot(z.real, z.imag))


def weyl_sum(seq: IntSequence, N: int, x) -> float:
    """``|S_N(x)|`` for the sequence."""
    if N < 1:
        raise ValueError("N must be >= 1")
    x = float(x)
    if not 0.0 <= x < 1.0:
        raise ValueError("x must lie in [0, 1)")
    return weyl_magnitude(seq.values_up_to(N), x)


def default_grid() -> list[float]:
    """``0.05, 0.10, ..., 0.95`` without the rationals of denominator <= 4."""
    return [k / 20 for k in range(1, 20) if Fraction(k, 20).denominator > 4]


@dataclass(frozen=True)
class WeylReport:
    seq_id: str
    checkpoints: tuple[int, ...]
    x_grid: tuple[float, ...]
    magnitudes: np.ndarray  # shape (len(x_grid), len(checkpoints))

    def ratio(self, i: int) -> float:
        first, last = self.magnitudes[i, 0], self.magnitudes[i, -1]
        return float(last / max(first, RATIO_FLOOR))

    def verdicts(self) -> list[dict]:
        out = []
        for i, x in enumerate(self.x_grid):
            r = self.ratio(i)
            out.append({"x": x, "ratio": round(r, 12),
                        "verdict": "DECAYING" if r <= DECAY_RATIO else "NOT-DECAYING"})
        return out

    def verdict(self, x: float) -> str:
        return self.verdicts()[self.x_grid.index(x)]["verdict"]

    def max_magnitude(self, N: int) -> float:
        return float(np.max(self.magnitudes[:, self.checkpoints.index(N)]))

    def to_csv(self) -> str:
        lines = ["x,N,magnitude"]
        for i, x in enumerate(self.x_grid):
            for j, N in enumerate(self.checkpoints):
                lines.append(f"{x!r},{N},{self.magnitudes[i, j]:.12f}")
        return "\n".join(lines) + "\n"

    def verdict_json(self) -> str:
        block = {
            "seq": self.seq_id,
            "checkpoints": list(self.checkpoints),
            "rule": "DECAYING when |S_Nmax(x)| <= |S_Nmin(x)| / 3 (heuristic)",
            "verdicts": self.verdicts(),
        }
        return json.dumps(block, indent=2, sort_keys=True)


def ergodicity_scan(seq: IntSequence, checkpoints: Sequence[int], x_grid=None,
                    threads: int | None = None) -> WeylReport:
    """``|S_N(x)|`` for every checkpoint ``N`` and grid point ``x``."""
    checkpoints = tuple(int(N) for N in checkpoints)
    if not checkpoints or any(N < 1 for N in checkpoints):
        raise ValueError("checkpoints must be positive")
    if any(a >= b for a, b in zip(checkpoints, checkpoints[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    grid = tuple(float(x) for x in (default_grid() if x_grid is None else x_grid))
    if any(not 0.0 <= x < 1.0 for x in grid):
        raise ValueError("grid points must lie in [0, 1)")
    ks = seq.values_up_to(checkpoints[-1])
    _check_k(ks)

    def row(x):
        return [weyl_magnitude(ks[:N], x) for N in checkpoints]

    mags = np.array(pmap(row, grid, threads), dtype=np.float64).reshape(len(grid), len(checkpoints))
    return WeylReport(seq.spec(), checkpoints, grid, mags)


class TrigPoly:
    """``f(t) = sum_j c_j exp(2 pi i j t)`` with finitely many ``j``."""

    def __init__(self, coeffs: Mapping[int, complex]):
        self.coeffs = {int(j): complex(c) for j, c in coeffs.items() if c != 0}

    @classmethod
    def random(cls, rng: np.random.Generator, degree: int) -> "TrigPoly":
        js = range(-degree, degree + 1)
        re = rng.standard_normal(len(js))
        im = rng.standard_normal(len(js))
        return cls({j: complex(a, b) for j, a, b in zip(js, re, im)})

    @classmethod
    def monomial(cls, j: int, c: complex = 1.0) -> "TrigPoly":
        return cls({j: c})

    @property
    def degree(self) -> int:
        return max((abs(j) for j in self.coeffs), default=0)

    @property
    def mean(self) -> complex:
        return self.coeffs.get(0, 0j)

    def norm2(self) -> float:
        return math.fsum(abs(c) ** 2 for c in self.coeffs.values())

    def dense(self) -> np.ndarray:
        """Coefficients ``c_{-J} .. c_J`` as an array."""
        J = self.degree
        out = np.zeros(2 * J + 1, dtype=np.complex128)
        for j, c in self.coeffs.items():
            out[j + J] = c
        return out

    def __call__(self, t):
        """Evaluate at points ``t`` by Horner's rule in ``z = exp(2 pi i t)``."""
        z = np.exp(1j * TWO_PI * np.asarray(t, dtype=np.float64))
        c = self.dense()
        acc = np.full(z.shape, c[-1], dtype=np.complex128)
        for a in c[-2::-1]:
            acc = acc * z + a
        return acc * np.conj(z) ** self.degree

    def __repr__(self):
        return f"TrigPoly({self.coeffs!r})"


class SpectralCheck(NamedTuple):
    lhs: float
    rhs: float
    gap: float


def spectral_identity_check(seq: IntSequence, alpha, f: TrigPoly, N: int,
                            grid_size: int | None = None) -> SpectralCheck:
    """Both sides of the mean-ergodic spectral identity for the rotation by ``alpha``.

    ``lhs`` is the squared L2 norm of ``(1/N) sum_n f(. + k_n alpha) - mean(f)``
    by quadrature on ``grid_size`` equally spaced points; ``rhs`` is
    ``sum_{j != 0} |c_j|^2 |S_N(j alpha)|^2``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    J = f.degree
    if grid_size is None:
        grid_size = 8
        while grid_size <= 4 * J:
            grid_size *= 2
    if grid_size & (grid_size - 1) or grid_size <= 4 * J:
        raise ValueError(f"grid size must be a power of two above 4*degree = {4 * J}")
    alpha = float(alpha)
    ks = seq.values_up_to(N)
    theta = phases(ks, alpha)
    z = np.arange(grid_size) / grid_size

    acc = np.zeros(grid_size, dtype=np.complex128)
    chunk = max(1, (1 << 18) // grid_size)
    for i in range(0, N, chunk):
        pts = z[:, None] + theta[None, i:i + chunk]
        acc += f(pts).sum(axis=1)
    avg = acc / N - f.mean
    lhs = math.fsum(np.abs(avg) ** 2) / grid_size

    terms = []
    for j, c in f.coeffs.items():
        if j == 0:
            continue
        t = TWO_PI * phases(ks * j, alpha)
        s = complex(math.fsum(np.cos(t)) / N, math.fsum(np.sin(t)) / N)
        terms.append(abs(c) ** 2 * (s.real ** 2 + s.imag ** 2))
    rhs = math.fsum(terms)
    return SpectralCheck(lhs, rhs, abs(lhs - rhs))


def correlation_vs_product(seq: IntSequence, source: LazySet, N_avg: int, window,
                           shifts_from_seq: bool = True) -> tuple[Fraction, Fraction]:
    """``(1/N_avg) sum_n d(E ∩ (E - k_n))`` on the window, and ``d(E)**2``.

    With ``shifts_from_seq=False`` the shifts are ``1..N_avg``.
    """
    if N_avg < 1:
        raise ValueError("N_avg must be >= 1")
    w = as_window(window)
    ks = seq.values_up_to(N_avg) if shifts_from_seq else np.arange(1, N_avg + 1, dtype=np.int64)
    distinct, mult = np.unique(ks, return_counts=True)
    pad = int(np.max(np.abs(distinct)))
    ev = Evaluator(source, w, pad)
    counts = ev.correlation_counts(distinct.tolist())
    total = sum(int(c) * int(m) for c, m in zip(counts, mult))
    average = Fraction(total, N_avg * w.length)
    base = Fraction(int(ev.correlation_counts([0])[0]), w.length)
    return average, base * base
