"""Spectral gaps, their exact labels and the label iterated function system.

A gap word w = (w_1, ..., w_k) has w_j in {0, 1, 2} for j < k and w_k in
{0, 1}. Scale-1 gaps are E^(0) = (1/(b+1), b/(b+1)) and its mirror
E^(1) = 2 - E^(0). Deeper gaps are images under the inverse branches:

    E^(0w) = S_0(E^w),   E^(1w) = S_1(E^(~w)),   E^(2w) = S_2(E^w)

where ~w flips the word (2 - w_j on the first letters, 1 - w_k on the
last). With this convention lexicographic word order is left-to-right order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .decimation import decimation_functions, julia_approximation
from .dos import counting_function


class GapWord(tuple):
    """Immutable validated gap word."""

    def __new__(cls, letters):
        letters = tuple(int(x) for x in letters)
        if not letters:
            raise ValueError("gap words have at least one letter")
        if any(x not in (0, 1, 2) for x in letters[:-1]):
            raise ValueError(f"leading letters must be in {{0,1,2}}: {letters}")
        if letters[-1] not in (0, 1):
            raise ValueError(f"last letter must be 0 or 1: {letters}")
        return super().__new__(cls, letters)

    @property
    def scale(self) -> int:
        return len(self)

    def __repr__(self) -> str:
        return "GapWord(" + "".join(map(str, self)) + ")"


@dataclass(frozen=True)
class Gap:
    word: GapWord
    left: float
    right: float

    @property
    def scale(self) -> int:
        return len(self.word)

    @property
    def interval(self) -> tuple[float, float]:
        return self.left, self.right

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.left + self.right)

    def contains(self, x: float, margin: float = 0.0) -> bool:
        return self.left + margin < x < self.right - margin


def _check_b(b: int) -> None:
    if b < 2:
        raise ValueError(f"b must be >= 2, got {b}")


def base_gaps(b: int) -> tuple[Gap, Gap]:
    _check_b(b)
    e0 = Gap(GapWord((0,)), 1 / (b + 1), b / (b + 1))
    e1 = Gap(GapWord((1,)), (b + 2) / (b + 1), (2 * b + 1) / (b + 1))
    return e0, e1


def tilde_word(w) -> GapWord:
    w = GapWord(w)
    return GapWord(tuple(2 - x for x in w[:-1]) + (1 - w[-1],))


def words(k: int) -> list[GapWord]:
    """All scale-k words in lexicographic order."""
    if k < 1:
        raise ValueError("scale must be >= 1")
    return [GapWord(p + (last,)) for p in itertools.product((0, 1, 2), repeat=k - 1) for last in (0, 1)]


def _image(b: int, j: int, gap_left: np.ndarray, gap_right: np.ndarray):
    funcs = decimation_functions(b)
    lo = funcs.inverse_branch(j, gap_left)
    hi = funcs.inverse_branch(j, gap_right)
    return (hi, lo) if j == 1 else (lo, hi)


@lru_cache(maxsize=64)
def enumerate_gaps(b: int, k: int) -> tuple[Gap, ...]:
    """The 2*3^(k-1) gaps of scale k, left to right."""
    _check_b(b)
    if k < 1:
        raise ValueError("scale must be >= 1")
    if k == 1:
        return base_gaps(b)
    prev = enumerate_gaps(b, k - 1)
    index = {g.word: i for i, g in enumerate(prev)}
    out = []
    for j in range(3):
        # E^(jw) for w in lexicographic order; branch 1 reads its source at ~w
        src = [prev[index[tilde_word(g.word)]] if j == 1 else g for g in prev]
        left = np.array([g.left for g in src])
        right = np.array([g.right for g in src])
        lo, hi = _image(b, j, left, right)
        out += [Gap(GapWord((j,) + g.word), float(a), float(c)) for g, a, c in zip(prev, lo, hi)]
    return tuple(out)


def gap_label(b: int, w) -> Fraction:
    """Exact value of the integrated density of states on the gap E^w."""
    _check_b(b)
    w = GapWord(w)
    k = len(w)
    head = sum((Fraction(x, (b + 2) ** j) for j, x in enumerate(w[:-1], start=1)), Fraction(0))
    return Fraction(b + 1 + 2 * w[-1], 2 * (b + 2) ** k) + Fraction(b + 1, 2) * head


def ifs_map(b: int, letter: int, y) -> Fraction:
    """Contractions with fixed points 0, 1/2, 1; letter 1 reverses orientation."""
    _check_b(b)
    y = Fraction(y)
    if letter == 0:
        return y / (b + 2)
    if letter == 1:
        return Fraction(1, 2) + (1 - 2 * y) / (2 * (b + 2))
    if letter == 2:
        return 1 + (y - 1) / (b + 2)
    raise ValueError(f"letter must be 0, 1 or 2, got {letter}")


def ifs_orbit(b: int, depth: int) -> frozenset[Fraction]:
    """Base labels and their images under at most depth-1 contractions."""
    _check_b(b)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    layer = {Fraction(b + 1, 2 * (b + 2)), Fraction(b + 3, 2 * (b + 2))}
    orbit = set(layer)
    for _ in range(depth - 1):
        layer = {ifs_map(b, l, y) for y in layer for l in range(3)}
        orbit |= layer
    return frozenset(orbit)


def labels_up_to(b: int, depth: int) -> frozenset[Fraction]:
    return frozenset(gap_label(b, w) for k in range(1, depth + 1) for w in words(k))


class PairingWord(NamedTuple):
    branches: tuple[int, ...]   # outermost branch first
    base: int                   # 0 or 1: which scale-1 gap is mapped


def pairing_word(w) -> PairingWord:
    """Write E^w as S_{j_1} o ... o S_{j_{k-1}} applied to a scale-1 gap."""
    w = GapWord(w)
    branches = []
    while len(w) > 1:
        head, rest = w[0], GapWord(w[1:])
        branches.append(head)
        w = tilde_word(rest) if head == 1 else rest
    return PairingWord(tuple(branches), w[0])


def apply_branches(b: int, branches, interval: tuple[float, float]) -> tuple[float, float]:
    left, right = np.array([interval[0]]), np.array([interval[1]])
    for j in reversed(branches):
        left, right = _image(b, j, left, right)
    return float(left[0]), float(right[0])


def julia_disjointness(b: int, k: int, depth: int | None = None, margin: float = 1e-12) -> int:
    """Number of Julia-approximation points inside scale-k gap interiors (should be 0)."""
    pts = julia_approximation(b, k + 3 if depth is None else depth, 0.0)
    hits = 0
    for g in enumerate_gaps(b, k):
        lo, hi = np.searchsorted(pts, [g.left + margin, g.right - margin])
        hits += int(hi - lo)
    return hits


def crosscheck_labels(b: int, k: int, depth: int) -> Fraction:
    """Worst |N(midpoint) - label| over scale-k gaps using the depth-truncated limit measure.

    The result must not exceed the truncation tail bound (3/(b+2))^(depth+1).
    """
    if depth < k + 4:
        raise ValueError("truncation depth must be at least scale + 4")
    worst = Fraction(0)
    for g in enumerate_gaps(b, k):
        value, _ = counting_function(b, depth, g.midpoint)
        worst = max(worst, abs(value - gap_label(b, g.word)))
    return worst
