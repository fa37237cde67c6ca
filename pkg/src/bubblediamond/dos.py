"""Density-of-states measures and integrated density of states.

All measures here are finitely supported with one exact rational weight per
preimage generation, so they are stored as blocks (generation, locations,
weight). Masses and counting values are exact; only locations are floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from .decimation import decimation_functions, preimage_generations
from .graph import vertex_count


@dataclass(frozen=True)
class AtomBlock:
    generation: int
    locations: np.ndarray      # preimage-tree order, not sorted
    weight: Fraction


@dataclass(frozen=True)
class AtomicMeasure:
    b: int
    kind: str
    blocks: tuple[AtomBlock, ...]
    tail_bound: Fraction = Fraction(0)

    @property
    def atom_count(self) -> int:
        return sum(len(blk.locations) for blk in self.blocks)

    def total_mass(self) -> Fraction:
        return sum((len(blk.locations) * blk.weight for blk in self.blocks), Fraction(0))

    def block(self, generation: int) -> AtomBlock:
        for blk in self.blocks:
            if blk.generation == generation:
                return blk
        raise KeyError(generation)

    def atoms(self) -> list[tuple[float, Fraction]]:
        """(location, weight) pairs, ascending in location."""
        pairs = [(float(x), blk.weight) for blk in self.blocks for x in blk.locations]
        pairs.sort(key=lambda p: p[0])
        return pairs

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return math.fsum(float(blk.weight) * math.fsum(np.asarray(f(blk.locations), float))
                         for blk in self.blocks)

    def mass_below(self, x: float) -> Fraction:
        """Exact measure of (-inf, x]."""
        total = Fraction(0)
        for blk in self.blocks:
            total += int(np.count_nonzero(blk.locations <= x)) * blk.weight
        return total

    def reflected(self) -> "AtomicMeasure":
        blocks = tuple(AtomBlock(blk.generation, 2.0 - blk.locations, blk.weight) for blk in self.blocks)
        return AtomicMeasure(self.b, self.kind, blocks, self.tail_bound)


def _exceptional_generations(b: int, depth: int) -> tuple[np.ndarray, ...]:
    e = decimation_functions(b).exceptional
    return preimage_generations(b, [float(x) for x in e], depth)


def finite_weight(b: int, level: int, generation: int) -> Fraction:
    return Fraction((b - 1) * (b + 2) ** (level - generation - 1) + 2, 2 * ((b + 2) ** level - 1))


def limit_weight(b: int, generation: int) -> Fraction:
    return Fraction(b - 1, 2 * (b + 2) ** (generation + 1))


def tail_bound(b: int, depth: int) -> Fraction:
    """Mass of the limit density of states beyond generation `depth`."""
    return Fraction(3, b + 2) ** (depth + 1)


@lru_cache(maxsize=64)
def finite_dos(b: int, level: int) -> AtomicMeasure:
    """Normalized eigenvalue-multiplicity measure of the level-`level` Dirichlet Laplacian."""
    if level < 1:
        raise ValueError("level must be >= 1")
    gens = _exceptional_generations(b, level - 1)
    blocks = tuple(AtomBlock(m, g, finite_weight(b, level, m)) for m, g in enumerate(gens))
    return AtomicMeasure(b, "finite", blocks)


@lru_cache(maxsize=64)
def limit_dos(b: int, depth: int) -> AtomicMeasure:
    """Limit density of states truncated after generation `depth`."""
    if depth < 0:
        raise ValueError("truncation depth must be >= 0")
    gens = _exceptional_generations(b, depth)
    blocks = tuple(AtomBlock(m, g, limit_weight(b, m)) for m, g in enumerate(gens))
    return AtomicMeasure(b, "limit", blocks, tail_bound(b, depth))


@lru_cache(maxsize=64)
def completed_limit_dos(b: int, depth: int) -> AtomicMeasure:
    """Truncated limit measure with the omitted mass spread over generation `depth`.

    Every cell of the preimage tree at generation k <= depth receives the same
    share of deeper atoms as of generation-`depth` atoms, so this probability
    measure gives every gap of scale <= depth exactly its limit value.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    gens = _exceptional_generations(b, depth)
    blocks = [AtomBlock(m, g, limit_weight(b, m)) for m, g in enumerate(gens[:-1])]
    blocks.append(AtomBlock(depth, gens[-1], Fraction(1, 2 * (b + 2) ** depth)))
    return AtomicMeasure(b, "completed", tuple(blocks))


def brolin_measure(b: int, generation: int) -> AtomicMeasure:
    """Uniform probability measure on R^{-generation}(E_b)."""
    if generation < 0:
        raise ValueError("generation must be >= 0")
    gen = _exceptional_generations(b, generation)[-1]
    return AtomicMeasure(b, "uniform", (AtomBlock(generation, gen, Fraction(1, 2 * 3 ** generation)),))


class CountingValue(NamedTuple):
    value: Fraction
    error_bound: Fraction


def counting_function(b: int, depth: int, x: float) -> CountingValue:
    """Truncated integrated density of states at x with its uniform error bound."""
    mu = limit_dos(b, depth)
    return CountingValue(mu.mass_below(x), mu.tail_bound)


class SelfSimilarityReport(NamedTuple):
    weight_residual: Fraction     # must be exactly 0
    location_residual: float      # |R(S_j(x)) - x| over the checked atoms


def self_similarity_residual(b: int, depth: int) -> SelfSimilarityReport:
    """Check the atom-wise self-similarity of the limit density of states.

    For every atom x of generation m < depth and every branch j the atom
    S_j(x) (found structurally at index j*len(gen m)+i of generation m+1)
    must satisfy 2(b+2) w(S_j x) = 2 w(x); the exceptional atoms e must
    satisfy 2(b+2) w(e) = 2 w(R(e)) + (b-1) with R(e) in {0, 2} carrying no mass.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    funcs = decimation_functions(b)
    mu = limit_dos(b, depth)
    worst = Fraction(0)
    loc_err = 0.0
    for m in range(depth):
        parent, child = mu.block(m), mu.block(m + 1)
        n = len(parent.locations)
        for j in range(3):
            images = child.locations[j * n:(j + 1) * n]
            worst = max(worst, abs(2 * (b + 2) * child.weight - 2 * parent.weight))
            loc_err = max(loc_err, float(np.max(np.abs(funcs(images) - parent.locations))))
    # exceptional atoms map onto the fixed points 0 and 2, which carry no mass
    gen0 = mu.block(0)
    img = funcs(gen0.locations)
    loc_err = max(loc_err, float(np.max(np.minimum(np.abs(img), np.abs(img - 2.0)))))
    worst = max(worst, abs(2 * (b + 2) * gen0.weight - (b - 1)))
    return SelfSimilarityReport(worst, loc_err)


class ConvergenceDiagnostic(NamedTuple):
    lhs: float
    rhs: float
    gap: float


def convergence_diagnostic(b: int, level: int, f: Callable[[np.ndarray], np.ndarray],
                           depth: int = 12) -> ConvergenceDiagnostic:
    """Compare ((b+2)/3)^level (nu^(depth) - nu_level) against 2 mu_depth on f."""
    if level < 1:
        raise ValueError("level must be >= 1")
    if depth <= level:
        raise ValueError("truncation depth must exceed the level")
    scale = ((b + 2) / 3) ** level
    lhs = scale * (limit_dos(b, depth).integrate(f) - finite_dos(b, level).integrate(f))
    rhs = 2.0 * brolin_measure(b, depth).integrate(f)
    return ConvergenceDiagnostic(lhs, rhs, abs(lhs - rhs))


@dataclass(frozen=True)
class Staircase:
    """Right-continuous step function: value at breakpoints[i] is numerators[i]/denominator."""

    breakpoints: np.ndarray
    numerators: tuple[int, ...]
    denominator: int

    def __len__(self) -> int:
        return len(self.breakpoints)

    @property
    def values(self) -> list[Fraction]:
        return [Fraction(n, self.denominator) for n in self.numerators]

    @property
    def final_value(self) -> Fraction:
        return Fraction(self.numerators[-1], self.denominator) if self.numerators else Fraction(0)

    def __call__(self, x: float) -> Fraction:
        i = int(np.searchsorted(self.breakpoints, x, side="right"))
        return Fraction(self.numerators[i - 1], self.denominator) if i else Fraction(0)


def staircase(measure: AtomicMeasure) -> Staircase:
    den = 1
    for blk in measure.blocks:
        den = den * blk.weight.denominator // math.gcd(den, blk.weight.denominator)
    locs = np.concatenate([blk.locations for blk in measure.blocks])
    nums = np.concatenate([np.full(len(blk.locations), blk.weight.numerator * (den // blk.weight.denominator),
                                   dtype=object) for blk in measure.blocks])
    order = np.argsort(locs, kind="stable")
    cum = np.cumsum(nums[order])
    return Staircase(locs[order], tuple(int(c) for c in cum), den)


def ids_staircase(b: int, level: int, measure: str = "finite") -> Staircase:
    """Counting-function staircase over the atoms of generations < level.

    ``finite`` is the level-`level` Dirichlet counting function; ``limit`` is
    the completed limit measure with depth level-1, which equals the limit
    counting function on every gap of scale < level.
    """
    if measure == "finite":
        return staircase(finite_dos(b, level))
    if measure == "limit":
        return staircase(completed_limit_dos(b, level - 1))
    raise ValueError(f"unknown measure {measure!r}")


def dirichlet_dimension(b: int, level: int) -> int:
    return vertex_count(b, level) - 2
