"""Spectral decimation for bubble-diamond Laplacians.

The decimation map is the cubic

    R(z) = (z/b) ((b+1) z - 2b - 1) ((b+1) z - b - 2)

obtained from the Schur complement of the level-1 Laplacian onto its two
boundary vertices. Its three inverse branches are indexed 0, 1, 2 by the
interval they land in (left to right); branch 1 reverses orientation.

Preimage sets are built generation by generation. Generation m+1 of a seed
set is the concatenation [S_0(gen m), S_1(gen m), S_2(gen m)], so the atom
S_j(x_i) of generation m+1 sits at index j * len(gen m) + i. All identity
questions are answered from these indices, never by comparing floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .graph import build_graph
from .oracle import neumann_laplacian


class DomainError(ValueError):
    pass


BISECTION_STEPS = 40
NEWTON_STEPS = 5


def _is_exact(z) -> bool:
    return isinstance(z, (int, Fraction)) and not isinstance(z, bool)


@dataclass(frozen=True)
class DecimationFunctions:
    b: int
    coefficients: tuple[Fraction, Fraction, Fraction, Fraction]   # ascending powers

    @classmethod
    def for_branching(cls, b: int) -> "DecimationFunctions":
        if b < 2:
            raise ValueError(f"b must be >= 2, got {b}")
        k = (b + 1) ** 2
        coeffs = (Fraction(0), Fraction((2 * b + 1) * (b + 2), b), Fraction(-3 * k, b), Fraction(k, b))
        return cls(b, coeffs)

    def perturbed(self, index: int, delta) -> "DecimationFunctions":
        """Copy with one polynomial coefficient shifted (mutation testing)."""
        c = list(self.coefficients)
        c[index] += Fraction(delta)
        return DecimationFunctions(self.b, tuple(c))

    @property
    def exceptional(self) -> tuple[Fraction, Fraction]:
        b = self.b
        return Fraction(1, b + 1), Fraction(2 * b + 1, b + 1)

    @property
    def multiplier(self) -> Fraction:
        """Derivative at the fixed point 0, taken from the coefficients."""
        return self.coefficients[1]

    def _coeffs(self, z):
        return self.coefficients if _is_exact(z) else tuple(float(c) for c in self.coefficients)

    def __call__(self, z):
        if isinstance(z, int):
            z = Fraction(z)
        c0, c1, c2, c3 = self._coeffs(z)
        return ((c3 * z + c2) * z + c1) * z + c0

    def derivative(self, z):
        if isinstance(z, int):
            z = Fraction(z)
        _, c1, c2, c3 = self._coeffs(z)
        return (3 * c3 * z + 2 * c2) * z + c1

    def scale(self, z):
        """The Schur-complement coefficient of the level-0 Laplacian."""
        b = self.b
        if isinstance(z, int):
            z = Fraction(z)
        den = (b + 1) ** 2 * (z - 1) ** 2 - b * b
        if den == 0:
            raise DomainError(f"scale function has a pole at z={z}")
        return b / den if not _is_exact(z) else Fraction(b) / den

    def shift(self, z):
        """The Schur-complement coefficient of the identity."""
        b = self.b
        if isinstance(z, int):
            z = Fraction(z)
        den = (b + 1) * z - 1
        if den == 0:
            raise DomainError(f"shift function has a pole at z={z}")
        return z * ((b + 1) * z - b - 2) / den

    def branch_interval(self, j: int) -> tuple[Fraction, Fraction]:
        b = self.b
        if j == 0:
            return Fraction(0), Fraction(1, b + 1)
        if j == 1:
            return Fraction(b, b + 1), Fraction(b + 2, b + 1)
        if j == 2:
            return Fraction(2 * b + 1, b + 1), Fraction(2)
        raise ValueError(f"branch index must be 0, 1 or 2, got {j}")

    def inverse_branch(self, j: int, w):
        """The preimage of w in branch j's interval (scalar or array input)."""
        lo0, hi0 = (float(x) for x in self.branch_interval(j))
        scalar = np.ndim(w) == 0
        w = np.atleast_1d(np.asarray(w, dtype=float))
        if np.any((w < 0.0) | (w > 2.0)) or np.any(np.isnan(w)):
            raise DomainError("inverse branches are defined on [0, 2] only")
        lo = np.full_like(w, lo0)
        hi = np.full_like(w, hi0)
        increasing = j != 1
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            below = self(mid) < w
            go_right = below if increasing else ~below
            lo = np.where(go_right, mid, lo)
            hi = np.where(go_right, hi, mid)
        z = 0.5 * (lo + hi)
        for _ in range(NEWTON_STEPS):
            d = self.derivative(z)
            step = np.where(d != 0.0, (self(z) - w) / np.where(d != 0.0, d, 1.0), 0.0)
            z = np.clip(z - step, lo0, hi0)
        return float(z[0]) if scalar else z


@lru_cache(maxsize=None)
def decimation_functions(b: int) -> DecimationFunctions:
    return DecimationFunctions.for_branching(b)


def _funcs(b: int, funcs: DecimationFunctions | None) -> DecimationFunctions:
    return funcs if funcs is not None else decimation_functions(b)


def decimation_map(b: int, z):
    """R_b(z); exact for int/Fraction input."""
    return decimation_functions(b)(z)


def scale_function(b: int, z):
    return decimation_functions(b).scale(z)


def shift_function(b: int, z):
    return decimation_functions(b).shift(z)


def inverse_branch(b: int, j: int, w):
    return decimation_functions(b).inverse_branch(j, w)


def critical_points(b: int) -> tuple[float, float]:
    """Roots of R_b', one in (0, 1) and one in (1, 2)."""
    r = math.sqrt((b * b + b + 1) / 3) / (b + 1)
    return 1.0 - r, 1.0 + r


def schur_residual(b: int, z: float, funcs: DecimationFunctions | None = None) -> float:
    """Max-norm mismatch between the Schur complement of L_1 - z and the decimation form.

    The level-1 Laplacian is split as [[T, B], [C, X]] with the boundary
    block first; the complement T - z - B (X - z)^{-1} C must equal
    scale(z) L_0 - shift(z) I. Everything is evaluated exactly at the
    rational value of the float z, so only the final difference is rounded.
    """
    f = _funcs(b, funcs)
    q = Fraction(float(z))
    if any(abs(float(z) - float(e)) < 1e-14 for e in f.exceptional):
        raise DomainError(f"z={float(z)} lies in the interior block spectrum")
    lap = neumann_laplacian(build_graph(b, 1)).exact()
    t = [row[:2] for row in lap[:2]]
    bb = [row[2:] for row in lap[:2]]
    c = [row[:2] for row in lap[2:]]
    x = [row[2:] for row in lap[2:]]
    (p11, p12), (p21, p22) = ((x[0][0] - q, x[0][1]), (x[1][0], x[1][1] - q))
    det = p11 * p22 - p12 * p21
    inv = ((p22 / det, -p12 / det), (-p21 / det, p11 / det))
    inv_c = [[sum(inv[i][k] * c[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
    lap0 = ((1, -1), (-1, 1))
    scale, shift = f.scale(q), f.shift(q)
    worst = 0.0
    for i in range(2):
        for j in range(2):
            schur = t[i][j] - (q if i == j else 0) - sum(bb[i][k] * inv_c[k][j] for k in range(2))
            target = scale * lap0[i][j] - (shift if i == j else 0)
            worst = max(worst, abs(float(schur - target)))
    return worst


# ---------------------------------------------------------------- preimages

@lru_cache(maxsize=128)
def _generations(funcs: DecimationFunctions, seeds: tuple[float, ...], depth: int) -> tuple[np.ndarray, ...]:
    gens = [np.array(seeds, dtype=float)]
    for _ in range(depth):
        prev = gens[-1]
        nxt = np.concatenate([funcs.inverse_branch(j, prev) for j in range(3)])
        nxt.setflags(write=False)
        gens.append(nxt)
    gens[0].setflags(write=False)
    return tuple(gens)


def preimage_generations(b: int, seeds: Sequence[float], depth: int,
                         funcs: DecimationFunctions | None = None) -> tuple[np.ndarray, ...]:
    """Generations 0..depth of backward orbits of `seeds`, in tree order."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    return _generations(_funcs(b, funcs), tuple(float(s) for s in seeds), depth)


def branch_word(index: int, generation: int, n_seeds: int) -> tuple[tuple[int, ...], int]:
    """Decode a tree index into (branch word, outermost first; seed index)."""
    word = []
    size = n_seeds * 3 ** generation
    for _ in range(generation):
        size //= 3
        j, index = divmod(index, size)
        word.append(j)
    return tuple(word), index


def preimage_set(b: int, points: Sequence[float], n: int,
                 funcs: DecimationFunctions | None = None) -> np.ndarray:
    """Sorted R_b^{-n}(points); 3^n * len(points) values."""
    return np.sort(preimage_generations(b, points, n, funcs)[-1])


def julia_approximation(b: int, depth: int, seed: float = 0.0,
                        funcs: DecimationFunctions | None = None) -> np.ndarray:
    if seed not in (0, 2):
        raise ValueError("seed must be one of the repelling fixed points 0 or 2")
    return preimage_set(b, [seed], depth, funcs)


# ------------------------------------------------------------ predictions

class PredictedEigenvalue(NamedTuple):
    value: float
    multiplicity: int | None
    generation: int | None     # m with value in R^{-m}(E_b); None outside that family
    family: str                # "fixed" (0, 2), "exceptional" or "level1"


@dataclass(frozen=True)
class SpectrumPrediction:
    b: int
    level: int
    flavor: str
    entries: tuple[PredictedEigenvalue, ...]

    @property
    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.entries])

    @property
    def total_multiplicity(self) -> int:
        return sum(e.multiplicity or 0 for e in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def dirichlet_multiplicity(b: int, level: int, generation: int) -> int:
    """Multiplicity at `level` of a Dirichlet eigenvalue in R^{-generation}(E_b)."""
    num = (b - 1) * (b + 2) ** (level - 1 - generation) + 2
    assert num % (b + 1) == 0
    return num // (b + 1)


def predicted_dirichlet_spectrum(b: int, level: int,
                                 funcs: DecimationFunctions | None = None) -> SpectrumPrediction:
    if level < 1:
        raise ValueError("Dirichlet spectra start at level 1")
    f = _funcs(b, funcs)
    gens = preimage_generations(b, [float(e) for e in f.exceptional], level - 1, f)
    entries = [PredictedEigenvalue(float(x), dirichlet_multiplicity(b, level, m), m, "exceptional")
               for m, gen in enumerate(gens) for x in gen]
    entries.sort(key=lambda e: e.value)
    return SpectrumPrediction(b, level, "dirichlet", tuple(entries))


def predicted_neumann_spectrum(b: int, level: int,
                               funcs: DecimationFunctions | None = None) -> SpectrumPrediction:
    """Eigenvalue set of the Neumann Laplacian (no multiplicities).

    For level >= 1 this is R^{-(level-1)} of {0, b/(b+1), (b+2)/(b+1), 2},
    assembled as {0, 2} together with R^{-m}(E_b) for m <= level-2 and
    R^{-j}({b/(b+1), (b+2)/(b+1)}) for j <= level-1.
    """
    if level < 0:
        raise ValueError("level must be >= 0")
    f = _funcs(b, funcs)
    entries = [PredictedEigenvalue(0.0, None, None, "fixed"), PredictedEigenvalue(2.0, None, None, "fixed")]
    if level >= 2:
        gens = preimage_generations(b, [float(e) for e in f.exceptional], level - 2, f)
        entries += [PredictedEigenvalue(float(x), None, m, "exceptional")
                    for m, gen in enumerate(gens) for x in gen]
    if level >= 1:
        seeds = [b / (b + 1), (b + 2) / (b + 1)]
        gens = preimage_generations(b, seeds, level - 1, f)
        entries += [PredictedEigenvalue(float(x), None, None, "level1") for gen in gens for x in gen]
    entries.sort(key=lambda e: e.value)
    return SpectrumPrediction(b, level, "neumann", tuple(entries))


def hausdorff_distance(a, b) -> float:
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if len(a) == 0 or len(b) == 0:
        return math.inf if len(a) != len(b) else 0.0

    def one_way(x, y):
        idx = np.clip(np.searchsorted(y, x), 1, len(y) - 1) if len(y) > 1 else np.zeros(len(x), int)
        d = np.abs(x - y[idx])
        if len(y) > 1:
            d = np.minimum(d, np.abs(x - y[idx - 1]))
        return float(d.max())

    return max(one_way(a, b), one_way(b, a))
