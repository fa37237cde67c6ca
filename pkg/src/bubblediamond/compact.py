"""Koenigs linearization of the branch S_0 at 0 and the compact-limit spectrum.

S_0 contracts [0, 2] into [0, 1/(b+1)] and fixes 0 with derivative
1/lambda_0, where lambda_0 = R_b'(0) = (2b+1)(b+2)/b. The limit
T(z) = lim lambda_0^L S_0^L(z) conjugates S_0 to multiplication by
1/lambda_0, and renormalized eigenvalues 2 lambda_0^k T(z) make up the
spectrum of the Laplacian on the compact limit space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .decimation import decimation_functions, dirichlet_multiplicity, predicted_neumann_spectrum
from .jacobi import ConvergenceError

MAX_DEPTH = 200
DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class KoenigsMap:
    b: int
    tol: float = DEFAULT_TOL
    max_depth: int = MAX_DEPTH

    @property
    def multiplier(self) -> float:
        return float(decimation_functions(self.b).multiplier)

    def evaluate(self, z, min_depth: int = 1) -> tuple[np.ndarray, int]:
        """Return (T(z), depth used). Stops once every increment is below tol * max(1, |T|)."""
        funcs = decimation_functions(self.b)
        lam = self.multiplier
        x = np.atleast_1d(np.asarray(z, dtype=float))
        if np.any((x < 0) | (x > 2)):
            raise ValueError("Koenigs map is evaluated on [0, 2] only")
        scale = 1.0
        current = x.copy()
        for depth in range(1, self.max_depth + 1):
            nxt = funcs.inverse_branch(0, x)
            scale_next = scale * lam
            inc = np.abs(scale_next * nxt - scale * x)
            x, scale = nxt, scale_next
            current = scale * x
            if depth >= min_depth and np.all(inc < self.tol * np.maximum(1.0, np.abs(current))):
                return current, depth
        raise ConvergenceError(
            f"Koenigs iteration did not settle within {self.max_depth} steps", float(np.max(inc)))

    def __call__(self, z):
        vals, _ = self.evaluate(z)
        return float(vals[0]) if np.ndim(z) == 0 else vals


def koenigs_T(b: int, z, depth: int = 1, tol: float = DEFAULT_TOL):
    """T(z), iterating at least `depth` steps and more until converged (at most 200)."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    vals, _ = KoenigsMap(b, tol).evaluate(z, min_depth=depth)
    return float(vals[0]) if np.ndim(z) == 0 else vals


def functional_equation_residual(b: int, points) -> float:
    """max |lambda_0 T(S_0 z) - T(z)| over the points."""
    t = KoenigsMap(b)
    z = np.asarray(points, dtype=float)
    return float(np.max(np.abs(t.multiplier * t(decimation_functions(b).inverse_branch(0, z)) - t(z))))


class CompactEigenvalue(NamedTuple):
    value: float
    generation: int
    source: float
    multiplicity: int | None      # None: not determined by the Dirichlet count


def compact_spectrum(b: int, k_max: int) -> list[CompactEigenvalue]:
    """{0, 2T(2)} together with 2 lambda_0^k T(z), z in the level-k spectrum within [b/(b+1), 2]."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    t = KoenigsMap(b)
    lam = t.multiplier
    lower = b / (b + 1)
    out = [CompactEigenvalue(0.0, 0, 0.0, None), CompactEigenvalue(2.0 * t(2.0), 0, 2.0, None)]
    for k in range(1, k_max + 1):
        entries = [e for e in predicted_neumann_spectrum(b, k).entries if e.value >= lower - 1e-15]
        tv = t(np.array([e.value for e in entries]))
        for e, tz in zip(entries, tv):
            mult = None
            if e.family == "exceptional" and e.generation is not None and e.generation <= k - 2:
                mult = dirichlet_multiplicity(b, k, e.generation)
            out.append(CompactEigenvalue(2.0 * lam ** k * float(tz), k, e.value, mult))
    out.sort(key=lambda c: c.value)
    return out


def compact_gap_label(b: int, g1: float, g2: float) -> float:
    """T(g2)/T(g1) - 1 for a gap (g1, g2) inside [1/(b+1), 2]."""
    if not g1 < g2:
        raise ValueError("gap needs g1 < g2")
    if g1 < 1 / (b + 1) - 1e-15 or g2 > 2:
        raise ValueError("gap must lie in [1/(b+1), 2]")
    t = KoenigsMap(b)
    a, c = t(np.array([g1, g2]))
    return float(c / a - 1.0)


class GapSequence(NamedTuple):
    min_ratio: float
    ratios: tuple[float, ...]     # one per generation 0..k_max


def gap_sequence_check(b: int, g1: float, g2: float, k_max: int) -> GapSequence:
    """Relative jump across the images 2 lambda_0^k T(g1) < 2 lambda_0^k T(g2), k <= k_max."""
    if not g1 < g2:
        raise ValueError("gap needs g1 < g2")
    t = KoenigsMap(b)
    lam = t.multiplier
    a, c = t(np.array([g1, g2]))
    ratios = tuple(float((2 * lam ** k * c) / (2 * lam ** k * a) - 1.0) for k in range(k_max + 1))
    return GapSequence(min(ratios), ratios)
