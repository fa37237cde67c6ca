"""Probabilistic graph Laplacians and their direct diagonalization.

This is the ground truth every decimation prediction is checked against.
Matrices keep exact rational entries; diagonalization works on the
degree-symmetrized float form D^{1/2} L D^{-1/2} and maps eigenvectors back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Literal, NamedTuple

import numpy as np

from .graph import BubbleGraph, build_graph, copy_embedding
from .jacobi import jacobi_eigh

Flavor = Literal["neumann", "dirichlet"]

DEFAULT_TAU = 1e-8


@dataclass(frozen=True)
class LaplacianMatrix:
    """Laplacian restricted to ``vertices`` of ``graph``.

    ``entries`` maps (row, col) to the nonzero exact entries; rows and
    columns are positions in ``vertices``.
    """

    graph: BubbleGraph
    flavor: Flavor
    vertices: tuple[int, ...]
    entries: dict[tuple[int, int], Fraction] = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def degrees(self) -> np.ndarray:
        return np.array([self.graph.degrees[v] for v in self.vertices], dtype=float)

    def exact(self) -> list[list[Fraction]]:
        rows = [[Fraction(0)] * self.n for _ in range(self.n)]
        for (i, j), x in self.entries.items():
            rows[i][j] = x
        return rows

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        for (i, j), x in self.entries.items():
            out[i, j] = float(x)
        return out

    def symmetrized(self) -> np.ndarray:
        """D^{1/2} L D^{-1/2}, symmetric with the same spectrum."""
        d = np.sqrt(self.degrees)
        return d[:, None] * self.to_array() / d[None, :]

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.to_array() @ x


def _laplacian(g: BubbleGraph, flavor: Flavor, vertices: tuple[int, ...]) -> LaplacianMatrix:
    pos = {v: i for i, v in enumerate(vertices)}
    entries: dict[tuple[int, int], Fraction] = {(i, i): Fraction(1) for i in range(len(vertices))}
    for u, v, m in g.edges:
        if u in pos and v in pos:
            entries[pos[u], pos[v]] = Fraction(-m, g.degrees[u])
            entries[pos[v], pos[u]] = Fraction(-m, g.degrees[v])
    return LaplacianMatrix(g, flavor, vertices, entries)


def neumann_laplacian(g: BubbleGraph) -> LaplacianMatrix:
    return _laplacian(g, "neumann", tuple(range(g.vertex_count)))


def dirichlet_laplacian(g: BubbleGraph) -> LaplacianMatrix:
    """Interior principal submatrix of the Neumann Laplacian (level >= 1)."""
    if g.level < 1:
        raise ValueError("the Dirichlet Laplacian needs level >= 1")
    return _laplacian(g, "dirichlet", tuple(g.interior))


def laplacian(g: BubbleGraph, flavor: Flavor) -> LaplacianMatrix:
    if flavor == "neumann":
        return neumann_laplacian(g)
    if flavor == "dirichlet":
        return dirichlet_laplacian(g)
    raise ValueError(f"unknown flavor {flavor!r}")


@dataclass(frozen=True)
class SpectrumMultiset:
    entries: tuple[tuple[float, int], ...]
    tau: float = DEFAULT_TAU

    @property
    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.entries])

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([m for _, m in self.entries], dtype=int)

    @property
    def total(self) -> int:
        return int(sum(m for _, m in self.entries))

    def __len__(self) -> int:
        return len(self.entries)


def cluster(values, tau: float = DEFAULT_TAU) -> SpectrumMultiset:
    """Group sorted eigenvalues whose consecutive gaps are <= tau."""
    vals = np.sort(np.asarray(values, dtype=float))
    groups: list[list[float]] = []
    for x in vals:
        if groups and x - groups[-1][-1] <= tau:
            groups[-1].append(x)
        else:
            groups.append([x])
    return SpectrumMultiset(tuple((float(np.mean(g)), len(g)) for g in groups), tau)


class Eigenpairs(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray     # columns, in the original (non-symmetric) coordinates


def eigenpairs(m: LaplacianMatrix) -> Eigenpairs:
    w, u = jacobi_eigh(m.symmetrized())
    v = u / np.sqrt(m.degrees)[:, None]
    v /= np.linalg.norm(v, axis=0)
    return Eigenpairs(w, v)


def eigensolve(m: LaplacianMatrix, tau: float = DEFAULT_TAU) -> SpectrumMultiset:
    if tau <= 0:
        raise ValueError("tau must be positive")
    w, _ = jacobi_eigh(m.symmetrized())
    return cluster(w, tau)


@lru_cache(maxsize=64)
def oracle_spectrum(b: int, level: int, flavor: Flavor, tau: float = DEFAULT_TAU) -> SpectrumMultiset:
    """Cached eigensolve of the level-`level` Laplacian of the given flavor."""
    return eigensolve(laplacian(build_graph(b, level), flavor), tau)


@dataclass(frozen=True)
class VertexFunction:
    graph: BubbleGraph
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.graph.vertex_count,):
            raise ValueError(f"expected {self.graph.vertex_count} values, got {vals.shape}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_interior(cls, g: BubbleGraph, interior_values) -> "VertexFunction":
        vals = np.zeros(g.vertex_count)
        vals[2:] = interior_values
        return cls(g, vals)

    def restrict(self, vertices) -> np.ndarray:
        return self.values[list(vertices)]


def dn_extension(f: VertexFunction, i: int, j: int) -> VertexFunction:
    """Place f on central copy i and -f on central copy j of G_{l+1}, zero elsewhere.

    f must vanish on the boundary. A Dirichlet eigenfunction of G_l becomes
    an eigenfunction of both Laplacians on G_{l+1} with the same eigenvalue.
    """
    g = f.graph
    b = g.b
    if i == j or not (1 <= i <= b and 1 <= j <= b):
        raise ValueError(f"need distinct copy indices in 1..{b}, got ({i}, {j})")
    if np.any(f.values[list(g.boundary)] != 0.0):
        raise ValueError("function must vanish on the boundary")
    big = build_graph(b, g.level + 1)
    out = np.zeros(big.vertex_count)
    out[list(copy_embedding(b, g.level, i).vertex_map)] += f.values
    out[list(copy_embedding(b, g.level, j).vertex_map)] -= f.values
    return VertexFunction(big, out)


class EigenpairCheck(NamedTuple):
    residual: float
    passed: bool


def verify_eigenpair(m: LaplacianMatrix, v, lam: float, tol: float = 1e-12) -> EigenpairCheck:
    """Relative residual ||Lv - lam v|| / ||v||.

    ``v`` may be a plain vector of length ``m.n`` or a VertexFunction on the
    full graph, which is restricted to the rows of ``m``.
    """
    if isinstance(v, VertexFunction):
        x = v.restrict(m.vertices)
        if m.flavor == "dirichlet" and np.any(v.values[list(v.graph.boundary)] != 0.0):
            raise ValueError("Dirichlet check needs a function vanishing on the boundary")
    else:
        x = np.asarray(v, dtype=float)
    if x.shape != (m.n,):
        raise ValueError(f"dimension mismatch: {x.shape} vs {m.n}")
    norm = np.linalg.norm(x)
    if norm == 0.0:
        raise ValueError("zero vector is not an eigenvector")
    res = float(np.linalg.norm(m.apply(x) - lam * x) / norm)
    return EigenpairCheck(res, res < tol)


def effective_resistance(g: BubbleGraph) -> Fraction:
    """Boundary-to-boundary resistance with unit edge conductances.

    Exact series-parallel reduction: parallel edges add conductances, and an
    interior vertex with exactly two neighbours is eliminated in series.
    """
    cond: dict[tuple[int, int], Fraction] = {}
    nbrs: dict[int, set[int]] = {v: set() for v in range(g.vertex_count)}
    for u, v, m in g.edges:
        cond[u, v] = cond.get((u, v), Fraction(0)) + m
        nbrs[u].add(v)
        nbrs[v].add(u)
    terminals = set(g.boundary)
    stack = [v for v in nbrs if v not in terminals]
    while stack:
        x = stack.pop()
        if x not in nbrs or len(nbrs[x]) != 2:
            continue
        p, q = sorted(nbrs[x])
        c1 = cond.pop((min(p, x), max(p, x)))
        c2 = cond.pop((min(q, x), max(q, x)))
        series = c1 * c2 / (c1 + c2)
        key = (p, q)
        cond[key] = cond.get(key, Fraction(0)) + series
        nbrs[p].discard(x)
        nbrs[q].discard(x)
        nbrs[p].add(q)
        nbrs[q].add(p)
        del nbrs[x]
        stack.extend(v for v in (p, q) if v not in terminals)
    s, t = g.boundary
    if set(nbrs) != terminals or (s, t) not in cond:
        raise ValueError("graph is not series-parallel between its boundary vertices")
    return 1 / cond[s, t]
