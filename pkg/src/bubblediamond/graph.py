"""Bubble-diamond multigraphs G_l and the copy embeddings G_l -> G_{l+1}.

Vertex ids are integers in canonical order: the two boundary vertices first
(left, right), then interior vertices left to right in construction order.
G_{l+1} is assembled from b+2 copies of G_l placed on the edges of G_1:
copies 1..b form the central bubble, b+1 is the left stem, b+2 the right stem.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class GraphError(ValueError):
    pass


def _check_b(b: int) -> None:
    if not isinstance(b, (int, np.integer)) or isinstance(b, bool) or b < 2:
        raise GraphError(f"branching parameter must be an integer >= 2, got {b!r}")


def vertex_count(b: int, level: int) -> int:
    """|V(G_l)| = 2((b+2)^l + b)/(b+1)."""
    num = 2 * ((b + 2) ** level + b)
    assert num % (b + 1) == 0
    return num // (b + 1)


@dataclass(frozen=True)
class BubbleGraph:
    b: int
    level: int
    vertex_count: int
    edges: tuple[tuple[int, int, int], ...]   # (u, v, multiplicity) with u < v, sorted
    degrees: tuple[int, ...]
    boundary: tuple[int, int] = (0, 1)

    @property
    def interior(self) -> range:
        return range(2, self.vertex_count)

    @property
    def total_multiplicity(self) -> int:
        return sum(m for _, _, m in self.edges)

    def edge_multiset(self) -> dict[tuple[int, int], int]:
        return {(u, v): m for u, v, m in self.edges}

    def adjacency(self) -> np.ndarray:
        """Dense integer adjacency matrix, entries are edge multiplicities."""
        a = np.zeros((self.vertex_count, self.vertex_count), dtype=np.int64)
        for u, v, m in self.edges:
            a[u, v] += m
            a[v, u] += m
        return a

    def neighbors(self) -> list[list[tuple[int, int]]]:
        nb: list[list[tuple[int, int]]] = [[] for _ in range(self.vertex_count)]
        for u, v, m in self.edges:
            nb[u].append((v, m))
            nb[v].append((u, m))
        return nb

    def degree_census(self) -> dict[int, int]:
        census: dict[int, int] = {}
        for d in self.degrees:
            census[d] = census.get(d, 0) + 1
        return dict(sorted(census.items()))

    def is_connected(self) -> bool:
        nb = self.neighbors()
        seen = {0}
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for v, _ in nb[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return len(seen) == self.vertex_count

    def check(self) -> None:
        """Raise GraphError if any structural invariant fails."""
        b, level = self.b, self.level
        problems = []
        if self.vertex_count != vertex_count(b, level):
            problems.append("vertex count")
        if self.total_multiplicity != (b + 2) ** level:
            problems.append("edge multiplicity")
        if sum(self.degrees) != 2 * (b + 2) ** level:
            problems.append("handshake")
        if tuple(self.degrees[:2]) != (1, 1):
            problems.append("boundary degrees")
        if any(d != b + 1 for d in self.degrees[2:]):
            problems.append("interior degrees")
        if not self.is_connected():
            problems.append("connectivity")
        if problems:
            raise GraphError(f"G_{level} (b={b}) violates: {', '.join(problems)}")


def _from_edge_dict(b: int, level: int, n: int, acc: dict[tuple[int, int], int]) -> BubbleGraph:
    edges = tuple(sorted((u, v, m) for (u, v), m in acc.items()))
    deg = [0] * n
    for u, v, m in edges:
        deg[u] += m
        deg[v] += m
    return BubbleGraph(b=b, level=level, vertex_count=n, edges=edges, degrees=tuple(deg))


def _add_edge(acc: dict[tuple[int, int], int], u: int, v: int, m: int) -> None:
    key = (u, v) if u < v else (v, u)
    acc[key] = acc.get(key, 0) + m


def _copy_offsets(b: int, n_inner: int) -> tuple[list[int], list[tuple[int, int]], int]:
    """Interior offsets and endpoint images of the b+2 copies (index k-1)."""
    left_stem = 2
    x = 2 + n_inner
    central0 = x + 1
    y = central0 + b * n_inner
    right_stem = y + 1
    total = right_stem + n_inner
    offsets = [central0 + i * n_inner for i in range(b)] + [left_stem, right_stem]
    ends = [(x, y)] * b + [(0, x), (y, 1)]
    return offsets, ends, total


def _embedding_map(b: int, prev_n: int, k: int) -> np.ndarray:
    offsets, ends, _ = _copy_offsets(b, prev_n - 2)
    vmap = np.empty(prev_n, dtype=np.int64)
    vmap[0], vmap[1] = ends[k - 1]
    vmap[2:] = np.arange(offsets[k - 1], offsets[k - 1] + prev_n - 2)
    return vmap


@lru_cache(maxsize=None)
def build_graph(b: int, level: int) -> BubbleGraph:
    """Return G_level for branching parameter b.

    Results are cached; the returned object is immutable.
    """
    _check_b(b)
    if not isinstance(level, (int, np.integer)) or level < 0:
        raise GraphError(f"level must be a non-negative integer, got {level!r}")
    if level == 0:
        return _from_edge_dict(b, 0, 2, {(0, 1): 1})
    prev = build_graph(b, level - 1)
    _, _, total = _copy_offsets(b, prev.vertex_count - 2)
    acc: dict[tuple[int, int], int] = {}
    for k in range(1, b + 3):
        vmap = _embedding_map(b, prev.vertex_count, k)
        for u, v, m in prev.edges:
            _add_edge(acc, int(vmap[u]), int(vmap[v]), m)
    return _from_edge_dict(b, level, total, acc)


@dataclass(frozen=True)
class CopyEmbedding:
    b: int
    level: int
    copy_index: int
    vertex_map: tuple[int, ...]

    def image_edges(self) -> dict[tuple[int, int], int]:
        acc: dict[tuple[int, int], int] = {}
        for u, v, m in build_graph(self.b, self.level).edges:
            _add_edge(acc, self.vertex_map[u], self.vertex_map[v], m)
        return acc


def copy_embedding(b: int, level: int, k: int) -> CopyEmbedding:
    """Embedding of G_level as copy k inside G_{level+1}."""
    _check_b(b)
    if not 1 <= k <= b + 2:
        raise GraphError(f"copy index must lie in 1..{b + 2}, got {k}")
    g = build_graph(b, level)
    vmap = _embedding_map(b, g.vertex_count, k)
    return CopyEmbedding(b, level, k, tuple(int(v) for v in vmap))


def boundary(g: BubbleGraph) -> tuple[int, int]:
    found = tuple(v for v, d in enumerate(g.degrees) if d == 1)
    if len(found) != 2:
        raise GraphError(f"expected two degree-1 vertices, found {len(found)}")
    return found  # type: ignore[return-value]


def refine(g: BubbleGraph) -> BubbleGraph:
    """Replace every edge of g by a copy of G_1 (the edge-wise construction).

    Produces a graph isomorphic to build_graph(g.b, g.level + 1) but with a
    different vertex numbering; used as an independent construction.
    """
    b = g.b
    acc: dict[tuple[int, int], int] = {}
    n = g.vertex_count
    for u, v, m in g.edges:
        for _ in range(m):
            x, y = n, n + 1
            n += 2
            _add_edge(acc, u, x, 1)
            _add_edge(acc, x, y, b)
            _add_edge(acc, y, v, 1)
    return _from_edge_dict(b, g.level + 1, n, acc)
