"""Erdős–Rényi graph sampling and the combinatorial primitives built on it.

Graphs are stored in compressed sparse row form (``indptr``/``indices``) with
strictly sorted neighbour lists. Python-level neighbour lists are cached on
first use because the BFS-heavy code paths (spheres, pruning) iterate over
them vertex by vertex.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class SparseGraph:
    """Undirected simple graph on ``range(n)`` in CSR form."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    d_param: float
    seed: int | None = None

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int]] | np.ndarray,
        d_param: float = 1.0,
        seed: int | None = None,
    ) -> "SparseGraph":
        """Build a graph from undirected edges; loops and duplicates are rejected."""
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("edge endpoint out of range")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise ValueError("self-loops are not allowed")
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        keys = lo * n + hi
        if np.unique(keys).size != keys.size:
            raise ValueError("duplicate edges are not allowed")
        return cls._from_pairs(n, lo, hi, d_param, seed)

    @classmethod
    def _from_pairs(cls, n: int, lo: np.ndarray, hi: np.ndarray, d_param: float, seed: int | None):
        rows = np.concatenate([lo, hi])
        cols = np.concatenate([hi, lo])
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        return cls(n=n, indptr=indptr, indices=cols.astype(np.int64), d_param=float(d_param), seed=seed)

    @cached_property
    def adjacency(self) -> list[list[int]]:
        flat = self.indices.tolist()
        ptr = self.indptr.tolist()
        return [flat[ptr[i]:ptr[i + 1]] for i in range(self.n)]

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def edge_count(self) -> int:
        return int(self.indices.size // 2)

    def neighbors(self, x: int) -> np.ndarray:
        return self.indices[self.indptr[x]:self.indptr[x + 1]]

    def has_edge(self, x: int, y: int) -> bool:
        nb = self.neighbors(x)
        k = np.searchsorted(nb, y)
        return bool(k < nb.size and nb[k] == y)

    def edges(self) -> np.ndarray:
        """All edges ``(u, v)`` with ``u < v`` as an ``(m, 2)`` array, sorted."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        mask = rows < self.indices
        return np.column_stack([rows[mask], self.indices[mask]])

    def row_index(self) -> np.ndarray:
        """Row index of every CSR entry, aligned with ``indices``."""
        return np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)

    def without_edges(self, removed: Iterable[tuple[int, int]]) -> "SparseGraph":
        drop = {(min(u, v), max(u, v)) for u, v in removed}
        e = self.edges()
        if drop:
            keep = np.array([(int(u), int(v)) not in drop for u, v in e], dtype=bool)
            e = e[keep]
        return SparseGraph._from_pairs(self.n, e[:, 0], e[:, 1], self.d_param, self.seed)


@dataclass(frozen=True, eq=False)
class VertexLayering:
    center: int
    spheres: list[np.ndarray]
    ball_edge_count: int

    @property
    def radius(self) -> int:
        return len(self.spheres) - 1

    @property
    def ball(self) -> np.ndarray:
        return np.concatenate(self.spheres)


@dataclass(frozen=True, eq=False)
class DegreeOrder:
    """Vertices sorted by nonincreasing normalized degree (0-based ``sigma``)."""

    sigma: np.ndarray
    alphas: np.ndarray
    d: float
    degrees_sorted: np.ndarray | None = None

    @property
    def n(self) -> int:
        return int(self.sigma.size)

    def rank(self) -> np.ndarray:
        """Inverse permutation: ``rank()[x]`` is the 1-based position of ``x``."""
        inv = np.empty_like(self.sigma)
        inv[self.sigma] = np.arange(1, self.sigma.size + 1)
        return inv


@dataclass(frozen=True)
class ThresholdIndices:
    L: int
    L_geq: int
    L_leq: int
    tau_star: float
    threshold: float


def generate_er(n: int, d: float, seed: int) -> SparseGraph:
    """Sample G(n, d/n) by geometric skipping over the pair stream.

    Pairs ``(i, j)`` with ``i < j`` are enumerated row-major; gaps between
    successive kept pairs are geometric with success probability ``d/n``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not (d > 0):
        raise ValueError("d must be positive")
    if d > n:
        raise ValueError("d must not exceed n (edge probability d/n <= 1)")
    p = d / n
    total = n * (n - 1) // 2
    rng = np.random.default_rng(seed)
    if total == 0:
        return SparseGraph._from_pairs(n, np.zeros(0, np.int64), np.zeros(0, np.int64), d, seed)

    chunks = []
    pos = -1  # linear index of last kept pair
    expected = total * p
    batch = int(expected + 10 * math.sqrt(expected + 1) + 64)
    while True:
        gaps = rng.geometric(p, size=batch)
        idx = pos + np.cumsum(gaps, dtype=np.int64)
        inside = idx < total
        if not inside.all():
            chunks.append(idx[inside])
            break
        chunks.append(idx)
        pos = int(idx[-1])
    lin = np.concatenate(chunks) if chunks else np.zeros(0, np.int64)
    lo, hi = _unrank_pairs(lin, n)
    return SparseGraph._from_pairs(n, lo, hi, d, seed)


def regular_tree(root_degree: int, branching: int, depth: int, d_param: float | None = None) -> SparseGraph:
    """Root with ``root_degree`` children, every other internal vertex with ``branching`` children.

    Vertices are labelled in BFS order, so the root is 0 and sphere ``i`` is a
    contiguous index range. ``d_param`` defaults to ``branching``.
    """
    if root_degree < 1 or branching < 1 or depth < 0:
        raise ValueError("tree parameters must be positive (depth nonnegative)")
    edges = []
    level = [0]
    nxt_id = 1
    for k in range(depth):
        kids = root_degree if k == 0 else branching
        new = []
        for u in level:
            for _ in range(kids):
                edges.append((u, nxt_id))
                new.append(nxt_id)
                nxt_id += 1
        level = new
    return SparseGraph.from_edges(nxt_id, np.array(edges, dtype=np.int64).reshape(-1, 2),
                                  d_param=float(branching if d_param is None else d_param))


def _unrank_pairs(k: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # row i starts at offset i*(2n - i - 1)/2
    b = 2 * n - 1
    i = np.floor((b - np.sqrt(b * b - 8.0 * k)) / 2).astype(np.int64)
    offset = i * (2 * n - i - 1) // 2
    # floating point can be off by one in either direction
    too_far = offset > k
    i[too_far] -= 1
    offset = i * (2 * n - i - 1) // 2
    nxt = (i + 1) * (2 * n - i - 2) // 2
    short = nxt <= k
    i[short] += 1
    offset = i * (2 * n - i - 1) // 2
    j = k - offset + i + 1
    return i, j


def bfs_layers(g: SparseGraph, x: int, r: int) -> VertexLayering:
    """Spheres ``S_0(x), ..., S_r(x)`` and the edge count of the induced ball.

    Stops early (fewer spheres) once a sphere comes out empty.
    """
    if not 0 <= x < g.n:
        raise IndexError(f"vertex {x} out of range for n={g.n}")
    if r < 0:
        raise ValueError("radius must be nonnegative")
    adj = g.adjacency
    dist = {x: 0}
    spheres = [[x]]
    frontier = [x]
    for i in range(1, r + 1):
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if w not in dist:
                    dist[w] = i
                    nxt.append(w)
        if not nxt:
            break
        nxt.sort()
        spheres.append(nxt)
        frontier = nxt
    edges2 = 0
    for u in dist:
        for w in adj[u]:
            if w in dist:
                edges2 += 1
    return VertexLayering(
        center=x,
        spheres=[np.asarray(s, dtype=np.int64) for s in spheres],
        ball_edge_count=edges2 // 2,
    )


def distances_within(g: SparseGraph, x: int, r: int) -> dict[int, int]:
    """Graph distance from ``x`` for every vertex within distance ``r``."""
    adj = g.adjacency
    dist = {x: 0}
    frontier = [x]
    for i in range(1, r + 1):
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if w not in dist:
                    dist[w] = i
                    nxt.append(w)
        if not nxt:
            break
        frontier = nxt
    return dist


def induced_edge_count(g: SparseGraph, vertices: Iterable[int]) -> int:
    vs = set(vertices)
    adj = g.adjacency
    return sum(1 for u in vs for w in adj[u] if w in vs) // 2


def cycle_excess(g: SparseGraph, x: int, r: int) -> int:
    """``|E(G|B_r)| - |B_r| + 1``; zero exactly when the induced ball is a tree."""
    lay = bfs_layers(g, x, r)
    size = sum(len(s) for s in lay.spheres)
    return lay.ball_edge_count - size + 1


def degree_order(g: SparseGraph) -> DegreeOrder:
    return order_from_values(g.degrees.astype(float) / g.d_param, g.d_param, g.degrees)


def order_from_values(alphas: np.ndarray, d: float, degrees: np.ndarray | None = None) -> DegreeOrder:
    """Sort normalized degrees nonincreasingly; ties go to the smaller index."""
    alphas = np.asarray(alphas, dtype=float)
    idx = np.arange(alphas.size)
    sigma = np.lexsort((idx, -alphas))
    deg_sorted = None if degrees is None else np.asarray(degrees)[sigma]
    return DegreeOrder(sigma=sigma, alphas=alphas[sigma], d=float(d), degrees_sorted=deg_sorted)


def boundary_counts(g: SparseGraph, layering: VertexLayering, i: int) -> dict[int, int]:
    """``N_i(y) = |S_i ∩ S_1(y)|`` for ``y`` in ``S_{i-1} ∪ S_i ∪ S_{i+1}``.

    Vertices of ``S_{i+1}`` are found by scanning neighbours of ``S_i`` so the
    layering only needs to reach sphere ``i``.
    """
    if not 0 <= i <= layering.radius:
        raise ValueError(f"sphere index {i} outside layering radius {layering.radius}")
    adj = g.adjacency
    counts: Counter[int] = Counter()
    for u in layering.spheres[i].tolist():
        for w in adj[u]:
            counts[w] += 1
    out = {int(y): 0 for s in layering.spheres[max(i - 1, 0): i + 1] for y in s.tolist()}
    out.update(counts)
    return out


def threshold_indices(order: DegreeOrder, d: float, kappa: float, C: float = 1.0) -> ThresholdIndices:
    if not d > 1:
        raise ValueError("d must exceed 1")
    if not 0 < kappa < 0.5:
        raise ValueError("kappa must lie in (0, 1/2)")
    n = order.n
    logd = math.log(d)
    threshold = 2.0 + logd ** (-kappa)
    tau_star = 2.0 + C * logd**2 / min(d, math.log(n))
    L_leq = _count_at_least(order.alphas, threshold)
    L_geq = _count_at_least(order.alphas, tau_star)
    return ThresholdIndices(L=L_leq, L_geq=L_geq, L_leq=L_leq, tau_star=tau_star, threshold=threshold)


def _count_at_least(sorted_desc: np.ndarray, t: float) -> int:
    # alphas are nonincreasing, so count = first position below t
    return int(np.count_nonzero(sorted_desc >= t))


def write_edge_list(g: SparseGraph, path: str | Path, weights: Sequence[float] | None = None) -> None:
    """Header ``n d seed`` then one ``u v`` (or ``u v w``) line per edge."""
    e = g.edges()
    lines = [f"{g.n} {g.d_param!r} {g.seed if g.seed is not None else -1}"]
    if weights is None:
        lines += [f"{u} {v}" for u, v in e.tolist()]
    else:
        lines += [f"{u} {v} {float(w)!r}" for (u, v), w in zip(e.tolist(), weights)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path: str | Path) -> tuple[SparseGraph, np.ndarray | None]:
    text = Path(path).read_text().split("\n")
    head = text[0].split()
    n, d, seed = int(head[0]), float(head[1]), int(head[2])
    rows = [ln.split() for ln in text[1:] if ln.strip()]
    edges = [(int(r[0]), int(r[1])) for r in rows]
    w = np.array([float(r[2]) for r in rows]) if rows and len(rows[0]) == 3 else None
    g = SparseGraph.from_edges(n, edges, d_param=d, seed=None if seed < 0 else seed)
    return g, w
