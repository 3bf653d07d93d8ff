"""Matrix-free symmetric operators around an Erdős–Rényi sample.

Every operator exposes ``n``, ``matvec`` (accepting a vector or an ``(n, k)``
block) and ``dense``. The expectation matrix has zero diagonal, i.e.
``E[A] = (d/n)(J - I)``, so centering subtracts a rank-one term and adds back
``(d/n) v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Protocol

import numpy as np
import scipy.sparse as sp

from .graph_core import DegreeOrder, SparseGraph, distances_within

DENSE_CAP = 2000

Kind = Literal["centered", "plain", "pruned_restricted", "wigner"]


class SymmetricOperator(Protocol):
    n: int

    def matvec(self, v: np.ndarray) -> np.ndarray: ...

    def dense(self, cap: int = DENSE_CAP) -> np.ndarray: ...


def _csr(g: SparseGraph, data: np.ndarray | None = None) -> sp.csr_matrix:
    vals = np.ones(g.indices.size) if data is None else data
    return sp.csr_matrix((vals, g.indices, g.indptr), shape=(g.n, g.n))


def _check_dim(v: np.ndarray, n: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[0] != n:
        raise ValueError(f"dimension mismatch: operator has n={n}, vector has {v.shape[0]}")
    return v


@dataclass(frozen=True, eq=False)
class CenteredOperator:
    """``kind`` selects ``A``, ``A - E[A]`` or the pruned, restricted variant.

    For ``pruned_restricted``, ``graph`` is the pruned graph, ``outside`` marks
    the coordinates the expectation shift acts on and ``mask`` the retained
    vertex set.
    """

    graph: SparseGraph
    kind: Kind = "centered"
    d: float | None = None
    mask: np.ndarray | None = None
    outside: np.ndarray | None = None
    base: SparseGraph | None = None

    def __post_init__(self):
        object.__setattr__(self, "_A", _csr(self.graph))
        if self.d is None:
            object.__setattr__(self, "d", self.graph.d_param)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def p(self) -> float:
        return self.d / self.graph.n

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = _check_dim(v, self.n)
        if self.kind == "plain":
            return self._A @ v
        if self.kind == "centered":
            return self._A @ v - self.p * v.sum(axis=0) + self.p * v
        if self.kind == "pruned_restricted":
            m = self.mask
            vm = v * (m if v.ndim == 1 else m[:, None]) if m is not None else v
            out = self._A @ vm
            o = self.outside
            if o is None:
                out = out - self.p * vm.sum(axis=0) + self.p * vm
            else:
                ow = o.astype(float) if vm.ndim == 1 else o.astype(float)[:, None]
                vo = vm * ow
                out = out - self.p * ow * vo.sum(axis=0) + self.p * vo
            if m is not None:
                out = out * (m if out.ndim == 1 else m[:, None])
            return out
        raise ValueError(f"unknown operator kind {self.kind!r}")

    def dense(self, cap: int = DENSE_CAP) -> np.ndarray:
        return materialize_dense(self, cap)


def centered_matvec(op: CenteredOperator, v: np.ndarray) -> np.ndarray:
    return op.matvec(v)


def centered(g: SparseGraph, d: float | None = None) -> CenteredOperator:
    return CenteredOperator(g, "centered", d)


def plain(g: SparseGraph) -> CenteredOperator:
    return CenteredOperator(g, "plain")


def pruned_restricted(base: CenteredOperator, pruned, l: int, order: DegreeOrder) -> CenteredOperator:
    """Operator of ``A_tau`` with the expectation shift outside the hub balls.

    Rows and columns of ``sigma(1), ..., sigma(l-1)`` are zeroed.
    """
    if l < 1:
        raise ValueError("l must be at least 1")
    if pruned.base is not base.graph and not _same_graph(pruned.base, base.graph):
        raise ValueError("pruned graph was not built from the operator's graph")
    n = base.n
    mask = np.ones(n, dtype=bool)
    mask[order.sigma[: l - 1]] = False
    zone = hub_zone(pruned)
    return CenteredOperator(
        pruned.graph, "pruned_restricted", base.d, mask=mask, outside=~zone, base=base.graph
    )


def hub_zone(pruned) -> np.ndarray:
    """Union of the balls of radius ``r_{x,tau} - 2`` around hubs in the pruned graph."""
    zone = np.zeros(pruned.graph.n, dtype=bool)
    for x, rad in pruned.radii.items():
        if rad - 2 >= 0:
            zone[list(distances_within(pruned.graph, x, rad - 2))] = True
    return zone


def _same_graph(a: SparseGraph, b: SparseGraph) -> bool:
    return a.n == b.n and np.array_equal(a.indptr, b.indptr) and np.array_equal(a.indices, b.indices)


@dataclass(frozen=True)
class WeightLaw:
    """A bounded weight law with declared moments; ``sampler(rng, size)`` draws."""

    name: str
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    mean: float
    variance: float
    bound: float

    def validate(self, tol: float = 1e-12) -> None:
        if abs(self.mean) > tol:
            raise ValueError(f"weight law {self.name!r} must have zero mean")
        if abs(self.variance - 1.0) > tol:
            raise ValueError(f"weight law {self.name!r} must have unit variance")
        if not math.isfinite(self.bound) or self.bound <= 0:
            raise ValueError(f"weight law {self.name!r} must be bounded")


RADEMACHER = WeightLaw("rademacher", lambda rng, m: rng.choice([-1.0, 1.0], size=m), 0.0, 1.0, 1.0)
UNIFORM_SCALED = WeightLaw(
    "uniform-scaled", lambda rng, m: rng.uniform(-math.sqrt(3), math.sqrt(3), size=m), 0.0, 1.0, math.sqrt(3)
)
LAWS = {"rademacher": RADEMACHER, "uniform-scaled": UNIFORM_SCALED}


@dataclass(frozen=True, eq=False)
class SparseWigner:
    """``X_xy = A_xy W_xy`` with symmetric weights stored on the CSR pattern."""

    graph: SparseGraph
    weights: np.ndarray
    law: str
    bound: float

    def __post_init__(self):
        object.__setattr__(self, "_X", _csr(self.graph, self.weights))

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def kind(self) -> str:
        return "wigner"

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self._X @ _check_dim(v, self.n)

    def dense(self, cap: int = DENSE_CAP) -> np.ndarray:
        return materialize_dense(self, cap)

    def edge_weights(self) -> np.ndarray:
        """Weights aligned with ``graph.edges()``."""
        rows = self.graph.row_index()
        return self.weights[rows < self.graph.indices]

    def entry(self, x: int, y: int) -> float:
        nb = self.graph.neighbors(x)
        k = np.searchsorted(nb, y)
        if k < nb.size and nb[k] == y:
            return float(self.weights[self.graph.indptr[x] + k])
        return 0.0


def make_wigner(g: SparseGraph, law: str | WeightLaw = "rademacher", seed: int = 0) -> SparseWigner:
    law = LAWS[law] if isinstance(law, str) else law
    law.validate()
    rng = np.random.default_rng(seed)
    rows = g.row_index()
    cols = g.indices
    upper = rows < cols
    w_up = np.asarray(law.sampler(rng, int(upper.sum())), dtype=float)
    if np.any(np.abs(w_up) > law.bound + 1e-12):
        raise ValueError(f"sampler of {law.name!r} exceeded its declared bound")
    # mirror each upper entry onto its transpose position
    key_up = rows[upper] * g.n + cols[upper]
    key_all = np.minimum(rows, cols) * g.n + np.maximum(rows, cols)
    pos = np.searchsorted(key_up, key_all)
    weights = w_up[pos]
    return SparseWigner(g, weights, law.name, law.bound)


def generalized_alpha(x_op: SparseWigner, d: float) -> np.ndarray:
    if not d > 0:
        raise ValueError("d must be positive")
    rows = x_op.graph.row_index()
    return np.bincount(rows, weights=x_op.weights**2, minlength=x_op.n) / d


def materialize_dense(op, cap: int = DENSE_CAP) -> np.ndarray:
    n = op.n
    if n > cap:
        raise ValueError(f"dense materialization capped at n={cap}, got n={n}")
    if isinstance(op, SparseWigner):
        return op._X.toarray()
    if isinstance(op, CenteredOperator):
        A = op._A.toarray()
        if op.kind == "plain":
            return A
        p = op.p
        if op.kind == "centered":
            return A - p * (np.ones((n, n)) - np.eye(n))
        if op.kind == "pruned_restricted":
            o = np.ones(n) if op.outside is None else op.outside.astype(float)
            M = A - p * (np.outer(o, o) - np.diag(o))
            if op.mask is not None:
                m = op.mask.astype(float)
                M = M * np.outer(m, m)
            return M
    return op.matvec(np.eye(n))
