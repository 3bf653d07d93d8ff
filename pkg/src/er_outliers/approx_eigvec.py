"""Localized approximate eigenvectors around a high-degree vertex.

The vector is a radial profile on the BFS spheres of the vertex, with
coefficients decaying geometrically at the rate ``sqrt(d / (D_x - d))``.
Its residual against ``sqrt(d) * Lambda(alpha_x)`` splits exactly into five
pieces: the expectation shift (``w0``), intra/outward surplus edges (``w1``),
inward count fluctuations (``w2``), sphere-growth fluctuations (``w3``) and the
truncation boundary (``w4``).

For radii 0 and 1 the boundary term absorbs what the generic formula would
attribute to the missing interior rows; see ``_boundary_coefficient``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .graph_core import SparseGraph, VertexLayering, bfs_layers, boundary_counts
from .operators import CenteredOperator, SparseWigner, generalized_alpha
from .transfer import outlier_location

Sign = Literal["plus", "minus"]


@dataclass(frozen=True, eq=False)
class ApproxEigvector:
    center: int
    radius: int
    coefficients: np.ndarray
    support: np.ndarray
    values: np.ndarray
    sign: Sign
    predicted_eigenvalue: float
    requested_radius: int
    degree: float
    layering: VertexLayering | None = None
    basis_norms: np.ndarray | None = None

    @property
    def truncated(self) -> bool:
        return self.radius < self.requested_radius

    def dense(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        out[self.support] = self.values
        return out


@dataclass(frozen=True, eq=False)
class ErrorDecomposition:
    terms: list[np.ndarray]
    norms: np.ndarray
    reconstruction_residual: float
    total_residual: float
    vector: ApproxEigvector = field(repr=False)

    @property
    def term_count(self) -> int:
        return len(self.terms)


def local_radius(D_x: float, n: int) -> int:
    if D_x <= 1:
        raise ValueError("degree must exceed 1 for the radius formula")
    return max(0, math.floor(math.log(n) / (3.0 * math.log(D_x))))


def radial_coefficients(D_x: float, d: float, r: int) -> np.ndarray:
    """``u_0 .. u_{r+1}``; normalized over ``0..r``, ``u_{r+1}`` follows the recursion."""
    if D_x <= d:
        raise ValueError("coefficients need D_x > d")
    if r < 0:
        raise ValueError("radius must be nonnegative")
    u = np.empty(r + 2)
    u[0] = 1.0
    u[1] = math.sqrt(D_x) / math.sqrt(D_x - d)
    q = math.sqrt(d / (D_x - d))
    for i in range(2, r + 2):
        u[i] = u[i - 1] * q
    return u / math.sqrt(float(np.sum(u[: r + 1] ** 2)))


def _signed(u: np.ndarray, sign: Sign) -> np.ndarray:
    if sign == "plus":
        return u.copy()
    if sign == "minus":
        return u * (-1.0) ** np.arange(u.size)
    raise ValueError(f"unknown sign {sign!r}")


def radial_vector(g: SparseGraph, x: int, r: int, sign: Sign = "plus", d: float | None = None,
                  strict: bool = False) -> ApproxEigvector:
    """Radial vector ``sum_i u_i |S_i|^{-1/2} 1_{S_i}`` (signs alternate for ``minus``).

    With ``strict`` an empty sphere before ``r`` raises; otherwise the radius
    shrinks to the last nonempty sphere.
    """
    d = g.d_param if d is None else d
    D_x = float(g.degrees[x])
    lay = bfs_layers(g, x, r + 1)
    r_eff = min(r, lay.radius)
    if strict and r_eff < r:
        raise ValueError(f"sphere S_{r_eff + 1}({x}) is empty")
    u = _signed(radial_coefficients(D_x, d, r_eff), sign)
    sizes = [len(s) for s in lay.spheres[: r_eff + 1]]
    support = np.concatenate(lay.spheres[: r_eff + 1])
    values = np.concatenate([np.full(sz, u[i] / math.sqrt(sz)) for i, sz in enumerate(sizes)])
    lam = math.sqrt(d) * outlier_location(D_x / d, allow_below_two=True)
    return ApproxEigvector(
        center=x, radius=r_eff, coefficients=u, support=support, values=values, sign=sign,
        predicted_eigenvalue=lam if sign == "plus" else -lam, requested_radius=r,
        degree=D_x, layering=lay,
    )


def _boundary_coefficient(u: np.ndarray, r: int, rho: np.ndarray, lam: float, sqrt_d: float) -> float:
    """Coefficient of the outermost kept sphere in the boundary term.

    For ``r >= 2`` the interior recursion gives ``lam u_r = sqrt(d)(u_{r-1} + u_{r+1})``.
    For ``r = 1`` the row of sphere 1 couples to the exact ``sqrt(D_x)`` entry,
    leaving ``-sqrt(d) u_2``; for ``r = 0`` nothing cancels ``-lam u_0``.
    """
    if r >= 2:
        return u[r - 1] * rho[r] - u[r - 1] * sqrt_d - u[r + 1] * sqrt_d
    if r == 1:
        return -u[2] * sqrt_d
    return -lam * u[0]


def _assemble(n: int, u: np.ndarray, r: int, lam: float, sqrt_d: float,
              blocks: list[np.ndarray], bnorm: np.ndarray, surplus, inward) -> list[np.ndarray]:
    """Shared assembly of the fluctuation terms for both graph and weighted cases.

    ``blocks[i]`` are the unit radial vectors of spheres ``0..r+1`` (the last one
    may be empty), ``bnorm[i]`` their unnormalized norms.
    """
    rho = np.zeros(r + 2)
    for j in range(1, r + 2):
        rho[j] = bnorm[j] / bnorm[j - 1] if bnorm[j - 1] > 0 else 0.0
    w1, w2 = surplus, inward
    w3 = np.zeros(n)
    if r >= 2:
        w3 += u[2] * (rho[2] - sqrt_d) * blocks[1]
        for i in range(2, r):
            w3 += (u[i + 1] * (rho[i + 1] - sqrt_d) + u[i - 1] * (rho[i] - sqrt_d)) * blocks[i]
    w4 = _boundary_coefficient(u, r, rho, lam, sqrt_d) * blocks[r]
    if bnorm[r + 1] > 0:
        w4 = w4 + u[r] * rho[r + 1] * blocks[r + 1]
    return [w1, w2, w3, w4]


def error_decomposition(g: SparseGraph, op: CenteredOperator, x: int, r: int,
                        sign: Sign = "plus") -> ErrorDecomposition:
    """Split ``(A_bar - lam) v`` into the five terms ``w0 .. w4``."""
    d = op.d
    v = radial_vector(g, x, r, sign, d)
    r = v.radius
    n = g.n
    u = v.coefficients
    lam = v.predicted_eigenvalue
    sqrt_d = math.sqrt(d)
    lay = v.layering
    spheres = list(lay.spheres[: r + 2])
    if len(spheres) < r + 2:
        spheres.append(np.zeros(0, dtype=np.int64))
    sizes = np.array([len(s) for s in spheres], dtype=float)
    blocks = []
    for s, sz in zip(spheres, sizes):
        b = np.zeros(n)
        if sz:
            b[s] = 1.0 / math.sqrt(sz)
        blocks.append(b)

    w1 = np.zeros(n)
    w2 = np.zeros(n)
    for i in range(r + 1):
        cnt = boundary_counts(g, lay, i)
        coef = u[i] / math.sqrt(sizes[i])
        nxt = spheres[i + 1].tolist()
        for y in nxt:
            w1[y] += coef * (cnt.get(y, 0) - 1)
        for y in spheres[i].tolist():
            w1[y] += coef * cnt.get(y, 0)
        if i >= 1:
            ratio = sizes[i] / sizes[i - 1]
            for y in spheres[i - 1].tolist():
                w2[y] += coef * (cnt.get(y, 0) - ratio)

    vd = v.dense(n)
    p = d / n
    w0 = p * vd - p * float(v.values.sum()) * np.ones(n)
    rest = _assemble(n, u, r, lam, sqrt_d, blocks, np.sqrt(sizes), w1, w2)
    terms = [w0] + rest
    resid = op.matvec(vd) - lam * vd
    return _finish(terms, resid, v)


def _finish(terms: list[np.ndarray], resid: np.ndarray, v: ApproxEigvector) -> ErrorDecomposition:
    total = np.sum(terms, axis=0)
    return ErrorDecomposition(
        terms=terms,
        norms=np.array([np.linalg.norm(t) for t in terms]),
        reconstruction_residual=float(np.linalg.norm(resid - total)),
        total_residual=float(np.linalg.norm(resid)),
        vector=v,
    )


def _wigner_layers(x_op: SparseWigner, x: int, r: int):
    """Spheres by graph distance on the support graph, and ``g_0 .. g_{r+1}``."""
    g = x_op.graph
    lay = bfs_layers(g, x, r + 1)
    spheres = list(lay.spheres)
    n = g.n
    gs = [np.zeros(n)]
    gs[0][x] = 1.0
    for i in range(1, len(spheres)):
        full = x_op.matvec(gs[-1])
        gi = np.zeros(n)
        gi[spheres[i]] = full[spheres[i]]
        gs.append(gi)
    return lay, spheres, gs


def radial_vector_weighted(x_op: SparseWigner, x: int, r: int, sign: Sign = "plus",
                           d: float | None = None) -> ApproxEigvector:
    d = x_op.graph.d_param if d is None else d
    lay, spheres, gs = _wigner_layers(x_op, x, r)
    norms = np.array([np.linalg.norm(gi) for gi in gs])
    r_eff = min(r, len(spheres) - 1)
    for i in range(1, r_eff + 1):
        if norms[i] == 0.0:
            raise ValueError(f"g_{i} vanishes around vertex {x}")
    D_x = float(generalized_alpha(x_op, d)[x] * d)
    u = _signed(radial_coefficients(D_x, d, r_eff), sign)
    vec = np.zeros(x_op.n)
    for i in range(r_eff + 1):
        vec += u[i] * gs[i] / norms[i]
    support = np.concatenate(spheres[: r_eff + 1])
    lam = math.sqrt(d) * outlier_location(D_x / d, allow_below_two=True)
    return ApproxEigvector(
        center=x, radius=r_eff, coefficients=u, support=support, values=vec[support], sign=sign,
        predicted_eigenvalue=lam if sign == "plus" else -lam, requested_radius=r,
        degree=D_x, layering=lay, basis_norms=norms,
    )


def wigner_error_terms(x_op: SparseWigner, x: int, r: int, d: float | None = None,
                       sign: Sign = "plus") -> ErrorDecomposition:
    """Four-term split of ``(X - lam) v``; there is no expectation term."""
    d = x_op.graph.d_param if d is None else d
    v = radial_vector_weighted(x_op, x, r, sign, d)
    r = v.radius
    n = x_op.n
    lay, spheres, gs = _wigner_layers(x_op, x, r)
    if len(spheres) < r + 2:
        spheres.append(np.zeros(0, dtype=np.int64))
        gs.append(np.zeros(n))
    norms = np.array([np.linalg.norm(gi) for gi in gs[: r + 2]])
    blocks = [gi / nm if nm > 0 else np.zeros(n) for gi, nm in zip(gs[: r + 2], norms)]
    u = v.coefficients
    w1 = np.zeros(n)
    w2 = np.zeros(n)
    for i in range(r + 1):
        Xg = x_op.matvec(gs[i])
        coef = u[i] / norms[i]
        nxt = spheres[i + 1]
        w1[nxt] += coef * (Xg[nxt] - gs[i + 1][nxt])
        w1[spheres[i]] += coef * Xg[spheres[i]]
        if i >= 1:
            prev = spheres[i - 1]
            part = np.zeros(n)
            part[prev] = Xg[prev]
            w2 += coef * (part - (norms[i] ** 2 / norms[i - 1] ** 2) * gs[i - 1])
    terms = _assemble(n, u, r, v.predicted_eigenvalue, math.sqrt(d), blocks, norms, w1, w2)
    vd = v.dense(n)
    resid = x_op.matvec(vd) - v.predicted_eigenvalue * vd
    return _finish(terms, resid, v)
