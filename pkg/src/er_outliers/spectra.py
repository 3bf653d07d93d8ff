"""Dense and Krylov eigensolvers plus the Jacobi form of an operator around a vertex."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .operators import DENSE_CAP, materialize_dense

EXHAUSTION_RATIO = 1e-12


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    residuals: np.ndarray
    converged: np.ndarray | None = None
    iterations: int = 0


@dataclass(frozen=True, eq=False)
class TridiagonalForm:
    """Upper-left Jacobi block ``M_00 .. M_mm`` of an operator around ``center``."""

    diag: np.ndarray
    offdiag: np.ndarray
    basis_norms: np.ndarray
    m: int
    center: int
    exhausted: bool = False
    basis: np.ndarray | None = None

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


def full_spectrum(op, want_vectors: bool = False, cap: int = DENSE_CAP) -> SpectrumResult:
    M = op if isinstance(op, np.ndarray) else materialize_dense(op, cap)
    if want_vectors:
        w, V = np.linalg.eigh(M)
        w, V = w[::-1], V[:, ::-1]
        res = np.linalg.norm(M @ V - V * w, axis=0)
        return SpectrumResult(w, V, res)
    w = np.linalg.eigvalsh(M)[::-1]
    return SpectrumResult(w, None, np.full(w.size, np.nan))


def _apply(op, X: np.ndarray) -> np.ndarray:
    if isinstance(op, np.ndarray):
        return op @ X
    return op.matvec(X)


def extremal_eigs(
    op,
    k: int,
    side: Literal["top", "bottom", "both"] = "top",
    tol: float = 1e-10,
    max_iter: int | None = None,
    seed: int = 0,
    block_size: int | None = None,
    max_basis: int = 800,
) -> SpectrumResult:
    """Extremal eigenpairs by block Lanczos with full reorthogonalization.

    A block start vector keeps clusters of up to ``block_size`` nearly equal
    eigenvalues resolvable, which matters for hubs of equal degree. Pairs whose
    residual exceeds ``tol`` times the spectral scale are reported with
    ``converged=False`` rather than raising.
    """
    n = op.shape[0] if isinstance(op, np.ndarray) else op.n
    if k < 1:
        raise ValueError("k must be positive")
    nside = 2 if side == "both" else 1
    if nside * k > n:
        raise ValueError("requested more eigenpairs than the dimension")
    s = min(n, block_size or (k + 2))
    cap = min(n, max_basis)
    steps_cap = max_iter if max_iter is not None else cap // s + 1

    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, s)))
    V = np.empty((n, cap))
    H = np.zeros((cap, cap))
    m = 0
    steps = 0
    while True:
        b = min(Q.shape[1], cap - m)
        Q = Q[:, :b]
        AQ = _apply(op, Q)
        V[:, m:m + b] = Q
        m += b
        steps += 1
        blk = V[:, :m].T @ AQ
        H[:m, m - b:m] = blk
        H[m - b:m, :m] = blk.T
        W = AQ - V[:, :m] @ blk
        W -= V[:, :m] @ (V[:, :m].T @ W)

        theta, S = np.linalg.eigh(H[:m, :m])
        idx = _wanted(m, min(k, m), side)
        # A V = V H + W E^T, so the Ritz residual lives on the last block
        est = np.linalg.norm(W @ S[m - b:m, idx], axis=0)
        scale = max(float(np.abs(theta).max()), 1e-300)
        if (est <= tol * scale).all() or m >= cap or steps >= steps_cap:
            break
        Q, Rq = np.linalg.qr(W)
        weak = np.abs(np.diag(Rq)) <= 1e-10 * max(1.0, float(np.abs(Rq).max()))
        if weak.any():
            # invariant directions: continue with fresh random vectors
            fresh = rng.standard_normal((n, int(weak.sum())))
            for _ in range(2):
                fresh -= V[:, :m] @ (V[:, :m].T @ fresh)
                fresh -= Q[:, ~weak] @ (Q[:, ~weak].T @ fresh)
            Q[:, weak] = np.linalg.qr(fresh)[0]

    vals = theta[idx]
    vecs = V[:, :m] @ S[:, idx]
    res = np.linalg.norm(_apply(op, vecs) - vecs * vals, axis=0)
    order = np.argsort(vals)[::-1]
    return SpectrumResult(
        eigenvalues=vals[order],
        eigenvectors=vecs[:, order],
        residuals=res[order],
        converged=(res <= tol * scale)[order],
        iterations=steps,
    )


def _wanted(m: int, k: int, side: str) -> np.ndarray:
    top = np.arange(m - k, m)
    bottom = np.arange(0, k)
    if side == "top":
        return top
    if side == "bottom":
        return bottom
    if side == "both":
        return np.unique(np.concatenate([bottom, top]))
    raise ValueError(f"unknown side {side!r}")


def tridiagonalize(op, x: int, r: int, keep_basis: bool = False) -> TridiagonalForm:
    """Gram-Schmidt Krylov recursion from ``1_x`` with full reorthogonalization.

    ``basis`` (when kept) holds the unnormalized vectors ``g_0, ..., g_m`` as
    columns, with ``g_{i+1} = Q_i X g_i``.
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    n = op.shape[0] if isinstance(op, np.ndarray) else op.n
    Q = np.zeros((n, r + 1))
    Q[x, 0] = 1.0
    diag, off = [], []
    norms = [1.0]
    exhausted = False
    m = 0
    for i in range(r + 1):
        w = _apply(op, Q[:, i])
        diag.append(float(Q[:, i] @ w))
        if i == r:
            break
        for _ in range(2):
            w -= Q[:, : i + 1] @ (Q[:, : i + 1].T @ w)
        beta = float(np.linalg.norm(w))
        if beta <= EXHAUSTION_RATIO:
            exhausted = True
            break
        off.append(beta)
        norms.append(norms[-1] * beta)
        Q[:, i + 1] = w / beta
        m = i + 1
    basis = Q[:, : m + 1] * np.asarray(norms) if keep_basis else None
    return TridiagonalForm(
        diag=np.asarray(diag),
        offdiag=np.asarray(off),
        basis_norms=np.asarray(norms),
        m=m,
        center=x,
        exhausted=exhausted,
        basis=basis,
    )


def bipartite_diag_check(form: TridiagonalForm, g=None, x: int | None = None) -> bool:
    """True iff the diagonal vanishes (to 1e-10 relative), as for bipartite balls."""
    scale = max(1.0, float(np.abs(form.offdiag).max(initial=0.0)))
    return bool(np.abs(form.diag).max(initial=0.0) <= 1e-10 * scale)
