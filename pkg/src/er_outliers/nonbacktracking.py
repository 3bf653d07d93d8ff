"""Nonbacktracking operator of ``A_bar / sqrt(d)`` and the vertex-space pencil tied to it.

Vectors on ordered pairs are stored flat with ``(x, y) -> x * n + y``, so a
vector reshapes to an ``(n, n)`` array ``W`` with ``W[x, y] = w_(x,y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .operators import DENSE_CAP, CenteredOperator, materialize_dense
from .spectra import extremal_eigs

NBT_CAP = 4000
SMALL_NBT = 30


@dataclass(frozen=True, eq=False)
class NbtOperator:
    base: CenteredOperator

    def __post_init__(self):
        if self.base.kind != "centered":
            raise ValueError("the nonbacktracking operator is built on the centered kind")
        if self.base.n > NBT_CAP:
            raise ValueError(f"pair space capped at n={NBT_CAP}, got n={self.base.n}")

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def dim(self) -> int:
        return self.base.n ** 2

    def matvec(self, w: np.ndarray) -> np.ndarray:
        return nbt_matvec(self, w)


def nbt_matvec(op: NbtOperator, w: np.ndarray) -> np.ndarray:
    """``(Bw)_(x,y) = d^{-1/2} [sum_v A_bar_yv w_(y,v) - A_bar_yx w_(y,x)]`` in ``O(n^2 + nnz)``."""
    n = op.n
    w = np.asarray(w, dtype=float)
    if w.shape != (n * n,):
        raise ValueError(f"dimension mismatch: expected {n * n} pair entries, got {w.shape}")
    return _step(op, w.reshape(n, n), transposed=False).T.reshape(-1)


def _step(op: NbtOperator, M: np.ndarray, transposed: bool) -> np.ndarray:
    """One product on an ``(n, n)`` array, flipping the storage layout.

    With ``transposed=False`` the input is ``W`` and the result is ``(BW)^T``;
    with ``transposed=True`` the input is ``W^T`` and the result is ``BW``.
    Neither direction needs an explicit transpose.
    """
    n = op.n
    g = op.base.graph
    p = op.base.p
    rows = g.row_index()
    cols = g.indices
    diag = np.diagonal(M).copy()
    if transposed:
        aw = M[cols, rows]
        s = np.bincount(rows, weights=aw, minlength=n) - p * (M.sum(axis=0) - diag)
        out = p * M
        out += s[None, :]
        out[np.diag_indices(n)] -= p * diag
        out[cols, rows] -= aw
    else:
        aw = M[rows, cols]
        s = np.bincount(rows, weights=aw, minlength=n) - p * (M.sum(axis=1) - diag)
        out = p * M
        out += s[:, None]
        out[np.diag_indices(n)] -= p * diag
        out[rows, cols] -= aw
    out /= math.sqrt(op.base.d)
    return out


def dense_nbt(op: NbtOperator, cap: int = SMALL_NBT) -> np.ndarray:
    """``B`` assembled entrywise from its definition (oracle use only)."""
    n = op.n
    if n > cap:
        raise ValueError(f"dense pair matrix capped at n={cap}")
    Abar = materialize_dense(op.base)
    B = np.zeros((n * n, n * n))
    for x in range(n):
        for y in range(n):
            e = x * n + y
            for v in range(n):
                if v != x:
                    B[e, y * n + v] = Abar[y, v]
    return B / math.sqrt(op.base.d)


@dataclass(frozen=True)
class RadiusEstimate:
    value: float
    ratios: np.ndarray
    iterations: int
    period: int


def spectral_radius_nbt(op: NbtOperator, iters: int = 500, seed: int = 0, period: int = 25) -> RadiusEstimate:
    """Power iteration estimate of ``rho(B)``.

    The iterate is renormalized every ``period`` products; each growth ratio is
    the per-step geometric mean over one period, and the estimate is the
    geometric mean of the last 10 of them. Averaging over whole periods damps
    the oscillation a complex leading pair causes in single-step ratios.
    ``B`` is not normal, so this is an estimate, not a bound.
    """
    if iters < 50:
        raise ValueError("at least 50 iterations are required")
    if period < 1 or iters // period < 10:
        raise ValueError("need at least 10 full renormalization periods")
    rng = np.random.default_rng(seed)
    n = op.n
    w = rng.standard_normal((n, n))
    w /= np.linalg.norm(w)
    flipped = False
    periods = iters // period
    ratios = np.empty(periods)
    for j in range(periods):
        logsum = 0.0
        for k in range(period):
            w = _step(op, w, flipped)
            flipped = not flipped
            nrm = float(np.linalg.norm(w))
            if not math.isfinite(nrm) or nrm < 1e-300:
                raise ArithmeticError(f"power iteration broke down at step {j * period + k} (norm {nrm})")
            logsum += math.log(nrm)
            w /= nrm
        ratios[j] = math.exp(logsum / period)
    tail = ratios[-10:]
    return RadiusEstimate(float(np.exp(np.mean(np.log(tail)))), ratios, periods * period, period)


@dataclass(frozen=True, eq=False)
class IharaBassPair:
    t: float
    a_t: np.ndarray
    m_t: np.ndarray
    det_value: float
    min_eig: float
    logabsdet: float
    negative_count: int


def _pair_factors(Abar: np.ndarray, t: float, d: float, rtol: float = 1e-12):
    sq = Abar * Abar
    den = t * t * d - sq
    bad = np.abs(den) <= rtol * np.maximum(t * t * d, sq)
    if bad.any():
        x, y = map(int, np.argwhere(bad)[0])
        raise ValueError(f"t={t!r} is excluded: t^2 d equals A_bar[{x},{y}]^2")
    return sq, den


def ihara_bass_pair(base: CenteredOperator, t: float, cap: int = DENSE_CAP) -> IharaBassPair:
    Abar = materialize_dense(base, cap)
    d = base.d
    sq, den = _pair_factors(Abar, t, d)
    a_t = t * math.sqrt(d) * Abar / den
    m_t = 1.0 + (sq / den).sum(axis=1)
    K = np.diag(m_t) - a_t
    _, blocks, _ = sla.ldl(K)
    sign, logabs, neg = _ldl_stats(blocks)
    return IharaBassPair(
        t=float(t), a_t=a_t, m_t=m_t,
        det_value=sign * math.exp(logabs) if logabs < 700 else sign * math.inf,
        min_eig=float(np.linalg.eigvalsh(K)[0]), logabsdet=logabs, negative_count=neg,
    )


def _ldl_stats(D: np.ndarray) -> tuple[float, float, int]:
    """Sign, log|det| and negative-eigenvalue count of a block-diagonal LDL factor."""
    n = D.shape[0]
    sign, logabs, neg = 1.0, 0.0, 0
    i = 0
    while i < n:
        if i + 1 < n and D[i + 1, i] != 0.0:
            blk = D[i:i + 2, i:i + 2]
            det = blk[0, 0] * blk[1, 1] - blk[0, 1] * blk[1, 0]
            ev = np.linalg.eigvalsh(blk)
            neg += int((ev < 0).sum())
            i += 2
        else:
            det = D[i, i]
            neg += int(det < 0)
            i += 1
        if det == 0.0:
            return 0.0, -math.inf, neg
        sign *= math.copysign(1.0, det)
        logabs += math.log(abs(det))
    return sign, logabs, neg


def excluded_points(base: CenteredOperator, cap: int = DENSE_CAP) -> np.ndarray:
    """Nonnegative ``t`` with ``t^2 d = A_bar_xy^2`` for some pair; ``-t`` is excluded as well."""
    Abar = materialize_dense(base, cap)
    vals = np.unique(np.round(np.abs(Abar).ravel(), 14))
    return np.sort(vals / math.sqrt(base.d))


def _negative_count(Abar: np.ndarray, t: float, d: float) -> int:
    sq, den = _pair_factors(Abar, t, d)
    K = np.diag(1.0 + (sq / den).sum(axis=1)) - t * math.sqrt(d) * Abar / den
    _, blocks, _ = sla.ldl(K)
    return _ldl_stats(blocks)[2]


def ihara_bass_roots(base: CenteredOperator, t_max: float, grid: int = 4000,
                     gap: float = 1e-9, tol: float = 1e-12, cap: int = DENSE_CAP) -> np.ndarray:
    """Real ``t`` in ``[-t_max, t_max]`` where ``M(t) - A_bar(t)`` is singular.

    The pencil's inertia only changes at such roots or at excluded points, so the
    range is split at the excluded points and each piece is scanned on a grid;
    a jump in the negative count brackets a root that bisection then refines.
    A jump of ``k`` records the root ``k`` times.
    """
    Abar = materialize_dense(base, cap)
    d = base.d
    pos = excluded_points(base, cap)
    cuts = np.unique(np.concatenate([-pos, pos, [-t_max, t_max]]))
    cuts = cuts[(cuts >= -t_max) & (cuts <= t_max)]
    step = 2 * t_max / grid
    roots: list[float] = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        lo, hi = a + gap, b - gap
        if hi <= lo:
            continue
        m = max(2, int(math.ceil((hi - lo) / step)) + 1)
        ts = np.linspace(lo, hi, m)
        counts = [_negative_count(Abar, t, d) for t in ts]
        for i in range(m - 1):
            jump = counts[i + 1] - counts[i]
            if jump == 0:
                continue
            roots += _bisect_jumps(Abar, d, ts[i], ts[i + 1], counts[i], counts[i + 1], tol)
    return np.sort(np.asarray(roots))


def _bisect_jumps(Abar, d, lo, hi, c_lo, c_hi, tol) -> list[float]:
    """Locate every inertia change between ``lo`` and ``hi`` (may hold several)."""
    if c_lo == c_hi:
        return []
    if hi - lo <= tol:
        return [0.5 * (lo + hi)] * abs(c_hi - c_lo)
    mid = 0.5 * (lo + hi)
    c_mid = _negative_count(Abar, mid, d)
    return _bisect_jumps(Abar, d, lo, mid, c_lo, c_mid, tol) + _bisect_jumps(Abar, d, mid, hi, c_mid, c_hi, tol)


def pd_threshold(base: CenteredOperator, t_hi: float | None = None, tol: float = 1e-12,
                 cap: int = DENSE_CAP) -> float:
    """Infimum of ``t > 0`` above which ``M(t) - A_bar(t)`` stays positive definite."""
    Abar = materialize_dense(base, cap)
    d = base.d
    pos = excluded_points(base, cap)
    top = float(pos.max(initial=0.0))
    hi = t_hi if t_hi is not None else 2.0 + float(np.abs(Abar).sum(axis=1).max()) / math.sqrt(d)
    if _negative_count(Abar, hi, d):
        raise ArithmeticError("pencil not positive definite at the upper end")
    roots = ihara_bass_roots(base, hi, cap=cap)
    roots = roots[roots > 0]
    if roots.size:
        return float(roots.max())
    # no inertia change above zero: positivity persists down to the largest excluded point
    return top


@dataclass(frozen=True)
class QuadraticFormCheck:
    lam_min_plus: float
    lam_min_minus: float
    bound: float
    norm_ratio: float
    norm_bound: float
    converged: bool

    @property
    def holds(self) -> bool:
        return min(self.lam_min_plus, self.lam_min_minus) >= -self.bound

    @property
    def norm_holds(self) -> bool:
        return self.norm_ratio <= self.norm_bound


@dataclass(frozen=True, eq=False)
class _ShiftedDegreeOperator:
    """``I + diag(alpha) + s A_bar / sqrt(d)``."""

    base: CenteredOperator
    diag: np.ndarray
    s: float

    @property
    def n(self) -> int:
        return self.base.n

    def matvec(self, v: np.ndarray) -> np.ndarray:
        dv = self.diag if v.ndim == 1 else self.diag[:, None]
        return dv * v + (self.s / math.sqrt(self.base.d)) * self.base.matvec(v)


def quadratic_form_check(base: CenteredOperator, d: float | None = None, C: float = 10.0,
                         seed: int = 0, tol: float = 1e-10) -> QuadraticFormCheck:
    """Smallest eigenvalues of ``I + D -/+ A_bar / sqrt(d)`` against ``C (d + D_max) / d^{3/2}``."""
    d = base.d if d is None else d
    deg = base.graph.degrees.astype(float)
    diag = 1.0 + deg / d
    bound = C * (d + float(deg.max(initial=0.0))) / d**1.5
    lams, ok = [], True
    for s in (-1.0, 1.0):
        res = extremal_eigs(_ShiftedDegreeOperator(base, diag, s), 1, "bottom", tol=tol, seed=seed)
        lams.append(float(res.eigenvalues[0]))
        ok &= bool(res.converged.all())
    nrm = extremal_eigs(base, 1, "both", tol=tol, seed=seed)
    ok &= bool(nrm.converged.all())
    ratio = float(np.abs(nrm.eigenvalues).max()) / math.sqrt(d)
    return QuadraticFormCheck(
        lam_min_plus=lams[0], lam_min_minus=lams[1], bound=bound, norm_ratio=ratio,
        norm_bound=1.0 + float(deg.max(initial=0.0)) / d + bound, converged=ok,
    )
