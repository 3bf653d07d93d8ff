"""Ideal tridiagonal matrices, transfer-matrix analytics and the delocalization bound.

``M(alpha)`` is the ``(r+1) x (r+1)`` Jacobi matrix with zero diagonal and
off-diagonal ``(sqrt(alpha), 1, ..., 1)``: the tridiagonal form of the
adjacency matrix of an exact tree around its root, divided by ``sqrt(d)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .degree_stats import chernoff_rate
from .spectra import TridiagonalForm, tridiagonalize

RESONANCE_RTOL = 1e-10


def outlier_location(t: float, allow_below_two: bool = False) -> float:
    if t <= 1:
        raise ValueError("Lambda needs t > 1")
    if t < 2 and not allow_below_two:
        raise ValueError("Lambda is used on t >= 2; pass allow_below_two for 1 < t < 2")
    return t / math.sqrt(t - 1.0)


def degree_for_location(eta: float) -> float:
    """Inverse of ``Lambda`` on ``[2, inf)``."""
    if eta < 2:
        raise ValueError("alpha(eta) needs eta >= 2")
    return 0.5 * eta * (eta + math.sqrt(eta * eta - 4.0))


def transfer_contraction(eta: float) -> float:
    """Contracting eigenvalue of the transfer matrix ``T(eta)``."""
    if abs(eta) <= 2:
        raise ValueError("gamma needs |eta| > 2")
    return 0.5 * (eta - math.copysign(math.sqrt(eta * eta - 4.0), eta))


def transfer_matrix(eta: float) -> np.ndarray:
    return np.array([[eta, -1.0], [1.0, 0.0]])


def transfer_step(eta: float, pair: tuple[float, float]) -> tuple[float, float]:
    """``(u_{i+1}, u_i) -> (u_{i+2}, u_{i+1})`` for the recursion ``u_{i-1} + u_{i+1} = eta u_i``."""
    a, b = pair
    return eta * a - b, a


def ideal_tridiagonal(alpha: float, r: int) -> TridiagonalForm:
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if r < 1:
        raise ValueError("r must be at least 1")
    off = np.ones(r)
    off[0] = math.sqrt(alpha)
    return TridiagonalForm(diag=np.zeros(r + 1), offdiag=off, basis_norms=np.ones(r + 1), m=r, center=-1)


def ideal_top_coefficients(alpha: float, r: int) -> np.ndarray:
    """Normalized ``u_0, ..., u_r`` with ``u_1 = sqrt(alpha/(alpha-1)) u_0`` and ratio ``(alpha-1)^{-1/2}``."""
    if not alpha > 2:
        raise ValueError("alpha must exceed 2")
    if r < 1:
        raise ValueError("r must be at least 1")
    u = np.empty(r + 1)
    u[0] = 1.0
    u[1] = math.sqrt(alpha / (alpha - 1.0))
    q = 1.0 / math.sqrt(alpha - 1.0)
    for i in range(2, r + 1):
        u[i] = u[i - 1] * q
    return u / np.linalg.norm(u)


def _den(m00, m01, m11, m12, eta, g):
    return m01**2 + g * (eta - m00) * m12 - (eta - m00) * (eta - m11)


def component_ratio(m00: float, m01: float, m11: float, m12: float, eta: float) -> float:
    """Ratio of the decaying to the growing transfer-eigenbasis component of ``(b_2, b_1)``."""
    g = transfer_contraction(eta)
    num = g * (eta - m00) * (eta - m11) - g * m01**2 - m12 * (eta - m00)
    den = _den(m00, m01, m11, m12, eta, g)
    scale = max(m01**2, abs(eta - m00) * abs(eta - m11), abs(g * (eta - m00) * m12), 1.0)
    if abs(den) < RESONANCE_RTOL * scale:
        raise ValueError("resonance: delta undefined (denominator vanishes)")
    return num / den


def growth_rate_floor(m00: float, m01: float, m11: float, m12: float, eta: float, eps: float,
                 delta: float | None = None) -> float:
    g = transfer_contraction(eta)
    dl = component_ratio(m00, m01, m11, m12, eta) if delta is None else delta
    return 1.0 / g - 8.0 * (3.0 + eta) * eps / (1.0 - g * g) * math.sqrt(1.0 + max(1.0, dl * dl))


def condition_ok(eta: float, eps: float, delta: float) -> bool:
    g = transfer_contraction(eta)
    rhs = 4.0 + 4.0**5 * (3.0 + eta) ** 2 * eps**2 / (1.0 - g * g) ** 2 * (1.0 + max(1.0, delta * delta))
    return eta * eta >= rhs


@dataclass(frozen=True)
class DelocalizationParams:
    m00: float
    m01: float
    m11: float
    m12: float
    eta: float
    epsilon: float
    delta: float
    gamma: float
    gamma_geq: float
    condition_ok: bool


@dataclass(frozen=True)
class DelocalizationBound:
    bound_on_b0_sq_ratio: float | None
    eps: float
    condition_ok: bool
    params: DelocalizationParams | None
    reason: str = ""
    bound_proof_chain: float | None = None

    @property
    def admissible(self) -> bool:
        return self.bound_on_b0_sq_ratio is not None


def perturbation_size(diag: np.ndarray, offdiag: np.ndarray) -> float:
    """``max_{1 <= i <= r-1} max(|M_ii|, |M_{i,i+1} - 1|)``."""
    r = diag.size - 1
    if r < 2:
        return 0.0
    return float(max(np.abs(diag[1:r]).max(), np.abs(offdiag[1:r] - 1.0).max()))


def delocalization_bound(mt: TridiagonalForm | np.ndarray, eta: float) -> DelocalizationBound:
    """Upper bound on ``b_0^2 / |b|^2`` for ``(M - eta) b`` supported on the last coordinate.

    ``bound_on_b0_sq_ratio`` carries the tail factor ``min(gamma_geq^{-2r}, 1/(r-1))``.
    ``bound_proof_chain`` uses ``gamma_geq^{-2(r-2)}`` instead: the growth
    estimate ``|q_i| >= gamma_geq^{i-1} |q_1|`` summed over ``1 <= i <= r-1`` only
    reaches ``gamma_geq^{2(r-2)}``, and the steeper display is violated by
    explicit instances. Inadmissible inputs return ``None`` bounds and a reason.
    """
    diag, off = _entries(mt)
    r = diag.size - 1
    if r < 2:
        return DelocalizationBound(None, 0.0, False, None, "need at least three rows")
    if not eta > 2:
        return DelocalizationBound(None, 0.0, False, None, "eta must exceed 2")
    m00, m01, m11, m12 = diag[0], off[0], diag[1], off[1]
    if m12 == 0 or m01 == 0:
        return DelocalizationBound(None, 0.0, False, None, "vanishing leading off-diagonal")
    eps = perturbation_size(diag, off)
    if eps > 0.5:
        return DelocalizationBound(None, eps, False, None, "perturbation exceeds 1/2")
    try:
        dl = component_ratio(m00, m01, m11, m12, eta)
    except ValueError as exc:
        return DelocalizationBound(None, eps, False, None, str(exc))
    g = transfer_contraction(eta)
    ok = condition_ok(eta, eps, dl)
    ggeq = growth_rate_floor(m00, m01, m11, m12, eta, eps, dl)
    params = DelocalizationParams(m00, m01, m11, m12, eta, eps, dl, g, ggeq, ok)
    if not ok:
        return DelocalizationBound(None, eps, False, params, "admissibility condition fails")
    den = _den(m00, m01, m11, m12, eta, g)
    pre = 8.0 * (m01 * m12) ** 2 / den**2
    return DelocalizationBound(
        pre * min(ggeq ** (-2 * r), 1.0 / (r - 1)), eps, True, params,
        bound_proof_chain=pre * min(ggeq ** (-2 * (r - 2)), 1.0 / (r - 1)),
    )


def _entries(mt) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(mt, TridiagonalForm):
        return np.asarray(mt.diag, float), np.asarray(mt.offdiag, float)
    M = np.asarray(mt, float)
    return np.diag(M).copy(), np.diag(M, 1).copy()


def boundary_vector(mt: TridiagonalForm | np.ndarray, eta: float) -> np.ndarray:
    """``b`` with ``b_0 = 1`` and ``(M - eta) b`` zero outside the last row (forward recursion)."""
    diag, off = _entries(mt)
    r = diag.size - 1
    b = np.empty(r + 1)
    b[0] = 1.0
    b[1] = (eta - diag[0]) / off[0]
    for i in range(1, r):
        b[i + 1] = ((eta - diag[i]) * b[i] - off[i - 1] * b[i - 1]) / off[i]
    return b


@dataclass(frozen=True)
class WindowParams:
    omega: float
    r_tau_omega: float
    tau: float
    zeta: float
    mu: float
    d: float

    def in_w(self, alpha_x: float) -> bool:
        """Membership of a vertex with normalized degree ``alpha_x`` in the window set."""
        return alpha_x >= self.tau and self.mu >= math.sqrt(self.d) * (outlier_location(max(alpha_x, 2.0)) + self.zeta)


def solve_omega(mu: float, d: float, zeta: float) -> float:
    target = mu / math.sqrt(d) - zeta
    if not target > 2:
        raise ValueError("no solution: mu / sqrt(d) - zeta must exceed 2")
    lo, hi = 2.0 + 1e-12, 1e6
    fn = lambda w: outlier_location(w) - target  # noqa: E731
    if fn(lo) >= 0:
        return lo
    if fn(hi) < 0:
        raise ValueError("no solution below 1e6")
    return float(bisect(fn, lo, hi, xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=500))


def window_params(mu: float, d: float, tau: float, zeta: float, n: int) -> WindowParams:
    omega = solve_omega(mu, d, zeta)
    r = min(math.log(n) / (12.0 * math.log(omega * d)),
            d / (4.0 * math.log(d)) * chernoff_rate((tau - 1.0) / 2.0) - 1.0) - 2.0
    return WindowParams(omega, r, tau, zeta, mu, d)


def tridiag_error_scale(tau: float, k: int, d: float, n: int) -> float:
    logn = math.log(n)
    return (3.0 * math.sqrt(tau) + 2.0) ** k / math.sqrt(d) * math.sqrt(
        (math.log(d) + logn / d) * (1.0 + logn / (d * tau)))


@dataclass(frozen=True)
class TridiagComparison:
    op_norm_diff: float
    tridiag_error_scale: float
    alpha_x: float
    g_closeness: np.ndarray
    form: TridiagonalForm


def tridiag_comparison(g, pruned, x: int, r: int, d: float | None = None, l: int | None = None,
                       operator: str = "restricted", order=None) -> TridiagComparison:
    """Spectral-norm distance between the Jacobi block of the pruned operator at ``x`` and ``sqrt(d) M(alpha_x)``.

    ``operator="restricted"`` uses the centered pruned operator restricted to
    ``V_l`` (``l`` defaults to the rank of ``x``); ``"plain"`` uses the pruned
    adjacency matrix itself. A precomputed degree ``order`` of ``g`` may be
    passed to amortize sorting over many hubs. ``g_closeness[k]`` is
    ``|g_k - 1_{S_k}| / |1_{S_k}|`` with spheres taken in the pruned graph.
    """
    from .graph_core import bfs_layers, degree_order
    from .operators import centered, plain, pruned_restricted

    d = g.d_param if d is None else d
    if not np.any(pruned.v_tau == x):
        raise ValueError(f"vertex {x} is not a hub of the pruned graph")
    if operator == "plain":
        op = plain(pruned.graph)
    elif operator == "restricted":
        order = degree_order(g) if order is None else order
        l = int(order.rank()[x]) if l is None else l
        op = pruned_restricted(centered(g, d), pruned, l, order)
    else:
        raise ValueError(f"unknown operator {operator!r}")
    form = tridiagonalize(op, x, r, keep_basis=True)
    alpha_x = float(g.degrees[x]) / d
    m = form.m
    ideal = math.sqrt(d) * ideal_tridiagonal(alpha_x, r).dense()
    diff = np.zeros((r + 1, r + 1))
    diff[: m + 1, : m + 1] = form.dense()
    diff -= ideal
    lay = bfs_layers(pruned.graph, x, r)
    close = np.full(r + 1, np.nan)
    for k in range(min(m, lay.radius) + 1):
        ind = np.zeros(g.n)
        ind[lay.spheres[k]] = 1.0
        close[k] = np.linalg.norm(form.basis[:, k] - ind) / math.sqrt(lay.spheres[k].size)
    return TridiagComparison(float(np.linalg.norm(diff, 2)), tridiag_error_scale(pruned.tau, r, d, g.n), alpha_x, close, form)
