"""Typical extreme normalized degrees of G(N, d/N) and their Monte Carlo checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import bisect

CRITICAL_RATIO = 1.0 / (math.log(4.0) - 1.0)
WINDOW_C = 3.0
ROOT_TOL = 1e-10


def chernoff_rate(a: float) -> float:
    """``(1 + a) log(1 + a) - a``."""
    if a < 0:
        raise ValueError("the rate function needs a >= 0")
    return (1.0 + a) * math.log1p(a) - a


def max_degree_bound(n: int, d: float, C: float = 3.0) -> float:
    """High-probability ceiling on the maximum degree."""
    logn = math.log(n)
    if d >= 0.5 * logn:
        return d + C * math.sqrt(d * logn)
    den = math.log(logn) - math.log(d)
    if den <= 0:
        raise ValueError(f"log log n <= log d (n={n}, d={d}): sparse branch undefined")
    return C * logn / den


def degree_tail_exponent(d: float, alpha: float) -> float:
    """``f_d(alpha) = d (alpha log alpha - alpha + 1) + log(2 pi alpha d) / 2``, minus the log-tail of a degree ``alpha d``."""
    if not d > 0:
        raise ValueError("d must be positive")
    if alpha < 1:
        raise ValueError("alpha must be at least 1")
    return d * (alpha * math.log(alpha) - alpha + 1.0) + 0.5 * math.log(2.0 * math.pi * alpha * d)


def _increasing_root(fn: Callable[[float], float], lo: float, start: float) -> float:
    """Root of an increasing ``fn`` with ``fn(lo) <= 0``; the upper end is found by doubling."""
    hi = max(start, lo * 2.0, lo + 1.0)
    while fn(hi) < 0:
        hi *= 2.0
        if hi > 1e300:
            raise ArithmeticError("no sign change found")
    if fn(lo) == 0:
        return lo
    root = bisect(fn, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=2000)
    return float(root)


def typical_degree(n: int, l: int, d: float, window_C: float = WINDOW_C) -> float:
    """Typical ``l``-th largest normalized degree: the root ``beta >= 1`` of ``f_d(beta) = log(n / l)``."""
    if l < 1 or l > n / (window_C * math.sqrt(d)):
        raise ValueError(f"l={l} outside the window [1, n/({window_C} sqrt d)]")
    target = math.log(n / l)
    base = degree_tail_exponent(d, 1.0)
    if target < base:
        raise ValueError(f"log(n/l) = {target:.6g} below f_d(1) = {base:.6g}")
    if target == base:
        return 1.0
    fn = lambda a: degree_tail_exponent(d, a) - target  # noqa: E731
    return _increasing_root(fn, 1.0, 2.0)


def critical_degree(n: int) -> float:
    """Expected degree at which the typical maximum normalized degree equals 2: root of ``f_d(2) = log n``."""
    if n < 3:
        raise ValueError("n must be at least 3")
    target = math.log(n)
    fn = lambda d: degree_tail_exponent(d, 2.0) - target  # noqa: E731
    lo = 1e-12
    return _increasing_root(fn, lo, CRITICAL_RATIO * target)


def count_above(n: int, d: float, threshold: float) -> int:
    """Largest ``l`` whose typical degree is at least ``threshold``: ``floor(n exp(-f_d(threshold)))``."""
    return max(0, math.floor(n * math.exp(-degree_tail_exponent(d, threshold)) + 1e-9))


def count_above_two(n: int, d: float) -> int:
    return count_above(n, d, 2.0)


def predicted_outlier_count(n: int, d: float, kappa: float) -> int:
    if not d > 1:
        raise ValueError("d must exceed 1")
    return count_above(n, d, 2.0 + math.log(d) ** (-kappa))


@dataclass
class DegreeModel:
    n: int
    d: float
    beta_cache: dict[int, float] = field(default_factory=dict)

    @property
    def critical_degree(self) -> float:
        return critical_degree(self.n)

    @property
    def b_star(self) -> float:
        return CRITICAL_RATIO

    @property
    def count_above_two(self) -> int:
        return count_above_two(self.n, self.d)

    def predicted_outlier_count(self, kappa: float) -> int:
        return predicted_outlier_count(self.n, self.d, kappa)

    def beta(self, l: int) -> float:
        if l not in self.beta_cache:
            self.beta_cache[l] = typical_degree(self.n, l, self.d)
        return self.beta_cache[l]


def _lam(t: float) -> float:
    return t / math.sqrt(t - 1.0)


def outlier_location_curves(n: int, l_max: int, b_grid: Sequence[float]) -> list[tuple[int, float, float]]:
    """Rows ``(l, b, Lambda(beta_l))`` with ``beta_l`` the typical degree at ``d = b log n``.

    Rows are absent where ``beta_l < 2`` or ``l`` leaves the existence window.
    """
    rows = []
    logn = math.log(n)
    for l in range(1, l_max + 1):
        for b in b_grid:
            if not b > 0:
                raise ValueError("b grid must be positive")
            d = b * logn
            try:
                beta = typical_degree(n, l, d)
            except ValueError:
                continue
            if beta >= 2.0:
                rows.append((l, float(b), _lam(beta)))
    return rows


@dataclass
class DegreePredictionResult:
    regime: str
    trials: int
    checks: int
    passes: int
    count_above_two: int
    critical_degree: float

    @property
    def pass_rate(self) -> float:
        return self.passes / self.checks if self.checks else float("nan")


def validate_degree_predictions(n: int, d: float, trials: int, xi: float | None = None, seed: int = 0,
                                sampler: Callable[[int, float, int], np.ndarray] | None = None) -> DegreePredictionResult:
    """Fraction of sampled degree sequences obeying the order-statistics predictions.

    Below the critical degree every ``l`` with ``beta_l >= 2`` must satisfy
    ``|alpha_(l) - beta_l| <= max(1, xi / log beta_l) / d``; above it the check is
    ``alpha_(1) <= 2 + xi / d``. ``sampler(n, d, seed)`` returns a degree vector.
    """
    from .experiments.seeding import trial_seed
    from .graph_core import generate_er

    xi = math.log(math.log(n)) if xi is None else xi
    ds = critical_degree(n)
    sampler = sampler or (lambda nn, dd, s: generate_er(nn, dd, s).degrees)
    sub = d <= ds
    l0 = count_above_two(n, d) if sub else 0
    betas = np.array([typical_degree(n, l, d) for l in range(1, l0 + 1)])
    tol = np.maximum(1.0, xi / np.log(betas)) / d if l0 else np.zeros(0)
    checks = passes = 0
    for i in range(trials):
        deg = np.asarray(sampler(n, d, trial_seed(seed, i)))
        top = np.sort(deg)[::-1] / d
        if sub:
            ok = np.abs(top[:l0] - betas) <= tol
            checks += l0
            passes += int(ok.sum())
        else:
            checks += 1
            passes += int(top[0] <= 2.0 + xi / d)
    return DegreePredictionResult("subcritical" if sub else "supercritical", trials, checks, passes, l0, ds)
