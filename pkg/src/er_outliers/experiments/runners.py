"""Seeded Monte Carlo runs comparing extreme eigenvalues with degree predictions."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

import numpy as np

from ..graph_core import degree_order, generate_er, order_from_values, threshold_indices
from ..operators import centered, generalized_alpha, make_wigner, materialize_dense, plain
from ..spectra import extremal_eigs
from ..transfer import outlier_location
from .config import ExperimentConfig
from .report import CorrespondenceReport, CorrespondenceRow, TrialOutcome
from .seeding import trial_seed


def edge_bound(d: float, kappa: float, C: float = 1.0) -> float:
    """Scaled ceiling ``2 + C (log d)^(-2 kappa)`` for the first non-outlier."""
    return 2.0 + C * math.log(d) ** (-2.0 * kappa)


def error_bound(location: float, d: float, theta: float, c: float = 1.0) -> float:
    """Surrogate ``d^(-c (Lambda - 2)) + d^(-theta / 3)`` of the per-index error."""
    return d ** (-c * (location - 2.0)) + d ** (-theta / 3.0)


def _trial(args) -> tuple[TrialOutcome, list[CorrespondenceRow]]:
    cfg, i, weighted = args
    seed = trial_seed(cfg.seed, i)
    d = cfg.degree
    try:
        g = generate_er(cfg.n, d, seed)
        if weighted:
            op = make_wigner(g, cfg.law, trial_seed(seed, 1))
            order = order_from_values(generalized_alpha(op, d), d, g.degrees)
        else:
            op = centered(g)
            order = degree_order(g)
        L = threshold_indices(order, d, cfg.kappa).L
        k = L + cfg.extra_pairs
        res = extremal_eigs(op, k, "both", tol=1e-10, seed=seed, max_basis=max(cfg.max_basis, 4 * k + 20))
        # a residual r places an exact eigenvalue within r of the Ritz value
        need = L + 1
        worst = float(np.concatenate([res.residuals[:need], res.residuals[-need:]]).max())
        if worst > cfg.tol * math.sqrt(d):
            raise ArithmeticError(f"scaled residual {worst / math.sqrt(d):.2e} above tol for the {need} extreme pairs")
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        nan = float("nan")
        return TrialOutcome(i, seed, -1, nan, nan, edge_bound(d, cfg.kappa), True, str(exc)), []

    scale = math.sqrt(d)
    top = res.eigenvalues[:k] / scale
    bottom = res.eigenvalues[k:][::-1] / scale
    rows = []
    for l in range(L):
        a = float(order.alphas[l])
        loc = outlier_location(a)
        err = abs(top[l] - loc) + abs(bottom[l] + loc)
        rows.append(CorrespondenceRow(i, seed, l + 1, a, float(top[l]), float(bottom[l]), loc, float(err),
                                      error_bound(loc, d, cfg.theta)))
    edge = float(max(top[L], -bottom[L]))
    max_err = max((r.error for r in rows), default=0.0)
    return TrialOutcome(i, seed, L, max_err, edge, edge_bound(d, cfg.kappa)), rows


def _fan_out(cfg: ExperimentConfig, weighted: bool):
    jobs = [(cfg, i, weighted) for i in range(cfg.trials)]
    if cfg.workers == 1:
        return [_trial(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(_trial, jobs))


def _collect(name: str, cfg: ExperimentConfig, results) -> CorrespondenceReport:
    rep = CorrespondenceReport(name, config=cfg.as_dict())
    for outcome, rows in results:
        rep.trials.append(outcome)
        rep.rows.extend(rows)
    return rep


def run_correspondence(cfg: ExperimentConfig) -> CorrespondenceReport:
    """Per trial: degree order, ``L``, ``L + extra_pairs`` eigenvalues of each sign, errors and edge check."""
    rep = _collect("correspond", cfg, _fan_out(cfg, weighted=False))
    if cfg.dense_check_n:
        rep.extra["interlacing"] = interlacing_check(cfg.dense_check_n, cfg.degree, cfg.seed)
    return rep


def run_wigner_correspondence(cfg: ExperimentConfig) -> CorrespondenceReport:
    """Same experiment for ``X = A * W`` with ``alpha_x = sum_y X_xy^2 / d``."""
    return _collect("wigner", cfg, _fan_out(cfg, weighted=True))


def interlacing_check(n: int, d: float, seed: int = 0, tol: float = 1e-9) -> dict:
    """Dense comparison of the spectra of ``A`` and the centered ``A_bar``.

    The centering subtracts ``p (J - I)`` with ``p = d / n``, so
    ``A + p I = A_bar + p J`` is a positive rank-one update and
    ``lam_l(A_bar) >= lam_{l+1}(A) + p >= lam_{l+1}(A_bar)`` holds exactly.
    The unshifted left inequality follows from it; the unshifted right one can
    fail by up to ``p``, reported as ``raw_right_violation``.
    """
    g = generate_er(n, d, trial_seed(seed, 10**6))
    p = d / n
    ab = np.linalg.eigvalsh(materialize_dense(centered(g), n))[::-1]
    a = np.linalg.eigvalsh(materialize_dense(plain(g), n))[::-1]
    left = ab[:-1] - (a[1:] + p)
    right = (a[1:] + p) - ab[1:]
    raw_right = a[1:] - ab[1:]
    return {
        "n": n,
        "shift": p,
        "min_left_gap": float(left.min()),
        "min_right_gap": float(right.min()),
        "holds": bool(left.min() >= -tol and right.min() >= -tol),
        "raw_left_holds": bool((ab[:-1] - a[1:]).min() >= -tol),
        "raw_right_violation": float(max(0.0, -raw_right.min())),
    }


RUNNERS: dict[str, Callable[[ExperimentConfig], CorrespondenceReport]] = {
    "correspond": run_correspondence,
    "wigner": run_wigner_correspondence,
}
