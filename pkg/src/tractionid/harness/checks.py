"""Seeded numerical self-checks run by the bench.

Each check compares library output against an independent closed-form
oracle and returns the worst discrepancy it saw.
"""
from __future__ import annotations

import numpy as np

from .. import ukf
from ..dynamics import slip_ratio


def random_spd(rng, n, floor=0.1):
    M = rng.standard_normal((n, n))
    return M @ M.T / n + floor * np.eye(n)


def _rel(a, b):
    scale = max(float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale


def kf_equivalence(seeds=range(20), n=10, m=5, steps=100):
    """Largest relative gap between UKF and Kalman-filter posteriors.

    Random stable linear systems with random SPD noise; the UKF sees the
    same model as batched affine maps.
    """
    worst = 0.0
    for seed in seeds:
        rng = np.random.default_rng(seed)
        F = rng.standard_normal((n, n))
        F *= 0.95 / max(abs(np.linalg.eigvals(F)))
        H = rng.standard_normal((m, n))
        Q, R = random_spd(rng, n, 0.01), random_spd(rng, m)
        cfg = ukf.UkfConfig(Q, R)
        x, P = rng.standard_normal(n), random_spd(rng, n)
        est = ukf.GaussianEstimate(x.copy(), P.copy())
        truth = rng.standard_normal(n)
        for _ in range(steps):
            truth = F @ truth + rng.multivariate_normal(np.zeros(n), Q)
            y = H @ truth + rng.multivariate_normal(np.zeros(m), R)
            est, *_ = ukf.ukf_step(est, lambda X, u: X @ F.T, lambda X: X @ H.T, None, y, cfg)
            xp, Pp = F @ x, F @ P @ F.T + Q
            S = H @ Pp @ H.T + R
            K = np.linalg.solve(S, H @ Pp).T
            x = xp + K @ (y - H @ xp)
            P = Pp - K @ S @ K.T
            worst = max(worst, _rel(est.mean, x), _rel(est.cov, P))
    return worst


def transform_exactness(seeds=range(50), n=10, alpha=1e-3):
    """Largest relative gap of the unscented transform on linear maps.

    With small ``alpha`` the central weight amplifies float rounding in each
    propagated point by roughly ``1 / (alpha**2 n)``.
    """
    worst = 0.0
    for seed in seeds:
        rng = np.random.default_rng(1000 + seed)
        A = rng.standard_normal((n, n))
        b = rng.standard_normal(n)
        est = ukf.GaussianEstimate(rng.standard_normal(n), random_spd(rng, n))
        cfg = ukf.UkfConfig(np.zeros((n, n)), np.eye(n), alpha=alpha)
        pts = ukf.generate_sigma_points(est, cfg)
        _, mean, cov = ukf.unscented_transform(pts, lambda X: X @ A.T + b)
        worst = max(worst, _rel(mean, A @ est.mean + b), _rel(cov, A @ est.cov @ A.T))
    return worst


def slip_properties(samples=10_000, seed=0):
    """Count violations of the slip-ratio range, continuity and boundary cases."""
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(samples):
        r = rng.uniform(0.05, 1.0)
        omega = rng.uniform(-50.0, 50.0)
        v = rng.uniform(-10.0, 10.0)
        s = slip_ratio(v, omega, r)
        bad += not -1.0 <= s <= 1.0
        # Both branches meet at s = 0 where |v| = r |omega|.
        edge = r * abs(omega)
        bad += abs(slip_ratio(edge * (1 + 1e-12), omega, r)) > 1e-9
        bad += abs(slip_ratio(edge * (1 - 1e-12), omega, r)) > 1e-9
        bad += slip_ratio(edge, omega, r) != 0.0 if edge > 0 else slip_ratio(0.0, 0.0, r) != 0.0
        if omega != 0.0:
            bad += slip_ratio(0.0, omega, r) != 1.0
        if v != 0.0:
            bad += slip_ratio(v, 0.0, r) != -1.0
    return bad
