"""Unscented Kalman filter core.

Stateless functions over :class:`GaussianEstimate`; the transition and
measurement functions receive sigma points stacked row-wise, shape
``(2n+1, n)``, and must return stacked results.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CovarianceDegeneracyError, PropagationError, SingularInnovationError

JITTER_REL = 1e-9
JITTER_ATTEMPTS = 3


@dataclass
class GaussianEstimate:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float).reshape(-1)
        self.cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        n = self.mean.size
        if self.cov.shape != (n, n):
            raise ValueError(f"covariance shape {self.cov.shape} does not match mean size {n}")


@dataclass
class SigmaPointSet:
    points: np.ndarray  # (2n+1, n)
    wm: np.ndarray
    wc: np.ndarray


@dataclass
class UkfConfig:
    Q: np.ndarray
    R: np.ndarray
    alpha: float = 1e-3
    beta: float = 2.0
    kappa: float = 0.0

    def __post_init__(self):
        self.Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        self.R = np.atleast_2d(np.asarray(self.R, dtype=float))
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")


def symmetrize(P):
    return 0.5 * (P + P.T)


def chol_with_jitter(P):
    """Lower Cholesky factor of ``P``, escalating diagonal jitter on failure.

    An all-zero matrix has the zero matrix as its factor.
    """
    P = symmetrize(np.asarray(P, dtype=float))
    if not np.any(P):
        return np.zeros_like(P)
    try:
        return np.linalg.cholesky(P)
    except np.linalg.LinAlgError:
        pass
    n = P.shape[0]
    jitter = JITTER_REL * max(np.trace(P) / n, np.finfo(float).tiny)
    for _ in range(JITTER_ATTEMPTS):
        try:
            return np.linalg.cholesky(P + jitter * np.eye(n))
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise CovarianceDegeneracyError("covariance is not positive semi-definite")


def unscented_weights(n, alpha=1e-3, beta=2.0, kappa=0.0):
    lam = alpha**2 * (n + kappa) - n
    c = n + lam
    wm = np.full(2 * n + 1, 0.5 / c)
    wc = wm.copy()
    wm[0] = lam / c
    wc[0] = lam / c + (1.0 - alpha**2 + beta)
    return wm, wc, c


def generate_sigma_points(est: GaussianEstimate, cfg: UkfConfig) -> SigmaPointSet:
    n = est.mean.size
    wm, wc, c = unscented_weights(n, cfg.alpha, cfg.beta, cfg.kappa)
    L = chol_with_jitter(c * est.cov)
    pts = np.empty((2 * n + 1, n))
    pts[0] = est.mean
    pts[1:n + 1] = est.mean + L.T
    pts[n + 1:] = est.mean - L.T
    return SigmaPointSet(pts, wm, wc)


def _weighted_mean(Y, wm):
    # Anchored on the centre point: weights sum to one, and this avoids the
    # cancellation of the large central weight for small alpha.
    return Y[0] + wm[1:] @ (Y[1:] - Y[0])


def _check_finite(Y, what):
    bad = ~np.all(np.isfinite(Y), axis=1)
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0])
        raise PropagationError(f"non-finite {what} at sigma point {idx}", index=idx)


def unscented_transform(points: SigmaPointSet, fn, noise=None):
    Y = np.atleast_2d(np.asarray(fn(points.points), dtype=float))
    _check_finite(Y, "transformed value")
    mean = _weighted_mean(Y, points.wm)
    D = Y - mean
    cov = (D.T * points.wc) @ D
    if noise is not None:
        cov = cov + noise
    return Y, mean, symmetrize(cov)


def predict(points: SigmaPointSet, f, u, Q_eff) -> GaussianEstimate:
    """Propagate sigma points through ``f(X, u)`` and add process noise."""
    _, mean, cov = unscented_transform(points, lambda X: f(X, u), Q_eff)
    return GaussianEstimate(mean, cov)


def update(prior: GaussianEstimate, points: SigmaPointSet, h, y, R):
    """Measurement update.

    ``points`` must be regenerated from ``prior``. Returns the posterior, the
    innovation ``y - y_hat`` and its covariance ``S``.
    """
    Yp, y_hat, S = unscented_transform(points, h, R)
    Dx = points.points - prior.mean
    C = (Dx.T * points.wc) @ (Yp - y_hat)
    try:
        # K = C S^-1, solved as S^T K^T = C^T.
        K = np.linalg.solve(S.T, C.T).T
    except np.linalg.LinAlgError:
        raise SingularInnovationError("innovation covariance is singular") from None
    if not np.all(np.isfinite(K)):
        raise SingularInnovationError("innovation covariance is singular")
    innovation = np.asarray(y, dtype=float) - y_hat
    mean = prior.mean + K @ innovation
    cov = symmetrize(prior.cov - K @ S @ K.T)
    return GaussianEstimate(mean, cov), innovation, S


def ukf_step(est: GaussianEstimate, f, h, u, y, cfg: UkfConfig, Q_eff=None):
    """One predict/update cycle; returns (posterior, prior, innovation, S)."""
    Q_eff = cfg.Q if Q_eff is None else Q_eff
    prior = predict(generate_sigma_points(est, cfg), f, u, Q_eff)
    post, nu, S = update(prior, generate_sigma_points(prior, cfg), h, y, cfg.R)
    return post, prior, nu, S
