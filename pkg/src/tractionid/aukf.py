"""Adaptive process noise and the fuzzy dynamics supervisor.

The adaptation scalar matches the windowed innovation second moment against
the filter's own predicted innovation covariance. The supervisor turns the
rate of change of measured wheel and body speeds into a blend factor that
decides how much of that adaptation reaches the process noise.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

LABELS = ("low", "medium", "high")
# Output singletons for the three labels, defuzzified by centre of gravity.
OUTPUT_CENTRES = np.array([0.0, 0.5, 1.0])


@dataclass
class AdaptationState:
    window: int = 30
    a_min: float = 1.0
    a_max: float = 100.0
    n_states: int = 10
    # Squared innovation norms and traces of the predicted innovation
    # covariance over the window.
    innovations: deque = field(default=None)
    covariances: deque = field(default=None)
    scale: float = 1.0

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("adaptation window must be >= 1")
        if not 0 < self.a_min <= self.a_max:
            raise ValueError("need 0 < a_min <= a_max")
        if self.innovations is None:
            self.innovations = deque(maxlen=self.window)
        if self.covariances is None:
            self.covariances = deque(maxlen=self.window)
        self.scale = min(max(self.scale, self.a_min), self.a_max)

    @property
    def matrix(self):
        return self.scale * np.eye(self.n_states)


def update_adaptation(state: AdaptationState, innovation, S) -> AdaptationState:
    """Push one (innovation, S) pair and recompute the adaptation scalar.

    The scalar is the windowed mean of the squared innovation norm over the
    windowed mean trace of S, clamped to ``[a_min, a_max]``.
    """
    nu = np.asarray(innovation, dtype=float)
    state.innovations.append(float(nu @ nu))
    state.covariances.append(float(np.trace(S)))
    predicted = sum(state.covariances) / len(state.covariances)
    observed = sum(state.innovations) / len(state.innovations)
    ratio = observed / predicted if predicted > 0 else state.a_max
    state.scale = min(max(ratio, state.a_min), state.a_max)
    return state


@dataclass(frozen=True)
class SupervisorConfig:
    window: int = 20
    dt: float = 0.01
    omega_thresholds: tuple = (0.8, 4.0)  # rad/s^2
    speed_thresholds: tuple = (0.2, 1.0)  # m/s^2
    lambda_min: float = 0.0
    lambda_max: float = 1.0

    def __post_init__(self):
        if self.window < 2:
            raise ValueError("supervisor window must be >= 2")
        for lo, hi in (self.omega_thresholds, self.speed_thresholds):
            if not lo < hi:
                raise ValueError("supervisor thresholds need low < high")
        if not 0.0 <= self.lambda_min <= self.lambda_max <= 1.0:
            raise ValueError("need 0 <= lambda_min <= lambda_max <= 1")


def memberships(z):
    """Triangular low/medium/high grades of a normalized input.

    ``z = 0`` and below is fully low, ``z = 0.5`` fully medium, ``z = 1`` and
    above fully high.
    """
    z = min(max(float(z), 0.0), 1.0)
    low = max(0.0, 1.0 - 2.0 * z)
    medium = 1.0 - abs(2.0 * z - 1.0)
    high = max(0.0, 2.0 * z - 1.0)
    return np.array([low, medium, high])


def fuzzy_intensity(z_omega, z_speed):
    """Two-input Mamdani inference with max-min composition.

    Rule (i, j) fires the output label max(i, j): intense dynamics on either
    channel counts as intense.
    """
    mo, mv = memberships(z_omega), memberships(z_speed)
    out = np.zeros(3)
    for i in range(3):
        for j in range(3):
            k = max(i, j)
            out[k] = max(out[k], min(mo[i], mv[j]))
    total = out.sum()
    return float(out @ OUTPUT_CENTRES / total) if total > 0 else 0.0


def _rate(x, dt):
    # Net change across the window divided by its span: the mean of the
    # first differences, which averages out white measurement noise.
    x = np.asarray(x, dtype=float)
    return np.abs(x[-1] - x[0]) / ((len(x) - 1) * dt)


def dynamics_intensity(recent_omega, recent_v, cfg: SupervisorConfig) -> float:
    """Fuzzy intensity in [0, 1] of the recent wheel and body speed changes."""
    omega = np.asarray(recent_omega, dtype=float)[-cfg.window:]
    v = np.asarray(recent_v, dtype=float)[-cfg.window:]
    if len(omega) < 2 or len(v) < 2:
        return 0.0
    rate_omega = float(np.mean(_rate(omega, cfg.dt)))
    rate_v = float(_rate(v, cfg.dt))
    lo, hi = cfg.omega_thresholds
    z_omega = (rate_omega - lo) / (hi - lo)
    lo, hi = cfg.speed_thresholds
    z_speed = (rate_v - lo) / (hi - lo)
    return fuzzy_intensity(z_omega, z_speed)


def supervisor_factor(intensity, cfg: SupervisorConfig) -> float:
    return cfg.lambda_min + (cfg.lambda_max - cfg.lambda_min) * intensity


def effective_process_noise(Q, A, lam):
    """Blend nominal and adapted process noise: ``(lam A + (1-lam) I) Q``."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("blend factor must lie in [0, 1]")
    Q = np.asarray(Q, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape == (1, 1):
        A = A[0, 0] * np.eye(Q.shape[0])
    Qe = (lam * A + (1.0 - lam) * np.eye(Q.shape[0])) @ Q
    return 0.5 * (Qe + Qe.T)
