"""Traction estimator: the 10-state vehicle model inside the adaptive UKF.

State layout: wheel speeds (0..3), body speed (4), adhesion coefficients
(5..8), soil rolling resistance (9). Measurements are the first five
entries. Inputs are the four drive torques, the load on one front wheel and
the drawbar pull.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from . import aukf, ukf
from .dynamics import VehicleParams, rk4_step, slip_ratio_array
from .errors import DomainError, TractionError

N_STATE = 10
N_MEAS = 5
N_INPUT = 6
OMEGA = slice(0, 4)
V = 4
MU = slice(5, 9)
RHO_S = 9

FROZEN = np.zeros(N_STATE, dtype=bool)
FROZEN[MU] = True
FROZEN[RHO_S] = True

STATE_NAMES = ("omega1", "omega2", "omega3", "omega4", "v",
               "mu1", "mu2", "mu3", "mu4", "rho_s")


@dataclass(frozen=True)
class SensorRecord:
    """Measurements at ``timestamp`` and the inputs applied from then on."""

    timestamp: float
    omega: tuple
    v: float
    torque: tuple
    f_zf: float
    f_dx: float

    @property
    def measurement(self):
        return np.array([*self.omega, self.v], dtype=float)

    @property
    def inputs(self):
        return np.array([*self.torque, self.f_zf, self.f_dx], dtype=float)


@dataclass
class EstimateRecord:
    timestamp: float
    mean: np.ndarray
    variance: np.ndarray
    slip: np.ndarray
    supervisor: float
    adaptation: float

    @property
    def mu(self):
        return self.mean[MU]


class VehicleModel:
    """Array-friendly wrapper of the wheel and body equations."""

    def __init__(self, params: VehicleParams):
        self.params = params
        self.radius = np.array([w.radius for w in params.wheels])
        self.inertia = np.array([w.inertia for w in params.wheels])
        self.rho_t = np.array([w.rho_t for w in params.wheels])
        self.rho_omega = np.array([w.rho_omega for w in params.wheels])

    def linear_terms(self, u):
        """``(A, c)`` with ``dx/dt = A x + c`` for held inputs ``u``.

        The model is affine in the state once the inputs are fixed.
        """
        u = np.asarray(u, dtype=float)
        fz = self.params.wheel_loads(u[4])
        r, J = self.radius, self.inertia
        m, g = self.params.mass, self.params.gravity
        A = np.zeros((N_STATE, N_STATE))
        c = np.zeros(N_STATE)
        idx = np.arange(4)
        A[idx, idx] = -r * self.rho_omega / J
        A[idx, idx + 5] = -r * fz / J
        c[OMEGA] = (u[:4] - r * self.rho_t * fz) / J
        A[V, MU] = fz / m
        A[V, RHO_S] = -g
        c[V] = -u[5] / m
        return A, c

    def derivative(self, x, u):
        A, c = self.linear_terms(u)
        return np.asarray(x, dtype=float) @ A.T + c


def transition(x, u, dt, params, model: VehicleModel | None = None):
    """Propagate state(s) ``x`` over ``dt`` with RK4; parameters stay frozen."""
    if dt <= 0:
        raise DomainError("dt must be positive")
    model = model or VehicleModel(params)
    return rk4_step(x, u, model.derivative, dt, frozen=FROZEN)


def measure(x):
    return np.asarray(x, dtype=float)[..., :N_MEAS].copy()


@dataclass
class EstimatorConfig:
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    alpha: float = 1e-3
    beta: float = 2.0
    kappa: float = 0.0
    q_speed: float = 1e-4
    q_mu: float = 1e-3
    q_rho_s: float = 1e-4
    sigma_omega: float = 0.05
    sigma_v: float = 0.03
    initial_mu: float = 0.3
    initial_rho_s: float = 0.05
    initial_var_mu: float = 1.0
    initial_var_rho_s: float = 0.1
    adaptive: bool = True
    adaptation_window: int = 30
    a_min: float = 1.0
    a_max: float = 100.0
    supervisor: aukf.SupervisorConfig = field(default_factory=aukf.SupervisorConfig)

    def process_noise(self):
        q = np.empty(N_STATE)
        q[:N_MEAS] = self.q_speed
        q[MU] = self.q_mu
        q[RHO_S] = self.q_rho_s
        return np.diag(q)

    def measurement_noise(self):
        return np.diag([self.sigma_omega**2] * 4 + [self.sigma_v**2])

    def ukf_config(self):
        return ukf.UkfConfig(self.process_noise(), self.measurement_noise(),
                             self.alpha, self.beta, self.kappa)


class TractionEstimator:
    """AUKF-FS over the traction model; one instance per log stream.

    With ``config.adaptive`` false it is a plain UKF with nominal noise.
    """

    def __init__(self, config: EstimatorConfig | None = None):
        self.config = config or EstimatorConfig()
        self.model = VehicleModel(self.config.vehicle)
        self.ukf_cfg = self.config.ukf_config()
        self.adaptation = aukf.AdaptationState(
            self.config.adaptation_window, self.config.a_min, self.config.a_max, N_STATE)
        self.history = deque(maxlen=self.config.supervisor.window)
        self.estimate = None
        self.last_record = None
        self.supervisor = 0.0

    def initial_estimate(self, y):
        c = self.config
        mean = np.empty(N_STATE)
        mean[:N_MEAS] = y
        mean[MU] = c.initial_mu
        mean[RHO_S] = c.initial_rho_s
        var = np.empty(N_STATE)
        var[OMEGA] = c.sigma_omega**2
        var[V] = c.sigma_v**2
        var[MU] = c.initial_var_mu
        var[RHO_S] = c.initial_var_rho_s
        return ukf.GaussianEstimate(mean, np.diag(var))

    def _f(self, dt, u):
        A, c = self.model.linear_terms(u)
        At = A.T

        def deriv(X, _u):
            return X @ At + c

        def f(X, _u):
            return rk4_step(X, u, deriv, dt, frozen=FROZEN)
        return f

    def step(self, record: SensorRecord) -> EstimateRecord:
        """One predict/update cycle.

        On failure the estimate stays at its last valid value, and the inputs
        of ``record`` replace the held ones, so a single corrupt input row
        cannot block every later step.
        """
        if self.last_record is not None and record.timestamp <= self.last_record.timestamp:
            raise DomainError(
                f"timestamp {record.timestamp} does not increase past {self.last_record.timestamp}")
        try:
            # Non-finite intermediates are caught and reported by the UKF layer.
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                return self._step(record)
        except TractionError:
            if self.last_record is not None:
                self.last_record = replace(self.last_record, torque=record.torque,
                                           f_zf=record.f_zf, f_dx=record.f_dx)
            raise

    def _step(self, record: SensorRecord) -> EstimateRecord:
        y = record.measurement
        cfg = self.ukf_cfg
        if self.estimate is None:
            prior = self.initial_estimate(y)
            lam = 0.0
        else:
            dt = record.timestamp - self.last_record.timestamp
            if self.config.adaptive:
                hist = np.array(self.history)
                intensity = (aukf.dynamics_intensity(hist[:, :4], hist[:, 4], self.config.supervisor)
                             if len(hist) >= 2 else 0.0)
                lam = aukf.supervisor_factor(intensity, self.config.supervisor)
                Q_eff = aukf.effective_process_noise(cfg.Q, self.adaptation.scale, lam)
            else:
                lam = 0.0
                Q_eff = cfg.Q
            points = ukf.generate_sigma_points(self.estimate, cfg)
            u = self.last_record.inputs
            prior = ukf.predict(points, self._f(dt, u), u, Q_eff)
        points = ukf.generate_sigma_points(prior, cfg)
        post, nu, S = ukf.update(prior, points, measure, y, cfg.R)
        post.mean[RHO_S] = max(post.mean[RHO_S], 0.0)
        # Commit only after every fallible stage succeeded.
        if self.config.adaptive and self.estimate is not None:
            aukf.update_adaptation(self.adaptation, nu, S)
        self.history.append(y)
        self.estimate = post
        self.last_record = record
        self.supervisor = lam
        slip = slip_ratio_array(post.mean[V], post.mean[OMEGA], self.model.radius)
        return EstimateRecord(record.timestamp, post.mean.copy(), np.diag(post.cov).copy(),
                              slip, lam, self.adaptation.scale)

    def run(self, records):
        return [self.step(r) for r in records]
