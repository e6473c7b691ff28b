"""Longitudinal wheel and vehicle-body dynamics.

All quantities are SI. Wheels are indexed 0..3 as front-left, front-right,
rear-left, rear-right.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, IntegrationError

N_WHEELS = 4


@dataclass(frozen=True)
class WheelParams:
    mass: float = 5.0  # kg
    inertia: float = 0.25  # kg m^2
    radius: float = 0.2  # dynamic rolling radius, m
    rho_t: float = 0.02  # tire-deformation rolling resistance
    rho_omega: float = 0.5  # bearing friction, N s

    def __post_init__(self):
        if self.mass <= 0 or self.inertia <= 0 or self.radius <= 0:
            raise DomainError("wheel mass, inertia and radius must be positive")
        if self.rho_t < 0 or self.rho_omega < 0:
            raise DomainError("wheel resistance coefficients must be >= 0")


@dataclass(frozen=True)
class VehicleParams:
    mass: float = 139.0
    wheels: tuple = field(default_factory=lambda: (WheelParams(),) * N_WHEELS)
    front_load_fraction: float = 54.0 / 139.0
    gravity: float = 9.81

    def __post_init__(self):
        if len(self.wheels) != N_WHEELS:
            raise DomainError(f"expected {N_WHEELS} wheels, got {len(self.wheels)}")
        if self.mass < sum(w.mass for w in self.wheels):
            raise DomainError("vehicle mass is smaller than the sum of wheel masses")
        if not 0.0 < self.front_load_fraction < 1.0:
            raise DomainError("front load fraction must lie in (0, 1)")
        if self.gravity <= 0:
            raise DomainError("gravity must be positive")

    @property
    def weight(self) -> float:
        return self.mass * self.gravity

    def static_front_load(self) -> float:
        """Vertical load on one front wheel from the static weight split."""
        return self.front_load_fraction * self.weight / 2.0

    def wheel_loads(self, front_load: float) -> np.ndarray:
        """Per-wheel vertical loads given the load on one front wheel.

        The rear axle carries the rest of the weight, split equally.
        """
        rear = (self.weight - 2.0 * front_load) / 2.0
        return np.array([front_load, front_load, rear, rear])


@dataclass(frozen=True)
class WheelDynState:
    omega: float
    drive_torque: float
    horizontal_force: float
    vertical_load: float

    def __post_init__(self):
        if self.vertical_load < 0:
            raise DomainError("vertical load must be >= 0")


@dataclass(frozen=True)
class BodyDynState:
    speed: float
    drawbar_pull: float
    rho_s: float

    def __post_init__(self):
        if self.rho_s < 0:
            raise DomainError("soil rolling resistance must be >= 0")


def slip_ratio(v, omega, r_d):
    """Longitudinal slip ratio in [-1, 1].

    1 means spinning on the spot, -1 a locked wheel. A standing wheel on a
    standing vehicle has zero slip.
    """
    if r_d <= 0:
        raise DomainError("rolling radius must be positive")
    circ = r_d * abs(omega)
    speed = abs(v)
    if circ == 0.0 and speed == 0.0:
        return 0.0
    if speed <= circ:
        return 1.0 - speed / circ
    return -1.0 + circ / speed


def slip_ratio_array(v, omega, r_d):
    """Vectorized :func:`slip_ratio` over broadcastable arrays."""
    circ = r_d * np.abs(np.asarray(omega, dtype=float))
    speed = np.abs(np.asarray(v, dtype=float))
    circ, speed = np.broadcast_arrays(circ, speed)
    out = np.zeros(circ.shape)
    drive = (speed <= circ) & (circ > 0)
    brake = speed > circ
    out[drive] = 1.0 - speed[drive] / circ[drive]
    out[brake] = -1.0 + circ[brake] / speed[brake]
    return out


def adhesion_coefficient(f_h, f_z):
    if f_z <= 0:
        raise DomainError(f"vertical load must be positive, got {f_z}")
    return f_h / f_z


def net_traction(mu, rho_s):
    return mu - rho_s


def efficiency(kappa, rho, s):
    """Traction efficiency: share of drive power delivered as pull."""
    if kappa + rho == 0:
        raise DomainError("kappa + rho must be nonzero")
    return kappa / (kappa + rho) * (1.0 - s)


def wheel_angular_accel(state: WheelDynState, params: WheelParams) -> float:
    r = params.radius
    f_t = params.rho_t * state.vertical_load
    torque = (state.drive_torque - r * state.horizontal_force - r * f_t
              - r * params.rho_omega * state.omega)
    return torque / params.inertia


def body_accel(f_h_sum, f_dx, rho_s, m, g=9.81):
    if m <= 0:
        raise DomainError("mass must be positive")
    return (f_h_sum - f_dx - rho_s * m * g) / m


def rk4_step(state, inputs, derivative, dt, frozen=None):
    """One classical Runge-Kutta step with zero-order-held inputs.

    ``derivative(x, u)`` returns dx/dt with the same shape as ``x``; ``x`` may
    carry leading batch dimensions. Entries flagged in the boolean mask
    ``frozen`` (over the last axis) are held at their initial value in every
    stage.
    """
    if dt <= 0:
        raise DomainError("dt must be positive")
    x0 = np.asarray(state, dtype=float)
    mask = None
    if frozen is not None:
        mask = np.asarray(frozen, dtype=bool)

    def f(x):
        d = np.asarray(derivative(x, inputs), dtype=float)
        if mask is not None:
            d = np.where(mask, 0.0, d)
        return d

    k1 = f(x0)
    k2 = f(x0 + 0.5 * dt * k1)
    k3 = f(x0 + 0.5 * dt * k2)
    k4 = f(x0 + dt * k3)
    x1 = x0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    # A non-finite stage derivative always poisons the result, so one check
    # at the end suffices.
    if not np.isfinite(x1).all():
        raise IntegrationError("non-finite derivative or state during RK4 step", state=x0)
    if mask is not None:
        x1 = np.where(mask, x0, x1)
    return x1


def motion_factor(v, scale=0.05):
    """Smooth sign of ``v`` used to make resistances vanish at standstill.

    Equal to +-1 in floating point for |v| above roughly 20 * scale.
    """
    return math.tanh(v / scale)
