"""Closed-loop multi-soil drive simulation producing a sensor log."""
from __future__ import annotations

import math

import numpy as np

from ..dynamics import slip_ratio
from ..errors import IntegrationError
from .config import Scenario
from .io import SENSOR_COLUMNS, TRUTH_COLUMNS, Table

# Speed scale (m/s) below which resistances fade out; see dynamics.motion_factor.
MOTION_SCALE = 0.05


class SimulationError(IntegrationError):
    def __init__(self, message, last_time):
        super().__init__(f"{message} (last valid time {last_time:.6g} s)")
        self.last_time = last_time


class _Plant:
    """Scalar right-hand side of the four-wheel longitudinal model.

    Written with ``math`` rather than numpy: it is called millions of times
    on five-element states.
    """

    def __init__(self, scenario: Scenario):
        veh = scenario.vehicle
        self.m = veh.mass
        self.g = veh.gravity
        self.r = [w.radius for w in veh.wheels]
        self.J = [w.inertia for w in veh.wheels]
        self.rho_t = [w.rho_t for w in veh.wheels]
        self.rho_w = [w.rho_omega for w in veh.wheels]
        self.fz = [float(f) for f in veh.wheel_loads(veh.static_front_load())]
        self.roll = [r * rt * fz for r, rt, fz in zip(self.r, self.rho_t, self.fz)]
        self.bear = [r * rw for r, rw in zip(self.r, self.rho_w)]

    def mu(self, soil, s):
        return soil.a * (1.0 - soil.p * math.exp(soil.alpha1 * s)
                         - (1.0 - soil.p) * math.exp(soil.alpha2 * s))

    def deriv(self, x, torque, f_dx, soil):
        v = x[4]
        speed = abs(v)
        along = math.tanh(v / MOTION_SCALE)
        a, p, a1, a2 = soil.a, soil.p, soil.alpha1, soil.alpha2
        out = [0.0] * 6
        f_sum = 0.0
        for i in range(4):
            w = x[i]
            r = self.r[i]
            circ = r * abs(w)
            # Slip ratio, inlined from dynamics.slip_ratio for speed.
            if speed <= circ:
                s = 1.0 - speed / circ if circ > 0.0 else 0.0
            else:
                s = -1.0 + circ / speed
            fh = a * (1.0 - p * math.exp(a1 * s) - (1.0 - p) * math.exp(a2 * s)) * self.fz[i]
            f_sum += fh
            roll = math.tanh(r * w / MOTION_SCALE) * self.roll[i]
            out[i] = (torque[i] - r * fh - roll - self.bear[i] * w) / self.J[i]
        out[4] = (f_sum - along * (f_dx + soil.rho_s * self.m * self.g)) / self.m
        out[5] = v
        return out

    def rk4(self, x, h, torque, f_dx, soil):
        k1 = self.deriv(x, torque, f_dx, soil)
        x2 = [a + 0.5 * h * b for a, b in zip(x, k1)]
        k2 = self.deriv(x2, torque, f_dx, soil)
        x3 = [a + 0.5 * h * b for a, b in zip(x, k2)]
        k3 = self.deriv(x3, torque, f_dx, soil)
        x4 = [a + h * b for a, b in zip(x, k3)]
        k4 = self.deriv(x4, torque, f_dx, soil)
        return [a + h / 6.0 * (b + 2.0 * c + 2.0 * d + e)
                for a, b, c, d, e in zip(x, k1, k2, k3, k4)]


def controller_torque(scenario: Scenario, omega_cmd, omega):
    """Proportional wheel-speed loop, saturated by torque and power limits."""
    ctl = scenario.controller
    out = []
    for w in omega:
        limit = ctl.max_torque
        if abs(w) > 1e-9:
            limit = min(limit, ctl.max_power / abs(w))
        out.append(min(max(ctl.gain * (omega_cmd - w), -limit), limit))
    return out


def simulate(scenario: Scenario) -> Table:
    """Run the scenario and return measurement, input and truth columns.

    Row ``k`` holds the state at ``t_k = k dt`` and the inputs held
    constant over ``[t_k, t_k + dt)``.
    """
    plant = _Plant(scenario)
    rng = np.random.default_rng(scenario.seed)
    noise = scenario.noise
    dt = scenario.dt
    n_steps = int(round(scenario.duration / dt))
    h = dt / scenario.model.substeps
    r = plant.r
    f_zf = scenario.vehicle.static_front_load()

    v0 = scenario.model.initial_speed
    if v0 is None:
        v0 = scenario.command(0.0) * r[3]
    x = [v0 / r[i] for i in range(4)] + [v0, 0.0]

    rows = {name: np.empty(n_steps + 1) for name in SENSOR_COLUMNS + TRUTH_COLUMNS[:-1]}
    soils = []
    sigma = np.array([noise.omega] * 4 + [noise.v] + [noise.torque] * 4 + [noise.f_zf, noise.f_dx])
    for k in range(n_steps + 1):
        t = k * dt
        soil = scenario.soil_map.catalog[
            scenario.soil_map.breakpoints[scenario.soil_map.index_at(max(x[5], 0.0))][1]]
        torque = controller_torque(scenario, scenario.command(t), x[:4])
        f_dx = scenario.drawbar_pull(t, soil.name)
        clean = x[:5] + torque + [f_zf, f_dx]
        meas = np.asarray(clean) + sigma * rng.standard_normal(sigma.size)
        rows["timestamp"][k] = t
        for j, name in enumerate(SENSOR_COLUMNS[1:]):
            rows[name][k] = meas[j]
        for i in range(4):
            s = slip_ratio(x[4], x[i], r[i])
            rows[f"truth_s{i + 1}"][k] = s
            rows[f"truth_mu{i + 1}"][k] = plant.mu(soil, s)
        rows["truth_rho_s"][k] = soil.rho_s
        rows["truth_position"][k] = x[5]
        soils.append(soil.name)
        if k == n_steps:
            break
        for _ in range(scenario.model.substeps):
            x_next = plant.rk4(x, h, torque, f_dx, soil)
            if not all(map(math.isfinite, x_next)):
                raise SimulationError("non-finite simulation state", t)
            x = x_next
            soil_now = scenario.soil_map.index_at(max(x[5], 0.0))
            soil = scenario.soil_map.catalog[scenario.soil_map.breakpoints[soil_now][1]]
    table = Table()
    for name in SENSOR_COLUMNS + TRUTH_COLUMNS[:-1]:
        table.columns[name] = rows[name]
    table.columns["truth_soil"] = soils
    return table
