"""Scenario and estimator configuration files.

Both are YAML mappings validated by pydantic; validation errors are re-raised
as :class:`ConfigError` naming the file and the dotted key path. Every key is
optional except where noted; see README for the full dialect.
"""
from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .. import aukf
from ..dynamics import VehicleParams, WheelParams
from ..errors import ConfigError, DomainError
from ..estimator import EstimatorConfig
from ..soil import PROTOTYPE_SHAPE, SoilCatalog, SoilCurveParams, SoilMap, builtin_catalog


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class WheelModel(_Model):
    mass: float = Field(5.0, gt=0)
    inertia: float = Field(0.25, gt=0)
    radius: float = Field(0.2, gt=0)
    rho_t: float = Field(0.02, ge=0)
    rho_omega: float = Field(0.5, ge=0)


class VehicleModelConfig(_Model):
    mass: float = Field(139.0, gt=0)
    front_load_fraction: float = Field(54.0 / 139.0, gt=0, lt=1)
    gravity: float = Field(9.81, gt=0)
    wheel: WheelModel = WheelModel()
    wheels: Optional[List[WheelModel]] = Field(None, min_length=4, max_length=4)

    def build(self) -> VehicleParams:
        wheels = self.wheels or [self.wheel] * 4
        return VehicleParams(self.mass, tuple(WheelParams(**w.model_dump()) for w in wheels),
                             self.front_load_fraction, self.gravity)


class SoilModel(_Model):
    name: str
    a: float = Field(gt=0)
    p: float = Field(PROTOTYPE_SHAPE[0], ge=0, le=1)
    alpha1: float = PROTOTYPE_SHAPE[1]
    alpha2: float = PROTOTYPE_SHAPE[2]
    rho_s: float = Field(0.05, ge=0)


class ToolModel(_Model):
    pull: Dict[str, float] = {}
    default: float = 0.0
    # Piecewise-linear (time, multiplier) applied on top of the per-soil pull.
    scale: Optional[List[Tuple[float, float]]] = None


class ControllerModel(_Model):
    gain: float = Field(15.0, gt=0)
    max_torque: float = Field(60.0, gt=0)
    max_power: float = Field(400.0, gt=0)


class NoiseModel(_Model):
    omega: float = Field(0.05, ge=0)
    v: float = Field(0.03, ge=0)
    torque: float = Field(0.1, ge=0)
    f_zf: float = Field(0.0, ge=0)
    f_dx: float = Field(0.0, ge=0)


class ScenarioModel(_Model):
    name: str = "scenario"
    description: str = ""
    vehicle: VehicleModelConfig = VehicleModelConfig()
    soils: Optional[List[SoilModel]] = None
    soil_map: List[Tuple[float, str]] = Field(min_length=1)
    command: List[Tuple[float, float]] = Field(min_length=1)
    tool: ToolModel = ToolModel()
    controller: ControllerModel = ControllerModel()
    noise: NoiseModel = NoiseModel()
    duration: float = Field(gt=0)
    dt: float = Field(0.01, gt=0)
    substeps: int = Field(5, ge=1)
    seed: int = 0
    transition_half_width: float = Field(1.0, ge=0)
    initial_speed: Optional[float] = None

    @model_validator(mode="after")
    def _check_profiles(self):
        for label, prof in (("command", self.command), ("tool.scale", self.tool.scale or [])):
            times = [t for t, _ in prof]
            if any(b <= a for a, b in zip(times, times[1:])):
                raise ValueError(f"{label} times must be strictly increasing")
        return self


class Scenario:
    """Validated, ready-to-run scenario."""

    def __init__(self, model: ScenarioModel):
        self.model = model
        self.name = model.name
        try:
            self.vehicle = model.vehicle.build()
            if model.soils is None:
                self.catalog = builtin_catalog()
            else:
                self.catalog = SoilCatalog(SoilCurveParams(**s.model_dump()) for s in model.soils)
            self.soil_map = SoilMap(model.soil_map, self.catalog)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
        for name in model.tool.pull:
            if name not in self.catalog:
                raise ConfigError(f"tool.pull references unknown soil {name!r}")
        self.duration = model.duration
        self.dt = model.dt
        self.seed = model.seed
        self.noise = model.noise
        self.controller = model.controller
        self.transition_half_width = model.transition_half_width
        cmd = np.array(model.command, dtype=float)
        self._cmd_t, self._cmd_w = cmd[:, 0], cmd[:, 1]
        if model.tool.scale:
            sc = np.array(model.tool.scale, dtype=float)
            self._tool_t, self._tool_k = sc[:, 0], sc[:, 1]
        else:
            self._tool_t = None

    def command(self, t) -> float:
        return float(np.interp(t, self._cmd_t, self._cmd_w))

    def drawbar_pull(self, t, soil_name) -> float:
        base = self.model.tool.pull.get(soil_name, self.model.tool.default)
        if self._tool_t is None:
            return base
        return base * float(np.interp(t, self._tool_t, self._tool_k))

    def transition_zones(self):
        """Position intervals around soil boundaries that belong to no soil."""
        hw = self.transition_half_width
        return [(b - hw, b + hw) for b in self.soil_map.boundaries]


def _format_validation(exc: ValidationError, source) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{source}: {loc}: {err['msg']}")
    return "\n".join(lines)


def _load_yaml(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{path}:{mark.line + 1}" if mark else str(path)
        raise ConfigError(f"{where}: invalid YAML: {getattr(exc, 'problem', exc)}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def scenario_from_dict(data, source="<scenario>") -> Scenario:
    try:
        model = ScenarioModel.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_validation(exc, source)) from None
    try:
        return Scenario(model)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_scenario(path) -> Scenario:
    return scenario_from_dict(_load_yaml(path), source=str(path))


class SupervisorModel(_Model):
    window: int = Field(20, ge=2)
    omega_thresholds: Tuple[float, float] = (0.8, 4.0)
    speed_thresholds: Tuple[float, float] = (0.2, 1.0)
    lambda_min: float = Field(0.0, ge=0, le=1)
    lambda_max: float = Field(1.0, ge=0, le=1)


class AdaptationModel(_Model):
    enabled: bool = True
    window: int = Field(30, ge=1)
    a_min: float = Field(1.0, gt=0)
    a_max: float = Field(100.0, gt=0)


class ProcessNoiseModel(_Model):
    speed: float = Field(1e-4, ge=0)
    mu: float = Field(1e-3, ge=0)
    rho_s: float = Field(1e-4, ge=0)


class MeasurementNoiseModel(_Model):
    omega: float = Field(0.05, gt=0)
    v: float = Field(0.03, gt=0)


class InitialModel(_Model):
    mu: float = 0.3
    rho_s: float = Field(0.05, ge=0)
    var_mu: float = Field(1.0, gt=0)
    var_rho_s: float = Field(0.1, gt=0)


class UnscentedModel(_Model):
    alpha: float = Field(1e-3, gt=0, le=1)
    beta: float = 2.0
    kappa: float = 0.0


class EstimatorModel(_Model):
    vehicle: VehicleModelConfig = VehicleModelConfig()
    unscented: UnscentedModel = UnscentedModel()
    process_noise: ProcessNoiseModel = ProcessNoiseModel()
    measurement_noise: MeasurementNoiseModel = MeasurementNoiseModel()
    initial: InitialModel = InitialModel()
    adaptation: AdaptationModel = AdaptationModel()
    supervisor: SupervisorModel = SupervisorModel()
    dt: float = Field(0.01, gt=0)

    def build(self) -> EstimatorConfig:
        sup = self.supervisor
        try:
            supervisor = aukf.SupervisorConfig(
                sup.window, self.dt, tuple(sup.omega_thresholds), tuple(sup.speed_thresholds),
                sup.lambda_min, sup.lambda_max)
            vehicle = self.vehicle.build()
        except (ValueError, DomainError) as exc:
            raise ConfigError(str(exc)) from None
        if self.adaptation.a_min > self.adaptation.a_max:
            raise ConfigError("adaptation.a_min must not exceed adaptation.a_max")
        return EstimatorConfig(
            vehicle=vehicle,
            alpha=self.unscented.alpha, beta=self.unscented.beta, kappa=self.unscented.kappa,
            q_speed=self.process_noise.speed, q_mu=self.process_noise.mu,
            q_rho_s=self.process_noise.rho_s,
            sigma_omega=self.measurement_noise.omega, sigma_v=self.measurement_noise.v,
            initial_mu=self.initial.mu, initial_rho_s=self.initial.rho_s,
            initial_var_mu=self.initial.var_mu, initial_var_rho_s=self.initial.var_rho_s,
            adaptive=self.adaptation.enabled, adaptation_window=self.adaptation.window,
            a_min=self.adaptation.a_min, a_max=self.adaptation.a_max,
            supervisor=supervisor,
        )


def estimator_config_from_dict(data, source="<config>") -> EstimatorConfig:
    try:
        model = EstimatorModel.model_validate(data or {})
    except ValidationError as exc:
        raise ConfigError(_format_validation(exc, source)) from None
    try:
        return model.build()
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_estimator_config(path) -> EstimatorConfig:
    return estimator_config_from_dict(_load_yaml(path), source=str(path))
