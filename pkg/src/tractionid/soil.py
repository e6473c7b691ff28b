"""Empirical adhesion-slip curve, soil catalog and soil map."""
from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

# Prototype shape shared by all built-in ground classes; only the scale varies.
PROTOTYPE_SHAPE = (0.52, 0.01, -11.36)


@dataclass(frozen=True)
class SoilCurveParams:
    name: str
    a: float
    p: float = PROTOTYPE_SHAPE[0]
    alpha1: float = PROTOTYPE_SHAPE[1]
    alpha2: float = PROTOTYPE_SHAPE[2]
    rho_s: float = 0.05

    def __post_init__(self):
        if self.a <= 0:
            raise DomainError(f"soil {self.name!r}: scale a must be positive")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"soil {self.name!r}: p must lie in [0, 1]")
        if self.rho_s < 0:
            raise DomainError(f"soil {self.name!r}: rho_s must be >= 0")

    @property
    def shape(self):
        return (self.p, self.alpha1, self.alpha2)


def shape_function(s, p, alpha1, alpha2):
    """Unit-scale adhesion curve ``1 - p e^(alpha1 s) - (1-p) e^(alpha2 s)``."""
    s = np.asarray(s, dtype=float)
    return 1.0 - p * np.exp(alpha1 * s) - (1.0 - p) * np.exp(alpha2 * s)


def mu_of_s(params: SoilCurveParams, s):
    """Adhesion coefficient at slip ``s`` (scalar or array)."""
    out = params.a * shape_function(s, params.p, params.alpha1, params.alpha2)
    return float(out) if np.ndim(out) == 0 else out


class SoilCatalog:
    """Ordered, name-keyed collection of soil types."""

    def __init__(self, soils):
        soils = list(soils)
        if not soils:
            raise ConfigError("soil catalog must not be empty")
        self._soils = {}
        for soil in soils:
            if soil.name in self._soils:
                raise ConfigError(f"duplicate soil name {soil.name!r}")
            self._soils[soil.name] = soil

    def __getitem__(self, name) -> SoilCurveParams:
        try:
            return self._soils[name]
        except KeyError:
            raise ConfigError(f"unknown soil {name!r}") from None

    def __contains__(self, name):
        return name in self._soils

    def __iter__(self):
        return iter(self._soils.values())

    def __len__(self):
        return len(self._soils)

    @property
    def names(self):
        return list(self._soils)


# Curve scales per ground class; the rho_s values are synthetic stand-ins.
BUILTIN_SCALES = {"hard": 1.42, "fine": 0.85, "wet": 0.83, "coarse": 0.91, "grass": 0.4}
BUILTIN_RHO_S = {"hard": 0.05, "fine": 0.10, "wet": 0.10, "coarse": 0.12, "grass": 0.05}


def builtin_catalog() -> SoilCatalog:
    return SoilCatalog(
        SoilCurveParams(name, a, rho_s=BUILTIN_RHO_S[name])
        for name, a in BUILTIN_SCALES.items()
    )


class SoilMap:
    """Piecewise-constant soil assignment along the drive path.

    ``breakpoints`` is a sequence of ``(start_position, soil_name)`` with the
    first start at 0 and strictly increasing starts. Names are resolved
    against ``catalog`` here so lookups cannot fail later.
    """

    def __init__(self, breakpoints, catalog: SoilCatalog):
        breakpoints = [(float(x), str(name)) for x, name in breakpoints]
        if not breakpoints:
            raise ConfigError("soil map must have at least one breakpoint")
        if breakpoints[0][0] != 0.0:
            raise ConfigError("first soil map breakpoint must be at position 0")
        starts = [x for x, _ in breakpoints]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ConfigError("soil map positions must be strictly increasing")
        for _, name in breakpoints:
            if name not in catalog:
                raise ConfigError(f"soil map references unknown soil {name!r}")
        self.breakpoints = tuple(breakpoints)
        self.catalog = catalog
        self._starts = starts

    def index_at(self, position) -> int:
        if position < 0:
            raise DomainError("position must be >= 0")
        return bisect.bisect_right(self._starts, position) - 1

    def segments(self):
        """``(start, end, name)`` triples; the last segment ends at infinity."""
        ends = self._starts[1:] + [float("inf")]
        return [(x0, x1, name) for (x0, name), x1 in zip(self.breakpoints, ends)]

    @property
    def boundaries(self):
        return self._starts[1:]


def soil_at(soil_map: SoilMap, catalog: SoilCatalog, position) -> SoilCurveParams:
    return catalog[soil_map.breakpoints[soil_map.index_at(position)][1]]
