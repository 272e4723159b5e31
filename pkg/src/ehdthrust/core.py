"""One-dimensional EHD thruster model.

Current follows the quadratic Townsend law above corona onset; thrust is the
Coulomb force on the drift region, ``F = I d / mu``. Everything is in SI
units and every function is pure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

ION_MOBILITY_AIR = 2e-4  # m^2/(V s)
STANDARD_GRAVITY = 9.80  # m/s^2, makes 37 mg weigh 362.6 uN


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise DomainError(message)


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


@dataclass(frozen=True)
class GasMedium:
    ion_mobility: float = ION_MOBILITY_AIR

    def __post_init__(self):
        _require(_finite(self.ion_mobility) and self.ion_mobility > 0,
                 f"ion_mobility must be > 0, got {self.ion_mobility!r}")


@dataclass(frozen=True)
class ThrusterGeometry:
    """Electrode gap, collector open area and placement of one thruster."""

    gap_d: float = 3.5e-3
    flow_area: float = 21.6e-6
    blockage: float = 0.3275
    lever_arm_l: float = 3.5e-3
    emitter_tip_count: int = 1

    def __post_init__(self):
        _require(_finite(self.gap_d) and self.gap_d > 0, f"gap_d must be > 0, got {self.gap_d!r}")
        _require(_finite(self.flow_area) and self.flow_area > 0,
                 f"flow_area must be > 0, got {self.flow_area!r}")
        _require(_finite(self.blockage) and 0 <= self.blockage < 1,
                 f"blockage must be in [0, 1), got {self.blockage!r}")
        _require(_finite(self.lever_arm_l) and self.lever_arm_l > 0,
                 f"lever_arm_l must be > 0, got {self.lever_arm_l!r}")
        _require(int(self.emitter_tip_count) == self.emitter_tip_count and self.emitter_tip_count >= 1,
                 f"emitter_tip_count must be a positive integer, got {self.emitter_tip_count!r}")


@dataclass(frozen=True)
class TownsendModel:
    """``I = c_geom * V * (V - v_crit)`` above the onset voltage ``v_crit``."""

    c_geom: float
    v_crit: float

    def __post_init__(self):
        _require(_finite(self.c_geom) and self.c_geom > 0, f"c_geom must be > 0, got {self.c_geom!r}")
        _require(_finite(self.v_crit) and self.v_crit > 0, f"v_crit must be > 0, got {self.v_crit!r}")


@dataclass(frozen=True)
class OperatingPoint:
    voltage: float

    def __post_init__(self):
        _require(_finite(self.voltage) and self.voltage >= 0,
                 f"voltage must be >= 0, got {self.voltage!r}")


@dataclass(frozen=True)
class LossModel:
    """Measured thrust as a constant fraction ``eta`` of the Coulomb thrust."""

    eta: float = 1.0

    def __post_init__(self):
        _require(_finite(self.eta) and 0 < self.eta <= 1, f"eta must be in (0, 1], got {self.eta!r}")


@dataclass(frozen=True)
class ThrusterPerformance:
    voltage: float
    current: float
    thrust: float
    power: float
    efficiency: float
    thrust_density: float
    thrust_density_per_power: float


def townsend_current(model: TownsendModel, op: OperatingPoint) -> float:
    """Corona current in A; exactly zero at or below onset."""
    v = op.voltage
    if v <= model.v_crit:
        return 0.0
    return model.c_geom * v * (v - model.v_crit)


def coulomb_thrust(current: float, geom: ThrusterGeometry, gas: GasMedium) -> float:
    _require(current >= 0, f"current must be >= 0, got {current!r}")
    return current * geom.gap_d / gas.ion_mobility


def townsend_thrust(model: TownsendModel, op: OperatingPoint,
                    geom: ThrusterGeometry, gas: GasMedium) -> float:
    return coulomb_thrust(townsend_current(model, op), geom, gas)


def corona_power(current: float, op: OperatingPoint) -> float:
    _require(current >= 0, f"current must be >= 0, got {current!r}")
    return current * op.voltage


def ideal_efficiency(geom: ThrusterGeometry, gas: GasMedium, op: OperatingPoint) -> float:
    """Thrust per unit power ``d / (mu V)`` in N/W."""
    _require(op.voltage > 0, "efficiency is undefined at zero voltage")
    return geom.gap_d / (gas.ion_mobility * op.voltage)


def thrust_density(thrust: float, geom: ThrusterGeometry) -> float:
    return thrust / geom.flow_area


def thrust_to_weight(total_thrust: float, mass: float, g: float = STANDARD_GRAVITY) -> float:
    _require(mass > 0, f"mass must be > 0, got {mass!r}")
    return total_thrust / (mass * g)


def evaluate_operating_point(model: TownsendModel, loss: LossModel, geom: ThrusterGeometry,
                             gas: GasMedium, op: OperatingPoint) -> ThrusterPerformance:
    """Evaluate one thruster at ``op``.

    ``thrust`` is the loss-adjusted value ``eta * F_coulomb``; ``efficiency``
    is ``eta * d / (mu V)``, which equals ``thrust / power`` above onset and
    stays defined below it.
    """
    efficiency = loss.eta * ideal_efficiency(geom, gas, op)
    current = townsend_current(model, op)
    thrust = loss.eta * coulomb_thrust(current, geom, gas)
    power = corona_power(current, op)
    density = thrust_density(thrust, geom)
    return ThrusterPerformance(
        voltage=op.voltage,
        current=current,
        thrust=thrust,
        power=power,
        efficiency=efficiency,
        thrust_density=density,
        thrust_density_per_power=density / power if power > 0 else 0.0,
    )
