"""Planar (x-z) rigid-body dynamics of the quad-thruster with voltage actuation.

Thrusters 1, 3 sit on one side of the pitch axis and 2, 4 on the other. The
summed thrust acts along the body axis, so it is rotated by the pitch angle
theta into the world frame::

    I_p theta'' = [(F2 + F4) - (F1 + F3)] l
    m z''       = [(F2 + F4) + (F1 + F3)] cos(theta) - m g
    m x''       = [(F2 + F4) + (F1 + F3)] sin(theta)
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (STANDARD_GRAVITY, GasMedium, LossModel, OperatingPoint, ThrusterGeometry,
                   TownsendModel, townsend_thrust)
from .errors import NumericalDivergence, UnreachableSetpoint

DIVERGENCE_LIMIT = 1e6
_MIN_COS = 0.1


def plate_inertia(mass: float, width: float) -> float:
    """Inertia of a uniform plate about an in-plane axis, ``m w^2 / 12``."""
    return mass * width * width / 12.0


@dataclass(frozen=True)
class QuadParams:
    mass: float = 37e-6
    inertia_ip: float = plate_inertia(37e-6, 0.018)
    lever_arm_l: float = 3.5e-3
    g: float = STANDARD_GRAVITY

    def __post_init__(self):
        for name in ("mass", "inertia_ip", "lever_arm_l", "g"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be > 0, got {value!r}")

    @property
    def weight(self) -> float:
        return self.mass * self.g


@dataclass(frozen=True)
class QuadState:
    x: float = 0.0
    z: float = 0.0
    theta: float = 0.0
    x_dot: float = 0.0
    z_dot: float = 0.0
    theta_dot: float = 0.0
    time: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (*self.vector(), self.time)):
            raise ValueError(f"non-finite state {self!r}")

    def vector(self) -> np.ndarray:
        return np.array([self.x, self.z, self.theta, self.x_dot, self.z_dot, self.theta_dot])

    @classmethod
    def from_vector(cls, vec, time: float) -> "QuadState":
        return cls(*(float(v) for v in vec), time=float(time))


@dataclass(frozen=True)
class ActuatorModel:
    """Voltage-to-thrust map of one thruster, with onset and sparkover limits.

    ``v_min`` defaults to the onset voltage. Commands are kept at or below
    ``v_spark - v_margin``; anything above ``v_spark`` destroys the thruster.
    """

    townsend: TownsendModel
    loss: LossModel = LossModel()
    geom: ThrusterGeometry = ThrusterGeometry()
    gas: GasMedium = GasMedium()
    v_min: float | None = None
    v_spark: float = 5200.0
    v_margin: float = 100.0

    def __post_init__(self):
        if self.v_min is None:
            object.__setattr__(self, "v_min", self.townsend.v_crit)
        if not self.townsend.v_crit <= self.v_min < self.v_spark:
            raise ValueError(f"need v_crit <= v_min < v_spark, got {self.townsend.v_crit}, "
                             f"{self.v_min}, {self.v_spark}")
        if not 0 <= self.v_margin < self.v_spark - self.v_min:
            raise ValueError(f"v_margin {self.v_margin} leaves no usable voltage range")

    @property
    def v_max(self) -> float:
        return self.v_spark - self.v_margin

    def force_at(self, voltage: float) -> float:
        return self.loss.eta * townsend_thrust(self.townsend, OperatingPoint(voltage), self.geom, self.gas)

    @property
    def max_force(self) -> float:
        return self.force_at(self.v_max)


@dataclass(frozen=True)
class ThrustCommand:
    voltages: tuple[float, float, float, float]
    unreachable: bool = False

    def __post_init__(self):
        volts = tuple(float(v) for v in self.voltages)
        if len(volts) != 4:
            raise ValueError(f"expected 4 voltages, got {len(volts)}")
        if not all(math.isfinite(v) and v >= 0 for v in volts):
            raise ValueError(f"voltages must be finite and >= 0, got {volts}")
        object.__setattr__(self, "voltages", volts)


@dataclass(frozen=True)
class ControllerGains:
    """PD gains in acceleration units: ``theta'' = kp e - kd theta'`` etc."""

    kp_theta: float = 400.0
    kd_theta: float = 40.0
    kp_z: float = 25.0
    kd_z: float = 10.0

    def __post_init__(self):
        for name in ("kp_theta", "kd_theta", "kp_z", "kd_z"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be >= 0, got {value!r}")


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    duration: float = 1.0
    record_stride: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt!r}")
        if not self.duration >= self.dt:
            raise ValueError(f"duration must be >= dt, got {self.duration!r}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError(f"record_stride must be a positive integer, got {self.record_stride!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))


NO_FAILURES = (False, False, False, False)


def thrust_from_command(act: ActuatorModel, cmd: ThrustCommand,
                        failed: Sequence[bool] = NO_FAILURES):
    """Per-thruster forces for a voltage command.

    Returns ``(forces, failed)``. A thruster driven above ``v_spark`` is
    latched as failed and produces no thrust from then on; pass the returned
    flags back in on the next call.
    """
    forces, flags = [], []
    for v, dead in zip(cmd.voltages, failed):
        dead = dead or v > act.v_spark
        flags.append(dead)
        forces.append(0.0 if dead else act.force_at(v))
    return tuple(forces), tuple(flags)


def dynamics_rhs(state: QuadState, forces: Sequence[float], params: QuadParams) -> np.ndarray:
    return _rhs(state.vector(), forces, params)


def _rhs(y: np.ndarray, forces: Sequence[float], params: QuadParams) -> np.ndarray:
    f1, f2, f3, f4 = forces
    right, left = f2 + f4, f1 + f3
    total = right + left
    theta = y[2]
    return np.array([
        y[3],
        y[4],
        y[5],
        total * math.sin(theta) / params.mass,
        total * math.cos(theta) / params.mass - params.g,
        (right - left) * params.lever_arm_l / params.inertia_ip,
    ])


def _rk4(y: np.ndarray, forces, params: QuadParams, dt: float) -> np.ndarray:
    k1 = _rhs(y, forces, params)
    k2 = _rhs(y + 0.5 * dt * k1, forces, params)
    k3 = _rhs(y + 0.5 * dt * k2, forces, params)
    k4 = _rhs(y + dt * k3, forces, params)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_rk4(state: QuadState, forces: Sequence[float], params: QuadParams, dt: float) -> QuadState:
    """Classical RK4 step with the forces held constant over ``dt``."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    return QuadState.from_vector(_rk4(state.vector(), forces, params, dt), state.time + dt)


def invert_thrust_to_voltage(act: ActuatorModel, desired: float) -> float:
    """Voltage giving ``desired`` thrust on one thruster, saturated.

    Zero thrust switches the thruster off (0 V). Demands below the thrust at
    ``v_min`` get ``v_min``; demands above the thrust at ``v_max`` get
    ``v_max``.
    """
    if not desired >= 0:
        raise ValueError(f"desired thrust must be >= 0, got {desired!r}")
    if desired == 0:
        return 0.0
    if desired >= act.max_force:
        return act.v_max
    if desired <= act.force_at(act.v_min):
        return act.v_min
    k = act.loss.eta * act.townsend.c_geom * act.geom.gap_d / act.gas.ion_mobility
    vc = act.townsend.v_crit
    return 0.5 * (vc + math.sqrt(vc * vc + 4.0 * desired / k))


def pd_controller(state: QuadState, setpoint: tuple[float, float], gains: ControllerGains,
                  act: ActuatorModel, params: QuadParams) -> ThrustCommand:
    """Altitude and pitch PD with gravity feedforward, allocated to four voltages.

    ``setpoint`` is ``(theta_ref, z_ref)``. When a thruster needs more than the
    actuator can give, its command saturates, the returned command is flagged
    ``unreachable`` and an ``UnreachableSetpoint`` warning is issued.
    """
    theta_ref, z_ref = setpoint
    vertical = params.g + gains.kp_z * (z_ref - state.z) - gains.kd_z * state.z_dot
    total = params.mass * vertical / max(math.cos(state.theta), _MIN_COS)
    angular = gains.kp_theta * (theta_ref - state.theta) - gains.kd_theta * state.theta_dot
    diff = params.inertia_ip * angular / params.lever_arm_l

    left = max(0.0, 0.5 * (total - diff)) / 2.0    # F1 = F3
    right = max(0.0, 0.5 * (total + diff)) / 2.0   # F2 = F4
    unreachable = max(left, right) > act.max_force
    if unreachable:
        warnings.warn(f"thruster demand {max(left, right):.4g} N exceeds the "
                      f"{act.max_force:.4g} N actuator limit", UnreachableSetpoint, stacklevel=2)
    v_left = invert_thrust_to_voltage(act, left)
    v_right = invert_thrust_to_voltage(act, right)
    return ThrustCommand((v_left, v_right, v_left, v_right), unreachable)


class OpenLoop:
    """Fixed voltages, or a schedule ``time -> 4 voltages``."""

    def __init__(self, voltages):
        self.voltages = voltages

    def __call__(self, state: QuadState) -> ThrustCommand:
        volts = self.voltages(state.time) if callable(self.voltages) else self.voltages
        return ThrustCommand(tuple(volts))


class HoverController:
    def __init__(self, setpoint, gains: ControllerGains, act: ActuatorModel, params: QuadParams):
        self.setpoint = setpoint
        self.gains = gains
        self.act = act
        self.params = params

    def __call__(self, state: QuadState) -> ThrustCommand:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UnreachableSetpoint)
            return pd_controller(state, self.setpoint, self.gains, self.act, self.params)


@dataclass(frozen=True)
class TrajectoryPoint:
    state: QuadState
    command: ThrustCommand
    forces: tuple[float, float, float, float]
    failed: tuple[bool, bool, bool, bool] = field(default=NO_FAILURES)


def simulate(initial: QuadState, controller: Callable[[QuadState], ThrustCommand],
             act: ActuatorModel, params: QuadParams, cfg: SimConfig) -> list[TrajectoryPoint]:
    """Fixed-step RK4 rollout with a unilateral ground at z = 0.

    The controller is queried once per step and its forces held over the step.
    Samples are recorded at step 0, every ``record_stride`` steps, and at the
    final state; each record holds the state and the command/forces applied
    from that instant.
    """
    y = initial.vector()
    t0 = initial.time
    failed = NO_FAILURES
    n = cfg.n_steps
    out: list[TrajectoryPoint] = []
    state = initial
    for k in range(n + 1):
        cmd = controller(state)
        forces, failed = thrust_from_command(act, cmd, failed)
        if k % cfg.record_stride == 0 or k == n:
            out.append(TrajectoryPoint(state, cmd, forces, failed))
        if k == n:
            break
        y = _rk4(y, forces, params, cfg.dt)
        if y[1] < 0.0:
            y[1] = 0.0
            y[4] = max(y[4], 0.0)
        if not np.all(np.abs(y) <= DIVERGENCE_LIMIT):
            raise NumericalDivergence(f"state exceeded {DIVERGENCE_LIMIT:g} at t = {t0 + (k + 1) * cfg.dt:g} s")
        state = QuadState.from_vector(y, t0 + (k + 1) * cfg.dt)
    return out
