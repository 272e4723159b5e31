"""Parameter sweeps and cross-platform comparison tables."""
from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import permutations
from typing import Sequence

import numpy as np

from .core import (GasMedium, LossModel, OperatingPoint, ThrusterGeometry, ThrusterPerformance,
                   TownsendModel, corona_power, coulomb_thrust, evaluate_operating_point,
                   townsend_current)
from .errors import DomainError, PowerUnreachable

AXES = ("voltage", "gap_d", "c_geom")
AXIS_UNITS = {"voltage": "V", "gap_d": "m", "c_geom": "A/V^2"}


@dataclass(frozen=True)
class SweepSpec:
    """One-axis sweep; the swept quantity overrides the fixed context.

    ``voltage`` is the operating voltage used for gap and C sweeps.
    """

    axis: str
    start: float
    stop: float
    steps: int
    model: TownsendModel
    geom: ThrusterGeometry = ThrusterGeometry()
    gas: GasMedium = GasMedium()
    loss: LossModel = LossModel()
    voltage: float = 5200.0

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not self.start < self.stop:
            raise ValueError(f"start must be < stop, got {self.start!r} >= {self.stop!r}")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValueError(f"steps must be an integer >= 2, got {self.steps!r}")

    def values(self) -> list[float]:
        return [float(v) for v in np.linspace(self.start, self.stop, int(self.steps))]


@dataclass(frozen=True)
class SweepRow:
    value: float
    performance: ThrusterPerformance


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    rows = []
    for value in spec.values():
        model, geom, voltage = spec.model, spec.geom, spec.voltage
        try:
            if spec.axis == "voltage":
                voltage = value
            elif spec.axis == "gap_d":
                geom = replace(geom, gap_d=value)
            else:
                model = replace(model, c_geom=value)
            perf = evaluate_operating_point(model, spec.loss, geom, spec.gas, OperatingPoint(voltage))
        except DomainError as exc:
            raise DomainError(f"{spec.axis} = {value!r}: {exc}") from exc
        rows.append(SweepRow(value, perf))
    return rows


@dataclass(frozen=True)
class BenchmarkEntry:
    """Raw thrust, power and area of one platform; derived metrics are computed on access."""

    name: str
    thrust: float
    power: float
    area: float | None = None
    weight: float | None = None

    @property
    def efficiency(self) -> float:
        return self.thrust / self.power

    @property
    def thrust_density(self) -> float | None:
        return None if self.area is None else self.thrust / self.area

    @property
    def density_per_power(self) -> float | None:
        density = self.thrust_density
        return None if density is None else density / self.power

    @property
    def thrust_to_weight(self) -> float | None:
        return None if self.weight is None else self.thrust / self.weight


METRICS = ("efficiency", "thrust_density", "density_per_power", "thrust_to_weight")

# single thruster at its measured peak
EHD_PEAK = BenchmarkEntry("ehd_thruster", thrust=0.295e-3, power=90.4e-3, area=21.6e-6)
# flapping-wing robot of comparable size; area is the wing swept area
ROBOFLY = BenchmarkEntry("robofly", thrust=0.736e-3, power=60e-3, area=308e-6)
# single-emitter four-thruster device taking off at 2400 V and 20 uA
IONOCRAFT = BenchmarkEntry("ionocraft", thrust=200e-6, power=0.048, weight=98e-6)


@dataclass(frozen=True)
class BenchmarkTable:
    entries: tuple[BenchmarkEntry, ...]
    # (numerator name, denominator name) -> metric -> ratio
    ratios: dict

    def rows(self) -> list[dict]:
        out = []
        for e in self.entries:
            row = {"name": e.name, "thrust_N": e.thrust, "power_W": e.power,
                   "area_m2": e.area, "weight_N": e.weight}
            row.update({m: getattr(e, m) for m in METRICS})
            out.append(row)
        return out

    def ratio(self, numerator: str, denominator: str, metric: str) -> float | None:
        return self.ratios[(numerator, denominator)][metric]

    def to_text(self) -> str:
        header = ["name", "thrust_mN", "power_mW", "eff_mN_per_W", "density_N_m2",
                  "density_per_W", "T/W"]
        lines = []
        for e in self.entries:
            lines.append([e.name, _fmt(e.thrust * 1e3), _fmt(e.power * 1e3), _fmt(e.efficiency * 1e3),
                          _fmt(e.thrust_density), _fmt(e.density_per_power), _fmt(e.thrust_to_weight)])
        text = _align([header] + lines)
        ratio_lines = [["ratio", *METRICS]]
        for (a, b), values in self.ratios.items():
            ratio_lines.append([f"{a}/{b}", *(_fmt(values[m]) for m in METRICS)])
        return text + "\n\n" + _align(ratio_lines)


def _fmt(value) -> str:
    return "-" if value is None else f"{value:.4g}"


def _align(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def benchmark_table(entries: Sequence[BenchmarkEntry]) -> BenchmarkTable:
    """Derived metrics for each entry and every pairwise metric ratio."""
    entries = tuple(entries)
    if not entries:
        raise ValueError("benchmark_table needs at least one entry")
    ratios = {}
    for a, b in permutations(entries, 2):
        values = {}
        for m in METRICS:
            num, den = getattr(a, m), getattr(b, m)
            values[m] = None if num is None or not den else num / den
        ratios[(a.name, b.name)] = values
    return BenchmarkTable(entries, ratios)


@dataclass(frozen=True)
class MatchedPowerComparison:
    voltage: float
    ours: BenchmarkEntry
    reference: BenchmarkEntry
    power_basis: str
    eta: float


def power_at(model: TownsendModel, voltage: float, n_thrusters: int = 1) -> float:
    op = OperatingPoint(voltage)
    return n_thrusters * corona_power(townsend_current(model, op), op)


def voltage_for_power(model: TownsendModel, target: float, v_max: float,
                      n_thrusters: int = 1, rel_tol: float = 1e-6, max_iter: int = 60) -> float:
    """Bisect the corona power curve, strictly increasing above onset."""
    if not target > 0:
        raise ValueError(f"target power must be > 0, got {target!r}")
    p_max = power_at(model, v_max, n_thrusters)
    if target > p_max:
        raise PowerUnreachable(f"{target:g} W exceeds the {p_max:.6g} W available at {v_max:g} V")
    lo, hi = model.v_crit, v_max
    mid = hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        p = power_at(model, mid, n_thrusters)
        if abs(p - target) <= rel_tol * target:
            break
        if p < target:
            lo = mid
        else:
            hi = mid
    return mid


def ionocraft_comparison(model: TownsendModel, loss: LossModel, geom: ThrusterGeometry,
                         gas: GasMedium, target_power: float = 0.048, v_spark: float = 5200.0,
                         power_basis: str = "quad", weight: float = 362.6e-6,
                         n_thrusters: int = 4,
                         reference: BenchmarkEntry = IONOCRAFT) -> MatchedPowerComparison:
    """Quad thrust at the reference device's take-off power.

    ``power_basis="quad"`` matches the power drawn by all thrusters together;
    ``"per_thruster"`` matches it per thruster. Thrust is always reported for
    the whole vehicle.
    """
    if power_basis not in ("quad", "per_thruster"):
        raise ValueError(f"power_basis must be 'quad' or 'per_thruster', got {power_basis!r}")
    per_power = n_thrusters if power_basis == "quad" else 1
    voltage = voltage_for_power(model, target_power, v_spark, per_power)
    op = OperatingPoint(voltage)
    current = townsend_current(model, op)
    thrust = n_thrusters * loss.eta * coulomb_thrust(current, geom, gas)
    power = per_power * corona_power(current, op)
    ours = BenchmarkEntry("quad_thruster", thrust=thrust, power=power, area=n_thrusters * geom.flow_area,
                          weight=weight)
    return MatchedPowerComparison(voltage, ours, reference, power_basis, loss.eta)


def required_eta(comparison: MatchedPowerComparison, target_thrust: float) -> float:
    """Loss factor that would make the matched-power thrust equal ``target_thrust``.

    Values above 1 mean no physical loss factor can reach the target.
    """
    return target_thrust * comparison.eta / comparison.ours.thrust
