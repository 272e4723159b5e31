"""Calibration of the Townsend current law and the thrust loss factor.

The Townsend law is bilinear in (C, V_crit). For a fixed onset voltage the
best C is a one-line linear least-squares solution, so the fit profiles C out
and searches V_crit alone: a 1 V grid over the admissible interval, then a
golden-section refinement around the grid minimum.
"""
from __future__ import annotations

import math
import statistics
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import (GasMedium, LossModel, OperatingPoint, ThrusterGeometry, TownsendModel,
                   townsend_current, townsend_thrust)
from .errors import AllBelowOnset, DegenerateData, InsufficientData, NonPhysicalFit

GRID_STEP = 1.0  # V
REFINE_TOL = 0.1  # V
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class VISample:
    voltage: float
    current: float
    thruster_id: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.voltage) and self.voltage > 0):
            raise ValueError(f"voltage must be > 0, got {self.voltage!r}")
        if not (math.isfinite(self.current) and self.current >= 0):
            raise ValueError(f"current must be >= 0, got {self.current!r}")


@dataclass(frozen=True)
class VFSample:
    voltage: float
    thrust: float
    thruster_id: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.voltage) and self.voltage > 0):
            raise ValueError(f"voltage must be > 0, got {self.voltage!r}")
        if not (math.isfinite(self.thrust) and self.thrust >= 0):
            raise ValueError(f"thrust must be >= 0, got {self.thrust!r}")


@dataclass(frozen=True)
class FitResult:
    """Pooled Townsend fit plus the per-thruster fits it was compared with.

    ``per_thruster_models[i]`` belongs to ``thruster_ids[i]``. With data from
    a single thruster the pooled model is the only entry and the spread is 0.
    """

    model: TownsendModel
    rms_residual: float
    per_thruster_models: tuple[TownsendModel, ...]
    thruster_ids: tuple[int, ...]
    v_crit_mean: float
    v_crit_std: float
    n_samples: int = 0


def _profile(volts: np.ndarray, amps: np.ndarray, v_crit: np.ndarray):
    """Optimal C and residual sum of squares for each candidate onset."""
    basis = volts[None, :] * (volts[None, :] - v_crit[:, None])
    c_geom = (basis @ amps) / np.einsum("ij,ij->i", basis, basis)
    sse = ((amps[None, :] - c_geom[:, None] * basis) ** 2).sum(axis=1)
    return c_geom, sse


def _profile_at(volts, amps, v_crit: float):
    c_geom, sse = _profile(volts, amps, np.array([v_crit]))
    return float(c_geom[0]), float(sse[0])


def _golden_min(f, lo: float, hi: float, tol: float) -> float:
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _fit_one(samples: Sequence[VISample]) -> tuple[TownsendModel, float]:
    volts = np.array([s.voltage for s in samples], dtype=float)
    amps = np.array([s.current for s in samples], dtype=float)
    if len(np.unique(volts)) < 3:
        raise InsufficientData(f"need at least 3 distinct voltages, got {len(np.unique(volts))}")
    on = amps > 0
    if not on.any():
        raise DegenerateData("all currents are zero")
    if on.sum() < 2:
        raise InsufficientData("need at least 2 samples above onset")

    lo = 0.5 * volts.min()
    if (~on).any():
        lo = max(lo, volts[~on].max())
    hi = volts[on].min()
    if lo > hi:
        raise DegenerateData(f"zero-current sample at {lo} V lies above a conducting sample at {hi} V")

    v_on, i_on = volts[on], amps[on]
    grid = np.arange(lo, hi, GRID_STEP)
    grid = np.append(grid, hi)
    c_grid, sse_grid = _profile(v_on, i_on, grid)
    k = int(np.argmin(sse_grid))
    best_v, best_c, best_sse = float(grid[k]), float(c_grid[k]), float(sse_grid[k])

    a = max(lo, best_v - GRID_STEP)
    b = min(hi, best_v + GRID_STEP)
    if b > a:
        v_ref = _golden_min(lambda v: _profile_at(v_on, i_on, v)[1], a, b, REFINE_TOL)
        c_ref, sse_ref = _profile_at(v_on, i_on, v_ref)
        if sse_ref <= best_sse:
            best_v, best_c, best_sse = v_ref, c_ref, sse_ref

    if not best_c > 0:
        raise NonPhysicalFit(f"best-fit C = {best_c!r} is not positive")
    return TownsendModel(best_c, best_v), math.sqrt(best_sse / len(v_on))


def _canonical(samples: Iterable[VISample]) -> list[VISample]:
    return sorted(samples, key=lambda s: (s.thruster_id, s.voltage, s.current))


def rms_residual(model: TownsendModel, samples: Iterable[VISample]) -> float:
    """RMS of ``I - I_model`` over the conducting samples."""
    res = [s.current - townsend_current(model, OperatingPoint(s.voltage))
           for s in _canonical(samples) if s.current > 0]
    if not res:
        return 0.0
    return math.sqrt(math.fsum(r * r for r in res) / len(res))


def fit_townsend(samples: Iterable[VISample]) -> FitResult:
    """Fit C and V_crit to V-I samples, pooled and per thruster.

    Zero-current samples are left out of the residual; they only push the
    lower bound of the onset search up to their voltage.
    """
    samples = _canonical(samples)
    if len(samples) < 3:
        raise InsufficientData(f"need at least 3 samples, got {len(samples)}")

    groups: dict[int, list[VISample]] = defaultdict(list)
    for s in samples:
        groups[s.thruster_id].append(s)
    ids = tuple(sorted(groups))

    pooled, rms = _fit_one(samples)
    if len(ids) == 1:
        return FitResult(pooled, rms, (pooled,), ids, pooled.v_crit, 0.0, len(samples))

    per = tuple(_fit_one(groups[i])[0] for i in ids)
    mean, std = thruster_spread(per)
    return FitResult(pooled, rms, per, ids, mean, std, len(samples))


def thruster_spread(results) -> tuple[float, float]:
    """Mean and sample standard deviation of the onset voltages.

    Accepts FitResult or TownsendModel items.
    """
    values = [r.model.v_crit if isinstance(r, FitResult) else r.v_crit for r in results]
    if len(values) < 2:
        raise InsufficientData(f"spread needs at least 2 thrusters, got {len(values)}")
    return statistics.fmean(values), statistics.stdev(values)


def fit_loss(samples: Iterable[VFSample], model: TownsendModel, geom: ThrusterGeometry,
             gas: GasMedium) -> LossModel:
    """Least-squares ratio of measured to predicted thrust, clamped to (0, 1]."""
    samples = sorted(samples, key=lambda s: (s.thruster_id, s.voltage, s.thrust))
    if not samples:
        raise InsufficientData("no thrust samples")
    pairs = [(s.thrust, townsend_thrust(model, OperatingPoint(s.voltage), geom, gas)) for s in samples]
    pairs = [(f, p) for f, p in pairs if p > 0]
    if not pairs:
        raise AllBelowOnset(f"no thrust sample lies above the onset voltage {model.v_crit} V")
    eta = math.fsum(f * p for f, p in pairs) / math.fsum(p * p for _, p in pairs)
    if not eta > 0:
        raise NonPhysicalFit(f"loss factor {eta!r} is not positive")
    return LossModel(min(eta, 1.0))


def synthetic_vi(model: TownsendModel, voltages: Sequence[float], rel_noise: float = 0.0,
                 seed: int = 0, thruster_id: int = 1) -> list[VISample]:
    """Generate V-I samples from ``model`` with multiplicative Gaussian noise.

    For each voltage in order two uniforms ``u1, u2`` are drawn from
    ``numpy.random.Generator(PCG64(seed)).random()``; the normal deviate is
    the Box-Muller ``sqrt(-2 ln(1 - u1)) cos(2 pi u2)`` and the current is
    ``I(V) (1 + rel_noise z)``, floored at zero.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    out = []
    for v in voltages:
        u1, u2 = rng.random(), rng.random()
        z = math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)
        current = townsend_current(model, OperatingPoint(v)) * (1.0 + rel_noise * z)
        out.append(VISample(float(v), max(current, 0.0), thruster_id))
    return out
