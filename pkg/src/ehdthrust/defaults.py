"""Typed access to the constants shipped in ``data/defaults.ini``."""
from __future__ import annotations

import configparser
from functools import lru_cache
from importlib import resources

from .core import GasMedium, LossModel, ThrusterGeometry, TownsendModel
from .dataio import ModelArtifact
from .flightdyn import ActuatorModel, ControllerGains, QuadParams, plate_inertia


@lru_cache(maxsize=1)
def _config() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.read_string(resources.files("ehdthrust").joinpath("data/defaults.ini").read_text("utf-8"))
    return parser


def value(section: str, key: str) -> float:
    return _config().getfloat(section, key)


def gas() -> GasMedium:
    return GasMedium(value("gas", "ion_mobility"))


def geometry() -> ThrusterGeometry:
    return ThrusterGeometry(
        gap_d=value("geometry", "gap_d"),
        flow_area=value("geometry", "flow_area"),
        blockage=value("geometry", "blockage"),
        lever_arm_l=value("geometry", "lever_arm_l"),
        emitter_tip_count=_config().getint("geometry", "emitter_tip_count"),
    )


def townsend() -> TownsendModel:
    return TownsendModel(value("townsend", "c_geom"), value("townsend", "v_crit"))


def loss() -> LossModel:
    return LossModel(value("loss", "eta"))


def artifact() -> ModelArtifact:
    """The calibration used when no fitted model file is given."""
    return ModelArtifact(townsend(), loss(), geometry(), gas())


def quad_params(mass: float | None = None) -> QuadParams:
    mass = value("vehicle", "mass") if mass is None else mass
    return QuadParams(
        mass=mass,
        inertia_ip=plate_inertia(mass, value("vehicle", "footprint_width")),
        lever_arm_l=value("geometry", "lever_arm_l"),
        g=value("vehicle", "g"),
    )


def actuator(art: ModelArtifact | None = None) -> ActuatorModel:
    art = artifact() if art is None else art
    return ActuatorModel(art.townsend, art.loss, art.geometry, art.gas,
                         v_spark=value("actuator", "v_spark"), v_margin=value("actuator", "v_margin"))


def gains() -> ControllerGains:
    return ControllerGains(*(value("controller", k) for k in ("kp_theta", "kd_theta", "kp_z", "kd_z")))
