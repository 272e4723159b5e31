"""EHD quad-thruster modelling: Townsend/Coulomb thrust, calibration, sweeps and planar flight."""

__version__ = "0.1.0"
