"""Exception hierarchy shared by all modules.

Every error carries a ``code`` string of the form ``<module>.<Name>`` so the
CLI can report failures in a machine-readable way.
"""


class EHDError(Exception):
    module = "ehdthrust"

    @property
    def code(self) -> str:
        return f"{self.module}.{type(self).__name__}"


class DomainError(EHDError, ValueError):
    """Input outside the domain of a physics formula."""

    module = "core"


# calibration

class CalibrationError(EHDError):
    module = "calib"


class InsufficientData(CalibrationError):
    pass


class DegenerateData(CalibrationError):
    pass


class NonPhysicalFit(CalibrationError):
    pass


class AllBelowOnset(CalibrationError):
    pass


# flight dynamics

class FlightError(EHDError):
    module = "flightdyn"


class NumericalDivergence(FlightError):
    pass


class UnreachableSetpoint(UserWarning):
    """Issued when the controller has to saturate a thruster command."""


# sweeps

class SweepError(EHDError):
    module = "sweep"


class PowerUnreachable(SweepError):
    pass


# files

class IOFormatError(EHDError):
    module = "io"


class ParseError(IOFormatError):
    def __init__(self, message, line=None, column=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.column = column


class UnitError(IOFormatError):
    pass


class EmptyFile(IOFormatError):
    pass


class IoError(IOFormatError):
    pass


class VersionMismatch(IOFormatError):
    pass


class SchemaError(IOFormatError):
    pass
