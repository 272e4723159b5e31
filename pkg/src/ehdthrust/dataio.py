"""Measurement CSV ingestion, table emission and model persistence.

CSV dialect: comma separated, UTF-8, ``#`` comment lines and blank lines
ignored, mandatory header row, LF or CRLF accepted, LF written. Unit
suffixes in measurement headers (``voltage_kV``, ``current_uA`` ...) are
converted to SI on read by exact decimal scaling.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import re
import tempfile
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Iterable, Sequence

from .calib import FitResult, VFSample, VISample
from .core import GasMedium, LossModel, ThrusterGeometry, TownsendModel
from .errors import EmptyFile, IoError, ParseError, SchemaError, UnitError, VersionMismatch

FORMAT_VERSION = "ehdthrust-model/1"

# unit -> power of ten relative to the SI unit
UNITS = {
    "voltage": {"V": 0, "kV": 3, "mV": -3},
    "current": {"A": 0, "mA": -3, "uA": -6, "µA": -6, "μA": -6, "nA": -9},
    "thrust": {"N": 0, "mN": -3, "uN": -6, "µN": -6, "μN": -6},
    "length": {"m": 0, "cm": -2, "mm": -3, "um": -6},
    "mass": {"kg": 0, "g": -3, "mg": -6},
    "power": {"W": 0, "mW": -3},
    "time": {"s": 0, "ms": -3},
    "area": {"m2": 0, "mm2": -6},
}
SI_UNIT = {dim: next(u for u, e in table.items() if e == 0) for dim, table in UNITS.items()}

_QUANTITY = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*([^\d\s.+-][^\s]*)?\s*$")


def scale_decimal(text: str, exponent: int) -> float:
    """``float(text * 10**exponent)`` computed exactly, then rounded once."""
    try:
        value = Decimal(text.strip())
    except InvalidOperation:
        raise ValueError(f"not a number: {text!r}") from None
    if not value.is_finite():
        raise ValueError(f"not a finite number: {text!r}")
    return float(value.scaleb(exponent))


def parse_quantity(text: str, dimension: str) -> float:
    """Parse ``"4.6kV"``, ``"37 mg"`` or a bare SI number into SI units."""
    m = _QUANTITY.match(text)
    if not m:
        raise ValueError(f"cannot parse {dimension} quantity {text!r}")
    number, unit = m.group(1), m.group(2) or ""
    table = UNITS[dimension]
    if unit and unit not in table:
        raise UnitError(f"unknown {dimension} unit {unit!r} in {text!r}; expected one of {sorted(table)}")
    return scale_decimal(number, table.get(unit, 0))


def _read_text(source) -> str:
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        return Path(source).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {source}: {exc}") from exc


def _data_lines(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, next(csv.reader([line]))


def _measurement_column(name: str, lineno: int):
    name = name.strip()
    if name in ("thruster", "thruster_id"):
        return "thruster", None
    for base in ("voltage", "current", "thrust"):
        if name == base:
            return base, 0
        if name.startswith(base + "_"):
            unit = name[len(base) + 1:]
            if unit not in UNITS[base]:
                raise UnitError(f"line {lineno}: unknown unit {unit!r} for column {name!r}")
            return base, UNITS[base][unit]
    raise ParseError("unknown column", lineno, name)


def parse_measurements(source) -> tuple[list[VISample], list[VFSample]]:
    """Read a V-I / V-thrust measurement CSV.

    Columns: optional ``thruster``, mandatory ``voltage``, and at least one
    of ``current`` / ``thrust``, each with an optional unit suffix. A row with
    a current yields a VISample, a row with a thrust a VFSample.
    """
    lines = _data_lines(_read_text(source))
    try:
        header_line, header = next(lines)
    except StopIteration:
        raise EmptyFile("no header row") from None

    columns = [_measurement_column(h, header_line) for h in header]
    kinds = [k for k, _ in columns]
    for kind in set(kinds):
        if kinds.count(kind) > 1:
            raise ParseError(f"duplicate {kind} column", header_line)
    if "voltage" not in kinds:
        raise ParseError("missing voltage column", header_line)
    if "current" not in kinds and "thrust" not in kinds:
        raise ParseError("need a current or thrust column", header_line)

    vi: list[VISample] = []
    vf: list[VFSample] = []
    n_rows = 0
    for lineno, cells in lines:
        n_rows += 1
        if len(cells) != len(columns):
            raise ParseError(f"expected {len(columns)} fields, got {len(cells)}", lineno)
        values: dict[str, float | int | None] = {"thruster": 1, "current": None, "thrust": None}
        for (kind, exponent), name, cell in zip(columns, header, cells):
            cell = cell.strip()
            if not cell:
                if kind in ("voltage", "thruster"):
                    raise ParseError("missing value", lineno, name)
                continue
            if kind == "thruster":
                try:
                    values[kind] = int(cell)
                except ValueError:
                    raise ParseError(f"thruster id must be an integer, got {cell!r}", lineno, name) from None
                continue
            try:
                values[kind] = scale_decimal(cell, exponent)
            except ValueError as exc:
                raise ParseError(str(exc), lineno, name) from None
        voltage = values["voltage"]
        if not voltage > 0:
            raise ParseError(f"voltage must be > 0, got {voltage!r}", lineno, "voltage")
        if values["current"] is None and values["thrust"] is None:
            raise ParseError("row has neither current nor thrust", lineno)
        for kind in ("current", "thrust"):
            if values[kind] is not None and not values[kind] >= 0:
                raise ParseError(f"{kind} must be >= 0, got {values[kind]!r}", lineno, kind)
        if values["current"] is not None:
            vi.append(VISample(voltage, values["current"], values["thruster"]))
        if values["thrust"] is not None:
            vf.append(VFSample(voltage, values["thrust"], values["thruster"]))
    if n_rows == 0:
        raise EmptyFile("no data rows")
    return vi, vf


def format_number(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def table_text(columns: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return buf.getvalue()


def read_table(source) -> tuple[list[str], list[list]]:
    """Parse any CSV this package emits; numeric cells become floats, empty ones None."""
    lines = _data_lines(_read_text(source))
    try:
        _, header = next(lines)
    except StopIteration:
        raise EmptyFile("no header row") from None
    rows = []
    for lineno, cells in lines:
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(cells)}", lineno)
        row = []
        for cell in cells:
            if cell == "":
                row.append(None)
                continue
            try:
                row.append(float(cell))
            except ValueError:
                row.append(cell)
        rows.append(row)
    return header, rows


def measurements_text(vi: Sequence[VISample], vf: Sequence[VFSample], comments: Sequence[str] = ()) -> str:
    """Emit samples in SI units, merging current and thrust taken at the same point."""
    merged: dict[tuple[int, float], list] = {}
    for s in vi:
        merged.setdefault((s.thruster_id, s.voltage), [None, None])[0] = s.current
    for s in vf:
        merged.setdefault((s.thruster_id, s.voltage), [None, None])[1] = s.thrust
    rows = [(tid, v, cur, thr) for (tid, v), (cur, thr) in merged.items()]
    return table_text(("thruster", "voltage_V", "current_A", "thrust_N"), rows, comments)


def resolve_output(path) -> Path:
    """Relative output paths land in ``$EHDTHRUST_OUTPUT_DIR`` when it is set."""
    path = Path(path)
    base = os.environ.get("EHDTHRUST_OUTPUT_DIR")
    if base and not path.is_absolute():
        return Path(base) / path
    return path


def atomic_write(path, text: str) -> Path:
    path = resolve_output(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


@dataclass(frozen=True)
class ModelArtifact:
    """Everything needed to re-evaluate a calibrated thruster."""

    townsend: TownsendModel
    loss: LossModel = LossModel()
    geometry: ThrusterGeometry = ThrusterGeometry()
    gas: GasMedium = GasMedium()
    per_thruster: tuple[tuple[int, TownsendModel], ...] = ()
    rms_residual: float = 0.0
    v_crit_mean: float | None = None
    v_crit_std: float = 0.0
    n_samples: int = 0

    @classmethod
    def from_fit(cls, fit: FitResult, loss: LossModel = LossModel(),
                 geometry: ThrusterGeometry = ThrusterGeometry(), gas: GasMedium = GasMedium()):
        return cls(fit.model, loss, geometry, gas,
                   tuple(zip(fit.thruster_ids, fit.per_thruster_models)),
                   fit.rms_residual, fit.v_crit_mean, fit.v_crit_std, fit.n_samples)

    def to_dict(self) -> dict:
        g = self.geometry
        return {
            "format_version": FORMAT_VERSION,
            "townsend": {"c_geom": self.townsend.c_geom, "v_crit": self.townsend.v_crit},
            "per_thruster": [{"thruster_id": i, "c_geom": m.c_geom, "v_crit": m.v_crit}
                             for i, m in self.per_thruster],
            "loss": {"eta": self.loss.eta},
            "geometry": {"gap_d": g.gap_d, "flow_area": g.flow_area, "blockage": g.blockage,
                         "lever_arm_l": g.lever_arm_l, "emitter_tip_count": g.emitter_tip_count},
            "gas": {"ion_mobility": self.gas.ion_mobility},
            "fit": {"rms_residual": self.rms_residual, "v_crit_mean": self.v_crit_mean,
                    "v_crit_std": self.v_crit_std, "n_samples": self.n_samples},
        }

    @classmethod
    def from_dict(cls, data) -> "ModelArtifact":
        if not isinstance(data, dict):
            raise SchemaError("model file must hold a JSON object")
        version = data.get("format_version")
        if version != FORMAT_VERSION:
            raise VersionMismatch(f"expected format_version {FORMAT_VERSION!r}, got {version!r}")
        try:
            fit = data.get("fit", {})
            return cls(
                townsend=TownsendModel(_num(data["townsend"]["c_geom"]), _num(data["townsend"]["v_crit"])),
                loss=LossModel(_num(data["loss"]["eta"])),
                geometry=ThrusterGeometry(**{k: (int(v) if k == "emitter_tip_count" else _num(v))
                                             for k, v in data["geometry"].items()}),
                gas=GasMedium(_num(data["gas"]["ion_mobility"])),
                per_thruster=tuple((int(p["thruster_id"]), TownsendModel(_num(p["c_geom"]), _num(p["v_crit"])))
                                   for p in data.get("per_thruster", [])),
                rms_residual=_num(fit.get("rms_residual", 0.0)),
                v_crit_mean=None if fit.get("v_crit_mean") is None else _num(fit["v_crit_mean"]),
                v_crit_std=_num(fit.get("v_crit_std", 0.0)),
                n_samples=int(fit.get("n_samples", 0)),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise SchemaError(f"invalid model file: {exc}") from exc


def _num(value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError(f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"non-finite number {value!r}")
    return value


def model_text(artifact: ModelArtifact) -> str:
    # float repr is the shortest string that parses back to the same double
    return json.dumps(artifact.to_dict(), indent=2, allow_nan=False) + "\n"


def save_model(artifact: ModelArtifact, path) -> Path:
    return atomic_write(path, model_text(artifact))


def load_model(path) -> ModelArtifact:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc
    return ModelArtifact.from_dict(data)
