"""Command-line front end.

Subcommands: fit, predict, sweep, simulate, report. Exit status is 0 on
success, 2 for malformed arguments and 1 for any other failure, in which case
a single JSON object ``{"error": <code>, "message": ...}`` goes to stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from datetime import datetime, timezone

from . import __version__, defaults
from .calib import fit_loss, fit_townsend
from .core import (LossModel, OperatingPoint, evaluate_operating_point, townsend_current,
                   townsend_thrust)
from .dataio import (ModelArtifact, atomic_write, load_model, parse_measurements, parse_quantity,
                     save_model, table_text)
from .errors import EHDError, UnitError
from .flightdyn import (ControllerGains, HoverController, OpenLoop, QuadState, SimConfig, simulate)
from .sweep import (AXIS_UNITS, EHD_PEAK, IONOCRAFT, ROBOFLY, SweepSpec, benchmark_table, ionocraft_comparison,
                    required_eta, run_sweep)

N_THRUSTERS = 4


def _quantity(dimension):
    def convert(text):
        try:
            return parse_quantity(text, dimension)
        except (ValueError, UnitError) as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    convert.__name__ = dimension
    return convert


def _voltages(text):
    parts = text.split(",")
    if len(parts) not in (1, 4):
        raise argparse.ArgumentTypeError("give one voltage or four comma-separated voltages")
    volts = [_quantity("voltage")(p) for p in parts]
    return tuple(volts * 4 if len(volts) == 1 else volts)


def _gains(text):
    try:
        values = [float(v) for v in text.split(",")]
        return ControllerGains(*values)
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"gains must be kp_theta,kd_theta,kp_z,kd_z: {exc}") from None


def _comments(args, *extra):
    lines = [f"ehdthrust {__version__} {args.command}", *extra]
    if not args.no_timestamp:
        lines.append("generated " + datetime.now(timezone.utc).isoformat(timespec="seconds"))
    return lines


def _emit(args, text: str, out=None):
    out = out or sys.stdout
    if getattr(args, "output", None):
        path = atomic_write(args.output, text)
        print(f"wrote {path}", file=out)
    else:
        out.write(text)


def _artifact(args) -> ModelArtifact:
    return load_model(args.model) if args.model else defaults.artifact()


def cmd_fit(args, out):
    vi, vf = parse_measurements(args.data)
    fit = fit_townsend(vi)
    art = defaults.artifact()
    loss = fit_loss(vf, fit.model, art.geometry, art.gas) if vf else art.loss
    artifact = ModelArtifact.from_fit(fit, loss, art.geometry, art.gas)
    path = save_model(artifact, args.output)
    print(f"pooled   C = {fit.model.c_geom:.6g} A/V^2  V_crit = {fit.model.v_crit:.6g} V  "
          f"rms = {fit.rms_residual:.4g} A  n = {fit.n_samples}", file=out)
    for tid, m in zip(fit.thruster_ids, fit.per_thruster_models):
        print(f"thruster {tid}  C = {m.c_geom:.6g} A/V^2  V_crit = {m.v_crit:.6g} V", file=out)
    print(f"V_crit mean = {fit.v_crit_mean:.6g} V  std = {fit.v_crit_std:.4g} V", file=out)
    print(f"eta = {loss.eta:.6g} ({'fitted' if vf else 'default'})", file=out)
    print(f"wrote {path}", file=out)


def cmd_predict(args, out):
    art = _artifact(args)
    weight = args.mass * defaults.value("vehicle", "g")
    columns = ("voltage_V", "current_A", "model_thrust_N", "thrust_N", "quad_model_thrust_N",
               "quad_thrust_N", "power_W", "quad_power_W", "efficiency_N_per_W",
               "thrust_density_N_per_m2", "model_thrust_to_weight", "thrust_to_weight")
    rows = []
    for v in args.voltage:
        op = OperatingPoint(v)
        perf = evaluate_operating_point(art.townsend, art.loss, art.geometry, art.gas, op)
        model_thrust = townsend_thrust(art.townsend, op, art.geometry, art.gas)
        rows.append((v, perf.current, model_thrust, perf.thrust, N_THRUSTERS * model_thrust,
                     N_THRUSTERS * perf.thrust, perf.power, N_THRUSTERS * perf.power, perf.efficiency,
                     perf.thrust_density, N_THRUSTERS * model_thrust / weight,
                     N_THRUSTERS * perf.thrust / weight))
    if args.csv:
        _emit(args, table_text(columns, rows, _comments(args)), out)
        return
    lines = []
    for r in rows:
        lines.append(
            f"V = {r[0] / 1e3:.4g} kV  I = {r[1] * 1e6:.4g} uA  "
            f"model thrust = {r[2] * 1e3:.4g} mN/thruster, quad {r[4] * 1e3:.4g} mN (T/W {r[10]:.3g})  "
            f"with eta = {art.loss.eta:.3g}: {r[3] * 1e3:.4g} mN/thruster, quad {r[5] * 1e3:.4g} mN "
            f"(T/W {r[11]:.3g})  P = {r[6] * 1e3:.4g} mW/thruster  F/P = {r[8] * 1e3:.4g} mN/W")
    _emit(args, "\n".join(lines) + "\n", out)


def cmd_sweep(args, out):
    art = _artifact(args)
    dim = {"voltage": "voltage", "gap_d": "length"}.get(args.axis)
    start, stop = (parse_quantity(x, dim) if dim else float(x) for x in (args.start, args.stop))
    spec = SweepSpec(args.axis, start, stop, args.steps, art.townsend, art.geometry, art.gas,
                     art.loss, voltage=args.voltage)
    rows = run_sweep(spec)
    columns = ["voltage_V", "current_A", "thrust_N", "power_W", "efficiency_N_per_W",
               "thrust_density_N_per_m2", "thrust_density_per_power"]
    if args.axis != "voltage":
        columns.insert(0, f"{args.axis}_{AXIS_UNITS[args.axis].replace('/', '_per_').replace('^', '')}")
    table = []
    for row in rows:
        p = row.performance
        cells = [p.voltage, p.current, p.thrust, p.power, p.efficiency, p.thrust_density,
                 p.thrust_density_per_power]
        if args.axis != "voltage":
            cells.insert(0, row.value)
        table.append(cells)
    _emit(args, table_text(columns, table, _comments(args)), out)


TRAJECTORY_COLUMNS = ("time_s", "x_m", "z_m", "theta_rad", "x_dot_m_s", "z_dot_m_s", "theta_dot_rad_s",
                      "v1_V", "v2_V", "v3_V", "v4_V", "f1_N", "f2_N", "f3_N", "f4_N",
                      "failed1", "failed2", "failed3", "failed4", "unreachable")


def trajectory_rows(trajectory):
    for pt in trajectory:
        s = pt.state
        yield (s.time, s.x, s.z, s.theta, s.x_dot, s.z_dot, s.theta_dot, *pt.command.voltages,
               *pt.forces, *(int(f) for f in pt.failed), int(pt.command.unreachable))


def cmd_simulate(args, out):
    art = _artifact(args)
    if args.eta is not None:
        art = replace(art, loss=LossModel(args.eta))
    params = defaults.quad_params(args.mass)
    act = defaults.actuator(art)
    if args.mode == "openloop":
        if args.voltage is None:
            raise argparse.ArgumentTypeError("--mode openloop needs --voltage")
        controller = OpenLoop(args.voltage)
        z0 = 0.0 if args.z0 is None else args.z0
    else:
        gains = args.gains or defaults.gains()
        controller = HoverController((0.0, args.z_ref), gains, act, params)
        z0 = args.z_ref if args.z0 is None else args.z0
    initial = QuadState(z=z0, theta=args.theta0)
    cfg = SimConfig(args.dt, args.duration, args.stride)
    traj = simulate(initial, controller, act, params, cfg)
    _emit(args, table_text(TRAJECTORY_COLUMNS, trajectory_rows(traj), _comments(args, f"mode {args.mode}")), out)
    final = traj[-1].state
    print(f"t = {final.time:.6g} s  x = {final.x:.6g} m  z = {final.z:.6g} m  theta = {final.theta:.6g} rad",
          file=sys.stderr)


def cmd_report(args, out):
    art = _artifact(args)
    weight = defaults.value("vehicle", "mass") * defaults.value("vehicle", "g")
    table = benchmark_table([EHD_PEAK, ROBOFLY])
    if args.csv:
        cols = ("name", "thrust_N", "power_W", "area_m2", "weight_N", "efficiency", "thrust_density",
                "density_per_power", "thrust_to_weight")
        _emit(args, table_text(cols, ([r[c] for c in cols] for r in table.rows()), _comments(args)), out)
        return

    lines = ["Benchmark (single EHD thruster at peak vs flapping wing)", table.to_text(), ""]
    lines.append("Quad thrust-to-weight from the model")
    for v in (4600.0, defaults.value("actuator", "v_spark")):
        op = OperatingPoint(v)
        f_model = N_THRUSTERS * townsend_thrust(art.townsend, op, art.geometry, art.gas)
        i = townsend_current(art.townsend, op)
        lines.append(f"  {v / 1e3:.3g} kV: model {f_model * 1e3:.4g} mN (T/W {f_model / weight:.3g}), "
                     f"with eta {art.loss.eta:.3g}: {art.loss.eta * f_model * 1e3:.4g} mN "
                     f"(T/W {art.loss.eta * f_model / weight:.3g}), power {N_THRUSTERS * i * v * 1e3:.4g} mW")
    lines.append("")
    lines.append("Matched-power comparison at 0.048 W")
    for basis in ("quad", "per_thruster"):
        try:
            cmp = ionocraft_comparison(art.townsend, art.loss, art.geometry, art.gas, power_basis=basis,
                                       weight=weight, v_spark=defaults.value("actuator", "v_spark"))
        except EHDError as exc:
            lines.append(f"  {basis}: {exc}")
            continue
        lines.append(f"  {basis:12s} V = {cmp.voltage:.5g} V  quad thrust = {cmp.ours.thrust * 1e6:.4g} uN  "
                     f"T/W = {cmp.ours.thrust_to_weight:.3g}  eta needed for 675 uN = "
                     f"{required_eta(cmp, 675e-6):.3g}")
    ref = IONOCRAFT
    lines.append(f"  {ref.name:12s} thrust = {ref.thrust * 1e6:.4g} uN  T/W = {ref.thrust_to_weight:.3g}")
    _emit(args, "\n".join(lines) + "\n", out)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--no-timestamp", action="store_true", help="omit the generation time from CSV output")

    parser = argparse.ArgumentParser(prog="ehdthrust", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", parents=[common], help="calibrate a model from measurements")
    p.add_argument("data", help="measurement CSV")
    p.add_argument("-o", "--output", required=True, help="model file to write")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", parents=[common], help="evaluate the thruster at given voltages")
    p.add_argument("--model", help="model file (default: shipped calibration)")
    p.add_argument("--voltage", type=_quantity("voltage"), action="append", required=True)
    p.add_argument("--mass", type=_quantity("mass"), default=defaults.value("vehicle", "mass"))
    p.add_argument("--csv", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("sweep", parents=[common], help="one-axis parameter sweep")
    p.add_argument("--model")
    p.add_argument("--axis", choices=sorted(AXIS_UNITS), required=True)
    p.add_argument("--from", dest="start", required=True)
    p.add_argument("--to", dest="stop", required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--voltage", type=_quantity("voltage"), default=5200.0,
                   help="operating voltage for gap_d and c_geom sweeps")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", parents=[common], help="planar flight simulation")
    p.add_argument("--model")
    p.add_argument("--mode", choices=("openloop", "hover"), required=True)
    p.add_argument("--voltage", type=_voltages, help="one voltage or V1,V2,V3,V4 (openloop)")
    p.add_argument("--gains", type=_gains, help="kp_theta,kd_theta,kp_z,kd_z (hover)")
    p.add_argument("--z-ref", type=_quantity("length"), default=0.1)
    p.add_argument("--z0", type=_quantity("length"))
    p.add_argument("--theta0", type=float, default=0.0)
    p.add_argument("--eta", type=float, help="override the loss factor")
    p.add_argument("--mass", type=_quantity("mass"))
    p.add_argument("--dt", type=_quantity("time"), default=defaults.value("simulation", "dt"))
    p.add_argument("--duration", type=_quantity("time"), default=1.0)
    p.add_argument("--stride", type=int, default=int(defaults.value("simulation", "record_stride")))
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", parents=[common], help="benchmark and comparison tables")
    p.add_argument("--model")
    p.add_argument("--csv", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args, out)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    except EHDError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return 1
    except ValueError as exc:
        print(json.dumps({"error": "core.InvalidValue", "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
