import io
import json
import subprocess
import sys

import pytest

from ehdthrust import defaults
from ehdthrust.calib import VFSample, synthetic_vi
from ehdthrust.cli import main
from ehdthrust.core import OperatingPoint, TownsendModel, evaluate_operating_point
from ehdthrust.dataio import load_model, measurements_text, read_table


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


@pytest.fixture
def data_csv(tmp_path):
    vi = []
    for tid, vc in ((1, 3550.0), (2, 3600.0), (3, 3650.0), (4, 3600.0)):
        vi += synthetic_vi(TownsendModel(2.06e-12, vc), [3800.0, 4200.0, 4600.0, 5000.0, 5200.0], 0.01, tid, tid)
    vf = [VFSample(5200.0, 2.6e-4), VFSample(4600.0, 1.44e-4)]
    path = tmp_path / "data.csv"
    path.write_text(measurements_text(vi, vf))
    return path


def test_fit_writes_model(tmp_path, data_csv):
    code, text = run("fit", str(data_csv), "-o", str(tmp_path / "m.json"))
    assert code == 0
    art = load_model(tmp_path / "m.json")
    assert abs(art.townsend.v_crit - 3600.0) < 100.0
    assert len(art.per_thruster) == 4
    assert 0.8 < art.loss.eta < 0.95
    assert "thruster 4" in text and "fitted" in text


def test_predict_peak_force():
    code, text = run("predict", "--voltage", "5.2kV")
    assert code == 0
    assert "model thrust = 0.2999 mN/thruster, quad 1.2 mN" in text


def test_predict_csv(tmp_path):
    code, _ = run("predict", "--voltage", "5.2kV", "--voltage", "4600", "--csv", "--no-timestamp",
                  "-o", str(tmp_path / "p.csv"))
    assert code == 0
    header, rows = read_table(tmp_path / "p.csv")
    quad = rows[0][header.index("quad_model_thrust_N")]
    assert quad == pytest.approx(1.2e-3, rel=0.02)
    assert rows[1][0] == 4600.0


def test_sweep_matches_core(tmp_path):
    code, text = run("sweep", "--axis", "voltage", "--from", "3kV", "--to", "5.2kV", "--steps", "23",
                     "--no-timestamp")
    assert code == 0
    header, rows = read_table(io.StringIO(text))
    assert len(rows) == 23
    art = defaults.artifact()
    for row in rows:
        perf = evaluate_operating_point(art.townsend, art.loss, art.geometry, art.gas, OperatingPoint(row[0]))
        assert row == [perf.voltage, perf.current, perf.thrust, perf.power, perf.efficiency,
                       perf.thrust_density, perf.thrust_density_per_power]


def test_sweep_gap_axis():
    code, text = run("sweep", "--axis", "gap_d", "--from", "1mm", "--to", "5mm", "--steps", "5",
                     "--voltage", "5kV", "--no-timestamp")
    assert code == 0
    header, rows = read_table(io.StringIO(text))
    assert header[0] == "gap_d_m"
    assert [r[0] for r in rows] == pytest.approx([1e-3, 2e-3, 3e-3, 4e-3, 5e-3])


def test_output_is_byte_identical(tmp_path):
    args = ["sweep", "--axis", "voltage", "--from", "3kV", "--to", "5.2kV", "--steps", "23", "--no-timestamp"]
    assert run(*args)[1] == run(*args)[1]
    sim = ["simulate", "--mode", "hover", "--z0", "0.05", "--theta0", "0.05", "--duration", "0.2", "--no-timestamp"]
    assert run(*sim)[1] == run(*sim)[1]


def test_timestamp_comment_by_default():
    _, text = run("sweep", "--axis", "voltage", "--from", "3kV", "--to", "5.2kV", "--steps", "3")
    assert "# generated " in text


def test_simulate_openloop_zero_stays_on_ground(tmp_path):
    code, _ = run("simulate", "--mode", "openloop", "--voltage", "0", "--duration", "0.5",
                  "-o", str(tmp_path / "t.csv"))
    assert code == 0
    header, rows = read_table(tmp_path / "t.csv")
    z = header.index("z_m")
    assert len(rows) == 501
    assert all(r[z] == 0.0 for r in rows)


def test_simulate_openloop_liftoff():
    code, text = run("simulate", "--mode", "openloop", "--voltage", "4.6kV", "--eta", "0.87",
                     "--duration", "0.1", "--stride", "10", "--no-timestamp")
    assert code == 0
    header, rows = read_table(io.StringIO(text))
    assert rows[-1][header.index("z_m")] > 0


def test_simulate_hover_with_gains():
    code, text = run("simulate", "--mode", "hover", "--gains", "400,40,25,10", "--z-ref", "10cm",
                     "--z0", "5cm", "--theta0", "0.05", "--duration", "2", "--stride", "100", "--no-timestamp")
    assert code == 0
    header, rows = read_table(io.StringIO(text))
    assert abs(rows[-1][header.index("z_m")] - 0.1) < 1e-3


def test_report():
    code, text = run("report")
    assert code == 0
    assert "robofly/ehd_thruster" in text and "ionocraft" in text
    code, csv_text = run("report", "--csv", "--no-timestamp")
    header, rows = read_table(io.StringIO(csv_text))
    assert [r[0] for r in rows] == ["ehd_thruster", "robofly"]


def test_domain_error_is_machine_readable(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("voltage_V,current_A\n4000,1e-6\n5000,2e-6\n")
    code, _ = run("fit", str(bad), "-o", str(tmp_path / "m.json"))
    assert code == 1
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "calib.InsufficientData"


def test_parse_error_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("voltage_kV,current_uA\n-5,1\n")
    assert run("fit", str(bad), "-o", str(tmp_path / "m.json"))[0] == 1
    assert json.loads(capsys.readouterr().err)["error"] == "io.ParseError"


def test_missing_model_file(capsys):
    assert run("predict", "--model", "/nonexistent/m.json", "--voltage", "5kV")[0] == 1
    assert json.loads(capsys.readouterr().err)["error"] == "io.IoError"


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["predict", "--voltage", "5.2xV"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--mode", "openloop"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ehdthrust", "predict", "--voltage", "5.2kV"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "quad 1.2 mN" in proc.stdout
