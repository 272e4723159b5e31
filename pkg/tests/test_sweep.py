import pytest

from ehdthrust.core import (GasMedium, LossModel, OperatingPoint, ThrusterGeometry, TownsendModel,
                            evaluate_operating_point)
from ehdthrust.errors import DomainError, PowerUnreachable
from ehdthrust.sweep import (EHD_PEAK, IONOCRAFT, ROBOFLY, BenchmarkEntry, SweepSpec, benchmark_table,
                             ionocraft_comparison, power_at, required_eta, run_sweep, voltage_for_power)


def test_voltage_sweep_onset_and_monotone(model):
    rows = run_sweep(SweepSpec("voltage", 3000.0, 5200.0, 23, model))
    assert len(rows) == 23
    assert rows[0].value == 3000.0 and rows[-1].value == 5200.0
    below = [r for r in rows if r.value <= 3600.0]
    above = [r for r in rows if r.value > 3600.0]
    assert len(below) == 7
    assert all(r.performance.thrust == 0.0 for r in below)
    thrusts = [r.performance.thrust for r in above]
    assert all(b > a for a, b in zip(thrusts, thrusts[1:]))


def test_two_step_sweep_is_endpoints(model):
    rows = run_sweep(SweepSpec("c_geom", 1e-12, 3e-12, 2, model))
    assert [r.value for r in rows] == [1e-12, 3e-12]


def test_gap_sweep_efficiency_linear(model):
    rows = run_sweep(SweepSpec("gap_d", 1e-3, 5e-3, 9, model, voltage=5000.0))
    for r in rows:
        assert r.performance.efficiency == pytest.approx(r.value / (2e-4 * 5000.0), rel=1e-14)
    slopes = [r.performance.efficiency / r.value for r in rows]
    assert max(slopes) == pytest.approx(min(slopes), rel=1e-14)


@pytest.mark.parametrize("axis,start,stop", [("voltage", 3000.0, 5200.0), ("gap_d", 1e-3, 6e-3),
                                             ("c_geom", 1e-12, 4e-12)])
def test_sweep_rows_match_direct_evaluation(model, axis, start, stop):
    loss, geom, gas = LossModel(0.87), ThrusterGeometry(), GasMedium()
    spec = SweepSpec(axis, start, stop, 12, model, geom, gas, loss, voltage=4800.0)
    for row in run_sweep(spec):
        m, g, v = model, geom, 4800.0
        if axis == "voltage":
            v = row.value
        elif axis == "gap_d":
            g = ThrusterGeometry(gap_d=row.value)
        else:
            m = TownsendModel(row.value, model.v_crit)
        assert row.performance == evaluate_operating_point(m, loss, g, gas, OperatingPoint(v))


def test_sweep_errors_are_annotated(model):
    with pytest.raises(DomainError, match="voltage = 0.0"):
        run_sweep(SweepSpec("voltage", 0.0, 1000.0, 3, model))


def test_sweep_spec_invariants(model):
    with pytest.raises(ValueError):
        SweepSpec("pressure", 1.0, 2.0, 3, model)
    with pytest.raises(ValueError):
        SweepSpec("voltage", 2.0, 1.0, 3, model)
    with pytest.raises(ValueError):
        SweepSpec("voltage", 1.0, 2.0, 1, model)


def test_benchmark_rows():
    table = benchmark_table([EHD_PEAK, ROBOFLY])
    ehd, fly = table.entries
    assert ehd.efficiency == pytest.approx(3.265e-3, rel=1e-3)
    assert ehd.thrust_density == pytest.approx(13.66, rel=1e-3)
    assert ehd.density_per_power == pytest.approx(151.17, rel=0.005)
    assert fly.efficiency == pytest.approx(12.27e-3, rel=1e-3)
    assert fly.thrust_density == pytest.approx(2.39, rel=0.005)
    assert fly.density_per_power == pytest.approx(39.8, rel=0.005)
    assert table.ratio("ehd_thruster", "robofly", "density_per_power") == pytest.approx(3.8, rel=0.02)
    assert table.ratio("robofly", "ehd_thruster", "efficiency") == pytest.approx(3.74, rel=0.02)


def test_benchmark_cells_recompute_bit_for_bit():
    table = benchmark_table([EHD_PEAK, ROBOFLY, IONOCRAFT])
    for row in table.rows():
        assert row["efficiency"] == row["thrust_N"] / row["power_W"]
        if row["area_m2"] is not None:
            assert row["thrust_density"] == row["thrust_N"] / row["area_m2"]
            assert row["density_per_power"] == row["thrust_N"] / row["area_m2"] / row["power_W"]
        if row["weight_N"] is not None:
            assert row["thrust_to_weight"] == row["thrust_N"] / row["weight_N"]
    assert table.ratio("ionocraft", "robofly", "thrust_density") is None


def test_benchmark_text_and_empty():
    text = benchmark_table([EHD_PEAK, ROBOFLY]).to_text()
    assert "robofly/ehd_thruster" in text
    with pytest.raises(ValueError):
        benchmark_table([])


def test_ionocraft_reference_row():
    assert IONOCRAFT.thrust_to_weight == pytest.approx(2.04, abs=0.005)
    assert IONOCRAFT.power == 0.048


@pytest.mark.parametrize("basis", ["quad", "per_thruster"])
def test_matched_power_bisection(model, geom, gas, basis):
    cmp = ionocraft_comparison(model, LossModel(1.0), geom, gas, power_basis=basis)
    n = 4 if basis == "quad" else 1
    assert power_at(model, cmp.voltage, n) == pytest.approx(0.048, rel=1e-6)
    assert cmp.ours.power == pytest.approx(0.048, rel=1e-6)


def test_bisection_converges_for_any_reachable_power(model):
    p_max = power_at(model, 5200.0)
    for frac in (1e-6, 1e-3, 0.1, 0.5, 0.99, 1.0):
        v = voltage_for_power(model, frac * p_max, 5200.0, max_iter=60)
        assert power_at(model, v) == pytest.approx(frac * p_max, rel=1e-6)


def test_power_unreachable(model, geom, gas):
    with pytest.raises(PowerUnreachable):
        ionocraft_comparison(model, LossModel(1.0), geom, gas, target_power=1.0)


def test_table_calibration_target(model, geom, gas):
    # 675 uN at 0.048 W needs eta > 1 if the power is drawn by the whole quad,
    # and eta ~ 0.94 if each thruster draws 0.048 W
    quad = ionocraft_comparison(model, LossModel(1.0), geom, gas, power_basis="quad")
    assert required_eta(quad, 675e-6) > 1.0
    per = ionocraft_comparison(model, LossModel(1.0), geom, gas, power_basis="per_thruster")
    eta = required_eta(per, 675e-6)
    assert 0.9 < eta < 1.0
    tuned = ionocraft_comparison(model, LossModel(eta), geom, gas, power_basis="per_thruster")
    assert tuned.ours.thrust == pytest.approx(675e-6, rel=1e-9)
    assert tuned.ours.thrust_to_weight == pytest.approx(1.86, abs=0.005)


def test_entry_without_optional_fields():
    e = BenchmarkEntry("x", thrust=1.0, power=2.0)
    assert e.thrust_density is None and e.density_per_power is None and e.thrust_to_weight is None
