from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
import pytest

from mollow_gain import sweep
from mollow_gain.errors import SimulationError, TransmonRegimeError
from mollow_gain.model import DeviceParams
from mollow_gain.response import reflections
from mollow_gain.sweep import (
    RESONANT,
    Axis,
    AxisKind,
    GridPointError,
    GridSpec,
    SweepGrid,
    calibrate,
    dbm_to_rabi,
    k_from_rabi,
    ordered_map,
    rabi_to_dbm,
    run_grid,
)

if TYPE_CHECKING:
    from collections.abc import Callable

    import numpy.typing as npt


def _probe_axis(points: int = 21) -> Axis:
    return Axis(kind=AxisKind.PROBE_FREQ, start=4.4, stop=4.8, points=points)


def _rabi_spec(device: DeviceParams, points: int = 4) -> GridSpec:
    return GridSpec(
        device=device,
        x_axis=_probe_axis(),
        y_axis=Axis(kind=AxisKind.PUMP_RABI, start=0.0, stop=150.0, points=points),
    )


def _square(value: int) -> int:
    return value * value


def test_power_conversions() -> None:
    # -30 dBm is a microwatt
    assert dbm_to_rabi(-30.0, 2.0e3) == pytest.approx(2.0)
    assert rabi_to_dbm(dbm_to_rabi(-114.0, 1.9e9), 1.9e9) == pytest.approx(-114.0)
    assert k_from_rabi(dbm_to_rabi(-114.0, 1.9e9), -114.0) == pytest.approx(1.9e9)
    assert dbm_to_rabi(-114.0, 1.9e9) == pytest.approx(120.0, rel=0.01)


def test_six_db_doubles_rabi() -> None:
    assert dbm_to_rabi(-108.0, 1e9) / dbm_to_rabi(-114.0, 1e9) == pytest.approx(
        10 ** (6 / 20)
    )


@pytest.mark.parametrize(
    ("func", "first", "second"),
    [
        (dbm_to_rabi, -114.0, 0.0),
        (rabi_to_dbm, 0.0, 1e9),
        (rabi_to_dbm, 10.0, -1.0),
        (k_from_rabi, -1.0, -114.0),
    ],
)
def test_power_conversions_reject_bad_input(
    func: Callable[[float, float], float], first: float, second: float
) -> None:
    with pytest.raises(ValueError):
        func(first, second)


@pytest.mark.parametrize("workers", [1, 3])
def test_ordered_map_keeps_order(workers: int) -> None:
    assert ordered_map(_square, range(10), workers) == [i * i for i in range(10)]


def test_ordered_map_needs_a_worker() -> None:
    with pytest.raises(ValueError):
        ordered_map(_square, [1], 0)


def test_axis_values() -> None:
    axis = _probe_axis(5)
    np.testing.assert_allclose(axis.values, [4.4, 4.5, 4.6, 4.7, 4.8])
    assert axis.to_mapping()["kind"] == "probe_freq"
    assert AxisKind.PUMP_POWER_DBM.unit == "dBm"
    with pytest.raises(ValueError):
        Axis(kind=AxisKind.PROBE_FREQ, start=4.8, stop=4.4, points=5)
    with pytest.raises(ValueError):
        Axis(kind=AxisKind.PROBE_FREQ, start=4.4, stop=4.8, points=1)


def test_grid_spec_validation(device: DeviceParams) -> None:
    flux = Axis(kind=AxisKind.FLUX_RATIO, start=-0.2, stop=0.2, points=5)
    power = Axis(kind=AxisKind.PUMP_POWER_DBM, start=-130.0, stop=-110.0, points=5)
    pump_freq = Axis(kind=AxisKind.PUMP_FREQ, start=4.0, stop=5.0, points=5)
    with pytest.raises(ValueError):
        GridSpec(device=device, x_axis=flux, y_axis=_probe_axis())
    with pytest.raises(ValueError):
        GridSpec(device=device, x_axis=_probe_axis(), y_axis=power)
    with pytest.raises(ValueError):
        GridSpec(device=device, x_axis=_probe_axis(), y_axis=flux)
    with pytest.raises(ValueError):
        GridSpec(
            device=device,
            x_axis=_probe_axis(),
            y_axis=pump_freq,
            omega_pump=4.5,
            rabi=10.0,
        )
    with pytest.raises(ValueError):
        GridSpec(
            device=device, x_axis=_probe_axis(), y_axis=power, k=1e9, omega_pump="mid"
        )


def test_flux_axis_outside_transmon_regime(device: DeviceParams) -> None:
    flux = Axis(kind=AxisKind.FLUX_RATIO, start=0.0, stop=0.5, points=3)
    with pytest.raises(TransmonRegimeError):
        GridSpec(device=device, x_axis=_probe_axis(), y_axis=flux, rabi=5.0)


def test_pump_at(device: DeviceParams) -> None:
    power = GridSpec(
        device=device,
        x_axis=_probe_axis(),
        y_axis=Axis(kind=AxisKind.PUMP_POWER_DBM, start=-130.0, stop=-110.0, points=3),
        k=1.9e9,
    )
    assert power.pump_at(-114.0) == (device.omega10, dbm_to_rabi(-114.0, 1.9e9))
    pump_freq = GridSpec(
        device=device,
        x_axis=_probe_axis(),
        y_axis=Axis(kind=AxisKind.PUMP_FREQ, start=4.0, stop=5.0, points=3),
        rabi=50.0,
    )
    assert pump_freq.pump_at(4.2) == (4.2, 50.0)
    flux = GridSpec(
        device=device,
        x_axis=_probe_axis(),
        y_axis=Axis(kind=AxisKind.FLUX_RATIO, start=0.0, stop=0.2, points=3),
        rabi=5.0,
    )
    omega_pump, rabi = flux.pump_at(0.2)
    assert omega_pump == pytest.approx(device.with_changes(flux_ratio=0.2).omega10)
    assert rabi == 5.0
    assert flux.omega_pump == RESONANT


def test_run_grid_rows_match_reflections(device: DeviceParams) -> None:
    spec = _rabi_spec(device)
    grid = run_grid(spec)
    assert grid.values.shape == (4, 21)
    assert not grid.errors
    for row, rabi in zip(grid.r_values, spec.y_axis.values):
        np.testing.assert_allclose(
            row, reflections(device, device.omega10, float(rabi), grid.x_values)
        )
    assert grid.metadata["failed_points"] == 0
    assert grid.metadata["grid"]["y_axis"]["kind"] == "pump_rabi"


def test_run_grid_is_deterministic_across_workers(device: DeviceParams) -> None:
    spec = _rabi_spec(device, points=5)
    serial = run_grid(spec, workers=1)
    parallel = run_grid(spec, workers=3)
    np.testing.assert_array_equal(serial.r_values, parallel.r_values)


def test_failed_points_become_nan(
    device: DeviceParams, monkeypatch: pytest.MonkeyPatch
) -> None:
    original = sweep.reflections

    def flaky(
        params: DeviceParams,
        omega_pump: float,
        rabi: float,
        omega_ps: npt.ArrayLike,
        m_phases: int,
    ) -> npt.NDArray[np.complex128]:
        omega_ps = np.atleast_1d(omega_ps)
        if rabi > 0 and np.any(np.isclose(omega_ps, 4.6)):
            raise SimulationError("singular")
        return original(params, omega_pump, rabi, omega_ps, m_phases)

    monkeypatch.setattr(sweep, "reflections", flaky)
    grid = run_grid(_rabi_spec(device))
    bad_column = int(np.argmin(np.abs(grid.x_values - 4.6)))
    assert {(e.y_index, e.x_index) for e in grid.errors} == {
        (1, bad_column),
        (2, bad_column),
        (3, bad_column),
    }
    assert np.all(np.isnan(grid.r_values[1:, bad_column]))
    assert np.all(np.isfinite(np.delete(grid.r_values, bad_column, axis=1)))
    assert np.all(np.isfinite(grid.r_values[0]))
    assert grid.metadata["failed_points"] == 3


def test_sweep_grid_requires_errors_for_nan(device: DeviceParams) -> None:
    spec = _rabi_spec(device, points=2)
    values = np.ones((2, 21), dtype=np.complex128)
    values[1, 3] = np.nan
    with pytest.raises(ValueError):
        SweepGrid(spec=spec, r_values=values)
    grid = SweepGrid(
        spec=spec,
        r_values=values,
        errors=(GridPointError(y_index=1, x_index=3, message="singular"),),
    )
    assert np.isnan(grid.values[1, 3])
    with pytest.raises(ValueError):
        SweepGrid(spec=spec, r_values=np.ones((3, 21)))


def test_overlay_polylines(device: DeviceParams) -> None:
    grid = SweepGrid(spec=_rabi_spec(device), r_values=np.ones((4, 21)))
    lines = grid.overlay_polylines()
    assert set(lines) == {
        "triplet_lower",
        "triplet_center",
        "triplet_upper",
        "inner_lower",
        "inner_upper",
        "autler_townes_lower",
        "autler_townes_upper",
        "omega10",
        "omega21",
        "idler_omega10",
        "idler_omega21",
    }
    # The first row has no pump
    assert all(np.isnan(line[0]) for line in lines.values())
    np.testing.assert_allclose(
        lines["triplet_upper"][1:] - lines["triplet_center"][1:],
        grid.y_values[1:] * 1e-3,
    )
    assert grid.row_overlays()[0] is None
    np.testing.assert_allclose(
        lines["idler_omega21"][1:], 2 * device.omega10 - device.omega21
    )
    np.testing.assert_allclose(lines["idler_omega10"][1:], device.omega10)


def test_idler_lines_follow_detuned_pump(device: DeviceParams) -> None:
    spec = GridSpec(
        device=device,
        x_axis=_probe_axis(),
        y_axis=Axis(kind=AxisKind.PUMP_FREQ, start=4.4, stop=4.6, points=3),
        rabi=80.0,
    )
    lines = SweepGrid(spec=spec, r_values=np.ones((3, 21))).overlay_polylines()
    np.testing.assert_allclose(
        lines["idler_omega10"], 2 * spec.y_axis.values - device.omega10
    )
    np.testing.assert_allclose(
        lines["idler_omega21"], 2 * spec.y_axis.values - device.omega21
    )


def test_inner_lines_need_a_gain_window(device: DeviceParams) -> None:
    # inner boundaries at 240 and 120 MHz lie outside sidebands at 5 and 10 MHz
    spec = GridSpec(
        device=device,
        x_axis=_probe_axis(),
        y_axis=Axis(kind=AxisKind.PUMP_RABI, start=0.0, stop=10.0, points=3),
    )
    lines = SweepGrid(spec=spec, r_values=np.ones((3, 21))).overlay_polylines()
    assert np.isnan(lines["inner_lower"]).all()
    assert np.isnan(lines["inner_upper"]).all()
    assert not np.isnan(lines["triplet_upper"][1:]).any()


def test_calibrate_picks_best_rabi(device: DeviceParams) -> None:
    result = calibrate(device, [20.0, 120.0, 400.0], probe_points=101)
    assert result.rabi_star == result.rabis[int(np.argmax(result.gains))]
    assert result.max_gain == result.gains.max()
    assert result.max_gain > 1
    assert result.k == pytest.approx(k_from_rabi(result.rabi_star, -114.0))
    assert result.reference_dbm == -114.0


@pytest.mark.parametrize(
    "rabis", [[100.0], [0.0, 100.0], [-10.0, 100.0], [[100.0, 200.0]]]
)
def test_calibrate_rejects_bad_scan(device: DeviceParams, rabis: list[float]) -> None:
    with pytest.raises(ValueError):
        calibrate(device, rabis)


def test_calibrate_needs_probe_points(device: DeviceParams) -> None:
    with pytest.raises(ValueError):
        calibrate(device, [50.0, 100.0], probe_points=2)
