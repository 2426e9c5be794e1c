# pyright: reportMissingTypeStubs=false
"""
Parameter sweeps over the linear-response engine: pump power/Rabi/frequency and
flux grids against the probe frequency, Rabi calibration and power conversions.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from math import log10, sqrt
from typing import TYPE_CHECKING

import numpy as np

from . import __version__
from .errors import SimulationError
from .overlays import overlays_for
from .response import DEFAULT_PHASES, reflections

if TYPE_CHECKING:
    from typing import TypeAlias
    from typing import TypeVar

    T = TypeVar("T")
    R = TypeVar("R")
    from collections.abc import Callable, Iterable
    from typing import Any

    import numpy.typing as npt

    from .model import DeviceParams
    from .overlays import Overlays

    _FloatArray: TypeAlias = npt.NDArray[np.float64]
    _ComplexArray: TypeAlias = npt.NDArray[np.complex128]

logger = logging.getLogger(__name__)

RESONANT = "resonant"
REFERENCE_DBM = -114.0
CALIBRATION_PROBE_POINTS = 401
_MHZ = 1e-3


def dbm_to_rabi(p_dbm: float, k: float) -> float:
    """
    Ω/2π = k√P with P in watts.
    Args:
        p_dbm (float): Pump power at the device, dBm
        k     (float): MHz per √W
    Returns:
        (float): Ω/2π, MHz
    """
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    return k * sqrt(10 ** ((p_dbm - 30) / 10))


def rabi_to_dbm(rabi: float, k: float) -> float:
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if rabi <= 0:
        raise ValueError(f"rabi must be positive, got {rabi}")
    return 20 * log10(rabi / k) + 30


def k_from_rabi(rabi: float, p_dbm: float) -> float:
    """
    k such that `rabi` (MHz) is reached at `p_dbm`
    """
    if rabi <= 0:
        raise ValueError(f"rabi must be positive, got {rabi}")
    return rabi / sqrt(10 ** ((p_dbm - 30) / 10))


def default_workers() -> int:
    return os.cpu_count() or 1


def ordered_map(
    func: Callable[[T], R], tasks: Iterable[T], workers: int
) -> list[R]:
    """
    map() over a process pool; results keep the task order
    """
    if workers < 1:
        raise ValueError(f"workers must be at least 1, got {workers}")
    if workers == 1:
        return list(map(func, tasks))
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, tasks))


class AxisKind(Enum):
    PROBE_FREQ = "probe_freq"
    PUMP_POWER_DBM = "pump_power_dbm"
    PUMP_RABI = "pump_rabi"
    PUMP_FREQ = "pump_freq"
    FLUX_RATIO = "flux_ratio"

    @property
    def unit(self) -> str:
        match self:
            case AxisKind.PROBE_FREQ | AxisKind.PUMP_FREQ:
                return "GHz"
            case AxisKind.PUMP_POWER_DBM:
                return "dBm"
            case AxisKind.PUMP_RABI:
                return "MHz"
            case AxisKind.FLUX_RATIO:
                return "flux quanta"


@dataclass(frozen=True, kw_only=True)
class Axis:
    """
    Evenly spaced axis, `points` values from `start` to `stop` inclusive
    """

    kind: AxisKind
    start: float
    stop: float
    points: int

    def __post_init__(self) -> None:
        if self.points < 2:
            raise ValueError(f"{self.kind.value} axis needs at least 2 points")
        if not self.start < self.stop:
            raise ValueError(
                f"{self.kind.value} axis start {self.start} "
                f"must be below stop {self.stop}"
            )

    @property
    def values(self) -> _FloatArray:
        return np.linspace(self.start, self.stop, self.points)

    def to_mapping(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "start": self.start,
            "stop": self.stop,
            "points": self.points,
        }


@dataclass(frozen=True, kw_only=True)
class GridSpec:
    """
    Attributes:
        device     (DeviceParams)     : Fixed device; the flux axis overrides its flux
        x_axis     (Axis)             : Probe frequency axis
        y_axis     (Axis)             : Swept pump or device parameter
        omega_pump (float | str)      : Pump frequency in GHz or "resonant" (ω₁₀ of
                                          the device at each row)
        rabi       (None | float)     : Ω_pump/2π, MHz; unused on rabi/power axes
        k          (None | float)     : MHz per √W; required on the power axis
        n_phases   (int)              : Pump phases averaged over
    """

    device: DeviceParams
    x_axis: Axis
    y_axis: Axis
    omega_pump: float | str = RESONANT
    rabi: None | float = None
    k: None | float = None
    n_phases: int = DEFAULT_PHASES

    def __post_init__(self) -> None:
        if self.x_axis.kind is not AxisKind.PROBE_FREQ:
            raise ValueError(f"x axis must be probe_freq, got {self.x_axis.kind.value}")
        if self.y_axis.kind is AxisKind.PROBE_FREQ:
            raise ValueError("y axis cannot be probe_freq")
        if isinstance(self.omega_pump, str) and self.omega_pump != RESONANT:
            raise ValueError(f"omega_pump must be a number or {RESONANT!r}")
        if self.y_axis.kind is AxisKind.PUMP_FREQ and self.omega_pump != RESONANT:
            raise ValueError(
                "omega_pump is set by the pump_freq axis; leave it resonant"
            )
        if self.n_phases < 1:
            raise ValueError(f"n_phases must be at least 1, got {self.n_phases}")
        match self.y_axis.kind:
            case AxisKind.PUMP_POWER_DBM:
                if self.k is None or self.k <= 0:
                    raise ValueError("A pump_power_dbm axis needs a positive k")
            case AxisKind.PUMP_RABI:
                if self.y_axis.start < 0:
                    raise ValueError("pump_rabi axis cannot go negative")
            case _:
                if self.rabi is None or self.rabi < 0:
                    raise ValueError(
                        f"A {self.y_axis.kind.value} axis needs a non-negative rabi"
                    )
        # Flux values outside the transmon regime raise here
        for y in self.y_axis.values:
            _ = self.device_at(float(y)).omega10

    def device_at(self, y: float) -> DeviceParams:
        if self.y_axis.kind is AxisKind.FLUX_RATIO:
            return self.device.with_changes(flux_ratio=y)
        return self.device

    def pump_at(self, y: float) -> tuple[float, float]:
        """
        (ω_pump in GHz, Ω/2π in MHz) for the row at `y`
        """
        device = self.device_at(y)
        omega_pump = (
            device.omega10 if self.omega_pump == RESONANT else float(self.omega_pump)
        )
        match self.y_axis.kind:
            case AxisKind.PUMP_POWER_DBM:
                assert self.k is not None
                return omega_pump, dbm_to_rabi(y, self.k)
            case AxisKind.PUMP_RABI:
                return omega_pump, y
            case AxisKind.PUMP_FREQ:
                assert self.rabi is not None
                return y, self.rabi
            case _:
                assert self.rabi is not None
                return omega_pump, self.rabi

    def to_mapping(self) -> dict[str, Any]:
        return {
            "device": self.device.to_mapping(),
            "x_axis": self.x_axis.to_mapping(),
            "y_axis": self.y_axis.to_mapping(),
            "omega_pump": self.omega_pump,
            "rabi": self.rabi,
            "k": self.k,
            "n_phases": self.n_phases,
        }


@dataclass(frozen=True, kw_only=True)
class GridPointError:
    y_index: int
    x_index: int
    message: str


@dataclass(frozen=True, kw_only=True)
class _RowTask:
    y_index: int
    device: DeviceParams
    omega_pump: float
    rabi: float
    probe_freqs: _FloatArray
    n_phases: int


@dataclass(frozen=True, kw_only=True)
class _RowResult:
    r_values: _ComplexArray
    errors: tuple[GridPointError, ...]


def _evaluate_row(task: _RowTask) -> _RowResult:
    args = (task.device, task.omega_pump, task.rabi)
    try:
        r_values = reflections(*args, task.probe_freqs, task.n_phases)
        if np.all(np.isfinite(r_values)):
            return _RowResult(r_values=r_values, errors=())
    except (SimulationError, ValueError, np.linalg.LinAlgError) as err:
        logger.debug(
            "Row %d failed as a whole (%s); retrying per point", task.y_index, err
        )

    r_values = np.full(len(task.probe_freqs), np.nan, dtype=np.complex128)
    errors: list[GridPointError] = []
    for x_index, omega_p in enumerate(task.probe_freqs):
        try:
            value = reflections(*args, [omega_p], task.n_phases)[0]
        except (SimulationError, ValueError, np.linalg.LinAlgError) as err:
            errors.append(
                GridPointError(y_index=task.y_index, x_index=x_index, message=str(err))
            )
            continue
        if not np.isfinite(value):
            errors.append(
                GridPointError(
                    y_index=task.y_index, x_index=x_index, message="Non-finite r"
                )
            )
            continue
        r_values[x_index] = value
    return _RowResult(r_values=r_values, errors=tuple(errors))


@dataclass(frozen=True, kw_only=True, eq=False)
class SweepGrid:
    """
    Attributes:
        spec     (GridSpec)                   : What was swept
        r_values (numpy.ndarray)              : Complex r, shape (y points, x points);
                                                  NaN where a point failed
        errors   (tuple[GridPointError, ...]) : Failed points
        metadata (dict[str, Any])             : Parameters, axes and code version
    """

    spec: GridSpec
    r_values: _ComplexArray
    errors: tuple[GridPointError, ...] = ()
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        r_values = np.array(self.r_values, dtype=np.complex128)
        expected = (self.spec.y_axis.points, self.spec.x_axis.points)
        if r_values.shape != expected:
            raise ValueError(
                f"Grid values have shape {r_values.shape}, expected {expected}"
            )
        failed = {(e.y_index, e.x_index) for e in self.errors}
        bad = {(int(y), int(x)) for y, x in zip(*np.nonzero(~np.isfinite(r_values)))}
        if not bad <= failed:
            raise ValueError(
                f"{len(bad - failed)} non-finite grid values without an error"
            )
        r_values.setflags(write=False)
        object.__setattr__(self, "r_values", r_values)

    @property
    def x_values(self) -> _FloatArray:
        return self.spec.x_axis.values

    @property
    def y_values(self) -> _FloatArray:
        return self.spec.y_axis.values

    @property
    def values(self) -> _FloatArray:
        """
        |r|, row-major y then x
        """
        return np.abs(self.r_values)

    def row_overlays(self) -> list[None | Overlays]:
        """
        Analytic markers for every row; None where the pump is off
        """
        result: list[None | Overlays] = []
        for y in self.y_values:
            omega_pump, rabi = self.spec.pump_at(float(y))
            result.append(
                overlays_for(self.spec.device_at(float(y)), omega_pump, rabi)
                if rabi > 0
                else None
            )
        return result

    def overlay_polylines(self) -> dict[str, _FloatArray]:
        """
        One x position per row for each marker line, NaN where undefined. The
          `idler_*` lines are 2ω_pump minus each transition.
        """
        names = (
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
        )
        lines = {name: np.full(self.spec.y_axis.points, np.nan) for name in names}
        for i, overlays in enumerate(self.row_overlays()):
            if overlays is None:
                continue
            # NaN once the boundaries fall outside the sidebands
            inner = (
                overlays.inner_boundaries
                if overlays.has_gain_window()
                else (np.nan, np.nan)
            )
            positions = (
                *overlays.triplet,
                *inner,
                *overlays.autler_townes,
                *overlays.transitions,
                *overlays.sideband(overlays.transitions),
            )
            for name, position in zip(names, positions, strict=True):
                lines[name][i] = position
        return lines


def run_grid(spec: GridSpec, *, workers: int = 1) -> SweepGrid:
    """
    Evaluate r over the grid, one task per row. The result does not depend on
      `workers`.
    """
    probe_freqs = spec.x_axis.values
    tasks: list[_RowTask] = []
    for y_index, y in enumerate(spec.y_axis.values):
        omega_pump, rabi = spec.pump_at(float(y))
        tasks.append(
            _RowTask(
                y_index=y_index,
                device=spec.device_at(float(y)),
                omega_pump=omega_pump,
                rabi=rabi,
                probe_freqs=probe_freqs,
                n_phases=spec.n_phases,
            )
        )
    logger.info(
        "Sweeping %d x %d grid (%s vs %s) on %d worker(s)",
        spec.y_axis.points,
        spec.x_axis.points,
        spec.y_axis.kind.value,
        spec.x_axis.kind.value,
        workers,
    )
    rows = ordered_map(_evaluate_row, tasks, workers)
    errors = tuple(error for row in rows for error in row.errors)
    for error in errors:
        logger.warning(
            "Grid point (%d, %d) failed: %s",
            error.y_index,
            error.x_index,
            error.message,
        )
    return SweepGrid(
        spec=spec,
        r_values=np.stack([row.r_values for row in rows]),
        errors=errors,
        metadata={
            "code_version": __version__,
            "grid": spec.to_mapping(),
            "failed_points": len(errors),
        },
    )


@dataclass(frozen=True, kw_only=True, eq=False)
class CalibrationResult:
    """
    Attributes:
        rabi_star     (float)        : Ω/2π maximising the gain, MHz
        k             (float)        : MHz per √W placing Ω* at `reference_dbm`
        max_gain      (float)        : max |r| reached at Ω*
        reference_dbm (float)        : Power the calibration refers to
        rabis         (numpy.ndarray): Scanned Ω/2π, MHz
        gains         (numpy.ndarray): max |r| between the sidebands at each Ω
    """

    rabi_star: float
    k: float
    max_gain: float
    reference_dbm: float
    rabis: _FloatArray
    gains: _FloatArray


@dataclass(frozen=True, kw_only=True)
class _GainTask:
    device: DeviceParams
    omega_pump: float
    rabi: float
    probe_points: int
    n_phases: int


def _inter_triplet_gain(task: _GainTask) -> float:
    """
    max |r| strictly between the two Mollow sidebands
    """
    split = task.rabi * _MHZ
    probe_freqs = np.linspace(
        task.omega_pump - split, task.omega_pump + split, task.probe_points
    )[1:-1]
    r_values = reflections(
        task.device, task.omega_pump, task.rabi, probe_freqs, task.n_phases
    )
    return float(np.max(np.abs(r_values)))


def calibrate(
    params: DeviceParams,
    rabis: npt.ArrayLike,
    *,
    omega_pump: float | str = RESONANT,
    reference_dbm: float = REFERENCE_DBM,
    probe_points: int = CALIBRATION_PROBE_POINTS,
    n_phases: int = DEFAULT_PHASES,
    workers: int = 1,
) -> CalibrationResult:
    """
    Scan the pump Rabi frequency, find the one maximising the gain between the
      sidebands and solve k so that it is reached at `reference_dbm`.
    """
    rabis = np.asarray(rabis, dtype=np.float64)
    if rabis.ndim != 1 or len(rabis) < 2:
        raise ValueError("Need at least two Rabi frequencies to calibrate")
    if np.any(rabis <= 0):
        raise ValueError("Calibration Rabi frequencies must be positive")
    if probe_points < 3:
        raise ValueError(f"probe_points must be at least 3, got {probe_points}")
    pump = params.omega10 if omega_pump == RESONANT else float(omega_pump)
    tasks = [
        _GainTask(
            device=params,
            omega_pump=pump,
            rabi=float(rabi),
            probe_points=probe_points,
            n_phases=n_phases,
        )
        for rabi in rabis
    ]
    gains = np.asarray(ordered_map(_inter_triplet_gain, tasks, workers))
    best = int(np.argmax(gains))
    rabi_star = float(rabis[best])
    result = CalibrationResult(
        rabi_star=rabi_star,
        k=k_from_rabi(rabi_star, reference_dbm),
        max_gain=float(gains[best]),
        reference_dbm=reference_dbm,
        rabis=rabis,
        gains=gains,
    )
    logger.info(
        "Maximum gain %.4f at Ω/2π = %.4g MHz, k = %.6g MHz/√W",
        result.max_gain,
        result.rabi_star,
        result.k,
    )
    return result
