# pyright: reportMissingTypeStubs=false
"""
YAML run configuration.

Every block is optional and falls back to the measured-device defaults. Unknown keys
are rejected, and every failure is a `ConfigError` naming the offending entry.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import yaml

from .errors import ConfigError
from .model import DeviceParams
from .oracle import OracleConfig, OraclePoint
from .response import DEFAULT_PHASES
from .results import ResultFormat
from .sweep import (
    CALIBRATION_PROBE_POINTS,
    REFERENCE_DBM,
    RESONANT,
    Axis,
    AxisKind,
    GridSpec,
    dbm_to_rabi,
)

if TYPE_CHECKING:
    from typing import TypeVar

    T = TypeVar("T")
    from collections.abc import Callable, Iterable, Mapping
    from typing import Any, Self

    import numpy.typing as npt

_EXCLUSIVE_PUMP = "give either pump.rabi or pump.power_dbm + pump.k, not both"


def _mapping(value: Any, name: str) -> Mapping[str, Any]:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(name, f"must be a mapping, got {type(value).__name__}")
    return value


def _reject_unknown(
    block: Mapping[str, Any], name: str, allowed: Iterable[str]
) -> None:
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise ConfigError(f"{name}.{unknown[0]}", "unknown key")


def _number(block: Mapping[str, Any], name: str, key: str, default: Any = None) -> Any:
    value = block.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int | float):
        raise ConfigError(f"{name}.{key}", f"expected a number, got {value!r}")
    return float(value)


def _integer(block: Mapping[str, Any], name: str, key: str, default: Any = None) -> Any:
    value = block.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name}.{key}", f"expected an integer, got {value!r}")
    return value


def _build(cls: Callable[..., T], name: str, fields: Mapping[str, Any]) -> T:
    """
    Construct `cls`, turning its ValueError into a ConfigError on the field the
      message starts with
    """
    try:
        return cls(**fields)
    except ConfigError:
        raise
    except ValueError as err:
        message = str(err)
        key = next((key for key in fields if message.startswith(key)), None)
        raise ConfigError(f"{name}.{key}" if key else name, message) from err


def _device(block: Mapping[str, Any]) -> DeviceParams:
    allowed = [f.name for f in dataclasses.fields(DeviceParams)]
    _reject_unknown(block, "device", allowed)
    fields = {
        key: _integer(block, "device", key)
        if key == "n_levels"
        else _number(block, "device", key)
        for key in allowed
        if key in block
    }
    return _build(DeviceParams, "device", fields)


@dataclass(frozen=True, kw_only=True)
class PumpConfig:
    """
    Attributes:
        omega_pump (float | str)  : GHz, or "resonant" for ω₁₀ of the device
        rabi       (None | float) : Ω/2π, MHz
        power_dbm  (None | float) : Power at the device, dBm
        k          (None | float) : MHz per √W
    """

    omega_pump: float | str = RESONANT
    rabi: None | float = None
    power_dbm: None | float = None
    k: None | float = None

    @classmethod
    def from_mapping(cls, block: Mapping[str, Any]) -> Self:
        _reject_unknown(block, "pump", ["omega_pump", "rabi", "power_dbm", "k"])
        omega_pump = block.get("omega_pump", RESONANT)
        if omega_pump != RESONANT:
            omega_pump = _number(block, "pump", "omega_pump")
            if omega_pump <= 0:
                raise ConfigError("pump.omega_pump", "must be positive or 'resonant'")
        rabi = _number(block, "pump", "rabi")
        power_dbm = _number(block, "pump", "power_dbm")
        k = _number(block, "pump", "k")
        if rabi is not None and (power_dbm is not None or k is not None):
            raise ConfigError("pump.rabi", _EXCLUSIVE_PUMP)
        if rabi is not None and rabi < 0:
            raise ConfigError("pump.rabi", f"must be non-negative, got {rabi}")
        if power_dbm is not None and k is None:
            raise ConfigError("pump.k", "pump.power_dbm needs a calibration constant k")
        if k is not None and k <= 0:
            raise ConfigError("pump.k", f"must be positive, got {k}")
        return cls(omega_pump=omega_pump, rabi=rabi, power_dbm=power_dbm, k=k)

    def omega_pump_for(self, device: DeviceParams) -> float:
        return device.omega10 if self.omega_pump == RESONANT else float(self.omega_pump)

    def resolved_rabi(self) -> float:
        """
        Ω/2π in MHz, from `rabi` or from `power_dbm` and `k`
        """
        if self.rabi is not None:
            return self.rabi
        if self.power_dbm is not None and self.k is not None:
            return dbm_to_rabi(self.power_dbm, self.k)
        raise ConfigError(
            "pump.rabi", "either pump.rabi or pump.power_dbm + pump.k is required"
        )


def _axis(
    block: Mapping[str, Any], name: str, kind: AxisKind, defaults: Mapping[str, Any]
) -> Axis:
    fields = {
        "kind": kind,
        "start": _number(block, name, "start", defaults["start"]),
        "stop": _number(block, name, "stop", defaults["stop"]),
        "points": _integer(block, name, "points", defaults["points"]),
    }
    return _build(Axis, name, fields)


@dataclass(frozen=True, kw_only=True)
class CalibrateConfig:
    rabi_start: float = 10.0
    rabi_stop: float = 400.0
    rabi_points: int = 40
    reference_dbm: float = REFERENCE_DBM
    probe_points: int = CALIBRATION_PROBE_POINTS

    def __post_init__(self) -> None:
        if not 0 < self.rabi_start < self.rabi_stop:
            raise ValueError(
                "rabi_start must be positive and below rabi_stop, "
                f"got {self.rabi_start}"
            )
        if self.rabi_points < 2:
            raise ValueError(f"rabi_points must be at least 2, got {self.rabi_points}")
        if self.probe_points < 3:
            raise ValueError(
                f"probe_points must be at least 3, got {self.probe_points}"
            )

    @property
    def rabis(self) -> npt.NDArray[np.float64]:
        return np.linspace(self.rabi_start, self.rabi_stop, self.rabi_points)


@dataclass(frozen=True, kw_only=True)
class OutputConfig:
    path: None | Path = None
    format: ResultFormat = ResultFormat.CSV
    include_complex: bool = True


@dataclass(frozen=True, kw_only=True)
class EngineConfig:
    n_phases: int = DEFAULT_PHASES
    workers: None | int = None


_PROBE_DEFAULTS = {"start": 4.2, "stop": 5.0, "points": 201}
_SWEEP_DEFAULTS = {
    AxisKind.PUMP_POWER_DBM: {"start": -130.0, "stop": -105.0, "points": 101},
    AxisKind.PUMP_RABI: {"start": 0.0, "stop": 400.0, "points": 101},
    AxisKind.PUMP_FREQ: {"start": 4.0, "stop": 5.0, "points": 101},
    AxisKind.FLUX_RATIO: {"start": -0.3, "stop": 0.3, "points": 101},
}


@dataclass(frozen=True, kw_only=True)
class RunConfig:
    device: DeviceParams = field(default_factory=DeviceParams)
    pump: PumpConfig = field(default_factory=PumpConfig)
    probe: Axis = field(
        default_factory=lambda: Axis(kind=AxisKind.PROBE_FREQ, **_PROBE_DEFAULTS)
    )
    sweep: Axis = field(
        default_factory=lambda: Axis(
            kind=AxisKind.PUMP_POWER_DBM, **_SWEEP_DEFAULTS[AxisKind.PUMP_POWER_DBM]
        )
    )
    calibrate: CalibrateConfig = field(default_factory=CalibrateConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    oracle_points: None | tuple[OraclePoint, ...] = None
    output: OutputConfig = field(default_factory=OutputConfig)
    engine: EngineConfig = field(default_factory=EngineConfig)

    @classmethod
    def from_mapping(cls, data: Any) -> Self:
        data = _mapping(data, "config")
        blocks = [
            "device",
            "pump",
            "probe",
            "sweep",
            "calibrate",
            "oracle",
            "output",
            "engine",
        ]
        _reject_unknown(data, "config", blocks)
        device = _device(_mapping(data.get("device"), "device"))
        pump = PumpConfig.from_mapping(_mapping(data.get("pump"), "pump"))

        probe_block = _mapping(data.get("probe"), "probe")
        _reject_unknown(probe_block, "probe", _PROBE_DEFAULTS)
        probe = _axis(probe_block, "probe", AxisKind.PROBE_FREQ, _PROBE_DEFAULTS)

        sweep_block = _mapping(data.get("sweep"), "sweep")
        _reject_unknown(sweep_block, "sweep", ["axis", *_PROBE_DEFAULTS])
        try:
            kind = AxisKind(sweep_block.get("axis", AxisKind.PUMP_POWER_DBM.value))
        except ValueError:
            raise ConfigError(
                "sweep.axis", f"unknown axis {sweep_block.get('axis')!r}"
            ) from None
        if kind is AxisKind.PROBE_FREQ:
            raise ConfigError("sweep.axis", "the probe frequency is always the x axis")
        sweep = _axis(sweep_block, "sweep", kind, _SWEEP_DEFAULTS[kind])

        calibrate_block = _mapping(data.get("calibrate"), "calibrate")
        calibrate_fields = [f.name for f in dataclasses.fields(CalibrateConfig)]
        _reject_unknown(calibrate_block, "calibrate", calibrate_fields)
        calibrate = _build(
            CalibrateConfig,
            "calibrate",
            {
                key: _integer(calibrate_block, "calibrate", key)
                if key.endswith("_points")
                else _number(calibrate_block, "calibrate", key)
                for key in calibrate_fields
                if key in calibrate_block
            },
        )

        oracle, oracle_points = _oracle(_mapping(data.get("oracle"), "oracle"))
        return cls(
            device=device,
            pump=pump,
            probe=probe,
            sweep=sweep,
            calibrate=calibrate,
            oracle=oracle,
            oracle_points=oracle_points,
            output=_output(_mapping(data.get("output"), "output")),
            engine=_engine(_mapping(data.get("engine"), "engine")),
        )

    def grid_spec(self) -> GridSpec:
        """
        The 2D sweep of `sweep` against the probe axis
        """
        kind = self.sweep.kind
        rabi = None
        if kind in (AxisKind.PUMP_FREQ, AxisKind.FLUX_RATIO):
            rabi = self.pump.resolved_rabi()
        if kind is AxisKind.PUMP_POWER_DBM and self.pump.k is None:
            raise ConfigError("pump.k", "a pump_power_dbm sweep needs pump.k")
        if kind is AxisKind.PUMP_FREQ and self.pump.omega_pump != RESONANT:
            raise ConfigError("pump.omega_pump", "set by the pump_freq sweep axis")
        return _build(
            GridSpec,
            "sweep",
            {
                "device": self.device,
                "x_axis": self.probe,
                "y_axis": self.sweep,
                "omega_pump": self.pump.omega_pump,
                "rabi": rabi,
                "k": self.pump.k,
                "n_phases": self.engine.n_phases,
            },
        )


def _oracle(
    block: Mapping[str, Any],
) -> tuple[OracleConfig, None | tuple[OraclePoint, ...]]:
    allowed = [f.name for f in dataclasses.fields(OracleConfig)]
    _reject_unknown(block, "oracle", [*allowed, "points"])
    fields: dict[str, Any] = {}
    for key in allowed:
        if key not in block:
            continue
        match key:
            case "sample_window" | "samples_per_period" | "max_windows":
                fields[key] = _integer(block, "oracle", key)
            case "check_linearity":
                if not isinstance(block[key], bool):
                    raise ConfigError(
                        "oracle.check_linearity", "expected true or false"
                    )
                fields[key] = block[key]
            case _:
                fields[key] = _number(block, "oracle", key)
    cfg = _build(OracleConfig, "oracle", fields)

    raw_points = block.get("points")
    if raw_points is None:
        return cfg, None
    if not isinstance(raw_points, list) or not raw_points:
        raise ConfigError("oracle.points", "expected a non-empty list")
    points: list[OraclePoint] = []
    for i, raw in enumerate(raw_points):
        name = f"oracle.points[{i}]"
        point = _mapping(raw, name)
        _reject_unknown(point, name, ["rabi", "omega_p"])
        rabi = _number(point, name, "rabi")
        omega_p = _number(point, name, "omega_p")
        if rabi is None or omega_p is None:
            raise ConfigError(name, "needs both rabi and omega_p")
        if rabi < 0:
            raise ConfigError(f"{name}.rabi", f"must be non-negative, got {rabi}")
        points.append(OraclePoint(rabi=rabi, omega_p=omega_p))
    return cfg, tuple(points)


def _output(block: Mapping[str, Any]) -> OutputConfig:
    _reject_unknown(block, "output", ["path", "format", "include_complex"])
    path = block.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("output.path", f"expected a string, got {path!r}")
    try:
        fmt = ResultFormat(block.get("format", ResultFormat.CSV.value))
    except ValueError:
        raise ConfigError(
            "output.format", f"must be csv or json, got {block.get('format')!r}"
        ) from None
    include_complex = block.get("include_complex", True)
    if not isinstance(include_complex, bool):
        raise ConfigError("output.include_complex", "expected true or false")
    return OutputConfig(
        path=None if path is None else Path(path),
        format=fmt,
        include_complex=include_complex,
    )


def _engine(block: Mapping[str, Any]) -> EngineConfig:
    _reject_unknown(block, "engine", ["n_phases", "workers"])
    n_phases = _integer(block, "engine", "n_phases", DEFAULT_PHASES)
    if n_phases < 1:
        raise ConfigError("engine.n_phases", f"must be at least 1, got {n_phases}")
    workers = _integer(block, "engine", "workers")
    if workers is not None and workers < 1:
        raise ConfigError("engine.workers", f"must be at least 1, got {workers}")
    return EngineConfig(n_phases=n_phases, workers=workers)


def load_config(path: None | Path | str = None) -> RunConfig:
    """
    Read a YAML run configuration; no path means all defaults.
    Raises:
        ConfigError: Unreadable file or invalid content
    """
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        with path.open("r") as f:
            data = yaml.safe_load(f)
    except OSError as err:
        raise ConfigError("config", f"cannot read {path}: {err.strerror}") from err
    except yaml.YAMLError as err:
        raise ConfigError("config", f"invalid YAML in {path}: {err}") from err
    return RunConfig.from_mapping(data)
