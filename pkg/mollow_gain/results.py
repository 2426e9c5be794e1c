# pyright: reportMissingTypeStubs=false
"""
Result files: spectra, sweep grids with their overlay lines, calibration scans and
oracle comparison tables, as CSV or JSON.

CSV files open with `#` comment lines carrying the metadata as JSON, followed by a
plain table. Grid tables are long-form, one row per (y, x) cell in y-major order;
complex r is split into `re_r` and `im_r` columns. The JSON layout carries the same
content with explicit axis arrays. Floats are written in their shortest
round-trip form, so reading a file back reproduces the arrays exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd

from . import __version__

if TYPE_CHECKING:
    from typing import TypeAlias
    from collections.abc import Iterable, Sequence
    from typing import Any

    import numpy.typing as npt

    from .oracle import OracleComparison
    from .response import ReflectionSpectrum
    from .sweep import CalibrationResult, SweepGrid

    _FloatArray: TypeAlias = npt.NDArray[np.float64]
    _ComplexArray: TypeAlias = npt.NDArray[np.complex128]

_METADATA_PREFIX = "# metadata "
_CREATED_PREFIX = "# created "


class ResultFormat(Enum):
    CSV = "csv"
    JSON = "json"

    @classmethod
    def from_path(cls, path: Path) -> ResultFormat:
        try:
            return cls(path.suffix.lstrip(".").lower())
        except ValueError:
            raise ValueError(f"Cannot tell result format from {path.name!r}") from None


def _timestamp() -> str:
    return datetime.now(tz=timezone.utc).isoformat(timespec="seconds")


def _json_floats(values: npt.ArrayLike) -> Any:
    """
    Nested lists with NaN as null
    """
    array = np.asarray(values, dtype=np.float64)
    if array.ndim == 0:
        value = float(array)
        return None if math.isnan(value) else value
    return [_json_floats(item) for item in array]


def _from_json_floats(values: Any) -> _FloatArray:
    if isinstance(values, list):
        return np.array([_from_json_floats(item) for item in values], dtype=np.float64)
    return np.asarray(np.nan if values is None else values, dtype=np.float64)


def _write_csv(table: pd.DataFrame, path: Path, metadata: dict[str, Any]) -> None:
    with path.open("w", newline="") as f:
        f.write(f"{_METADATA_PREFIX}{json.dumps(metadata)}\n")
        f.write(f"{_CREATED_PREFIX}{_timestamp()}\n")
        table.to_csv(f, index=False, lineterminator="\n")


def _read_csv(path: Path) -> tuple[pd.DataFrame, dict[str, Any]]:
    metadata: dict[str, Any] = {}
    with path.open("r") as f:
        for line in f:
            if not line.startswith("#"):
                break
            if line.startswith(_METADATA_PREFIX):
                metadata.update(json.loads(line.removeprefix(_METADATA_PREFIX)))
            elif line.startswith(_CREATED_PREFIX):
                metadata["created"] = line.removeprefix(_CREATED_PREFIX).strip()
    table = pd.read_csv(path, comment="#", float_precision="round_trip")
    return table, metadata


def _write_json(document: dict[str, Any], path: Path, metadata: dict[str, Any]) -> None:
    with path.open("w") as f:
        json.dump({"metadata": {**metadata, "created": _timestamp()}, **document}, f)
        f.write("\n")


def _read_json(path: Path) -> tuple[dict[str, Any], dict[str, Any]]:
    with path.open("r") as f:
        document = json.load(f)
    return document, document.pop("metadata", {})


def _complex_columns(r_values: _ComplexArray) -> dict[str, _FloatArray]:
    return {"re_r": np.real(r_values), "im_r": np.imag(r_values)}


def _join_complex(re: npt.ArrayLike, im: npt.ArrayLike) -> _ComplexArray:
    result = np.empty(np.shape(re), dtype=np.complex128)
    result.real = re
    result.imag = im
    return result


def _resolve(
    path: Path | str, fmt: None | ResultFormat | str
) -> tuple[Path, ResultFormat]:
    path = Path(path)
    if fmt is None:
        return path, ResultFormat.from_path(path)
    return path, ResultFormat(fmt) if isinstance(fmt, str) else fmt


# Spectra


@dataclass(frozen=True, kw_only=True, eq=False)
class SpectrumTable:
    """
    Spectrum as read back from disk; `r_values` is None when only |r| was written
    """

    probe_freqs: _FloatArray
    magnitudes: _FloatArray
    r_values: None | _ComplexArray
    metadata: dict[str, Any] = field(default_factory=dict)


def spectrum_metadata(spectrum: ReflectionSpectrum) -> dict[str, Any]:
    return {
        "kind": "spectrum",
        "code_version": __version__,
        "device": spectrum.device.to_mapping(),
        "omega_pump": spectrum.omega_pump,
        "rabi": spectrum.rabi,
        "n_phases": spectrum.n_phases,
    }


def write_spectrum(
    spectrum: ReflectionSpectrum,
    path: Path | str,
    fmt: None | ResultFormat | str = None,
    *,
    include_complex: bool = True,
) -> Path:
    path, fmt = _resolve(path, fmt)
    metadata = spectrum_metadata(spectrum)
    columns: dict[str, Any] = {
        "probe_freq": spectrum.probe_freqs,
        "abs_r": spectrum.magnitudes,
    }
    if include_complex:
        columns |= _complex_columns(spectrum.r_values)
    match fmt:
        case ResultFormat.CSV:
            _write_csv(pd.DataFrame(columns), path, metadata)
        case ResultFormat.JSON:
            _write_json(
                {name: _json_floats(values) for name, values in columns.items()},
                path,
                metadata,
            )
    return path


def read_spectrum(path: Path | str) -> SpectrumTable:
    path, fmt = _resolve(path, None)
    columns: dict[str, _FloatArray]
    match fmt:
        case ResultFormat.CSV:
            table, metadata = _read_csv(path)
            columns = {name: table[name].to_numpy(dtype=np.float64) for name in table}
        case ResultFormat.JSON:
            document, metadata = _read_json(path)
            columns = {
                name: _from_json_floats(values) for name, values in document.items()
            }
    r_values = (
        _join_complex(columns["re_r"], columns["im_r"]) if "re_r" in columns else None
    )
    return SpectrumTable(
        probe_freqs=columns["probe_freq"],
        magnitudes=columns["abs_r"],
        r_values=r_values,
        metadata=metadata,
    )


# Grids


@dataclass(frozen=True, kw_only=True, eq=False)
class GridTable:
    x_values: _FloatArray
    y_values: _FloatArray
    magnitudes: _FloatArray
    r_values: None | _ComplexArray
    overlays: dict[str, _FloatArray]
    metadata: dict[str, Any] = field(default_factory=dict)


def overlay_path(path: Path) -> Path:
    """
    CSV grids keep their overlay lines in a sibling file
    """
    return path.with_name(f"{path.stem}_overlays{path.suffix}")


def _grid_metadata(grid: SweepGrid) -> dict[str, Any]:
    return {
        "kind": "grid",
        **grid.metadata,
        "errors": [
            {"y_index": e.y_index, "x_index": e.x_index, "message": e.message}
            for e in grid.errors
        ],
    }


def write_grid(
    grid: SweepGrid,
    path: Path | str,
    fmt: None | ResultFormat | str = None,
    *,
    include_complex: bool = True,
) -> list[Path]:
    """
    Returns:
        (list[pathlib.Path]): Files written
    """
    path, fmt = _resolve(path, fmt)
    metadata = _grid_metadata(grid)
    overlays = grid.overlay_polylines()
    match fmt:
        case ResultFormat.CSV:
            y_index, x_index = np.indices(grid.values.shape)
            columns: dict[str, Any] = {
                "y_index": y_index.ravel(),
                "x_index": x_index.ravel(),
                "y": grid.y_values[y_index.ravel()],
                "x": grid.x_values[x_index.ravel()],
                "abs_r": grid.values.ravel(),
            }
            if include_complex:
                columns |= _complex_columns(grid.r_values.ravel())
            _write_csv(pd.DataFrame(columns), path, metadata)
            lines_path = overlay_path(path)
            _write_csv(
                pd.DataFrame({"y": grid.y_values, **overlays}),
                lines_path,
                {"kind": "overlays", "code_version": __version__},
            )
            return [path, lines_path]
        case ResultFormat.JSON:
            document: dict[str, Any] = {
                "x_axis": {
                    **grid.spec.x_axis.to_mapping(),
                    "values": _json_floats(grid.x_values),
                },
                "y_axis": {
                    **grid.spec.y_axis.to_mapping(),
                    "values": _json_floats(grid.y_values),
                },
                "abs_r": _json_floats(grid.values),
            }
            if include_complex:
                document |= {
                    name: _json_floats(values)
                    for name, values in _complex_columns(grid.r_values).items()
                }
            document["overlays"] = {
                name: _json_floats(values) for name, values in overlays.items()
            }
            _write_json(document, path, metadata)
            return [path]


def read_grid(path: Path | str) -> GridTable:
    path, fmt = _resolve(path, None)
    match fmt:
        case ResultFormat.CSV:
            table, metadata = _read_csv(path)
            shape = (int(table["y_index"].max()) + 1, int(table["x_index"].max()) + 1)
            y_values = table["y"].to_numpy(dtype=np.float64)[:: shape[1]]
            x_values = table["x"].to_numpy(dtype=np.float64)[: shape[1]]

            def matrix(name: str) -> _FloatArray:
                return table[name].to_numpy(dtype=np.float64).reshape(shape)

            r_values = (
                _join_complex(matrix("re_r"), matrix("im_r"))
                if "re_r" in table.columns
                else None
            )
            magnitudes = matrix("abs_r")
            overlays = {}
            lines_path = overlay_path(path)
            if lines_path.exists():
                lines, _ = _read_csv(lines_path)
                overlays = {
                    name: lines[name].to_numpy(dtype=np.float64)
                    for name in lines.columns
                    if name != "y"
                }
        case ResultFormat.JSON:
            document, metadata = _read_json(path)
            x_values = _from_json_floats(document["x_axis"]["values"])
            y_values = _from_json_floats(document["y_axis"]["values"])
            magnitudes = _from_json_floats(document["abs_r"])
            r_values = (
                _join_complex(
                    _from_json_floats(document["re_r"]),
                    _from_json_floats(document["im_r"]),
                )
                if "re_r" in document
                else None
            )
            overlays = {
                name: _from_json_floats(values)
                for name, values in document.get("overlays", {}).items()
            }
    return GridTable(
        x_values=x_values,
        y_values=y_values,
        magnitudes=magnitudes,
        r_values=r_values,
        overlays=overlays,
        metadata=metadata,
    )


# Calibration


def write_calibration(
    result: CalibrationResult,
    path: Path | str,
    fmt: None | ResultFormat | str = None,
    *,
    device: None | dict[str, Any] = None,
) -> Path:
    path, fmt = _resolve(path, fmt)
    metadata = {
        "kind": "calibration",
        "code_version": __version__,
        "device": device,
        "rabi_star": result.rabi_star,
        "k": result.k,
        "max_gain": result.max_gain,
        "reference_dbm": result.reference_dbm,
    }
    match fmt:
        case ResultFormat.CSV:
            _write_csv(
                pd.DataFrame({"rabi": result.rabis, "max_abs_r": result.gains}),
                path,
                metadata,
            )
        case ResultFormat.JSON:
            _write_json(
                {
                    "rabi": _json_floats(result.rabis),
                    "max_abs_r": _json_floats(result.gains),
                },
                path,
                metadata,
            )
    return path


def read_calibration(path: Path | str) -> dict[str, Any]:
    """
    Metadata (Ω*, k, max gain, reference power) plus the scanned `rabi` and
      `max_abs_r` arrays
    """
    path, fmt = _resolve(path, None)
    match fmt:
        case ResultFormat.CSV:
            table, metadata = _read_csv(path)
            scan = {name: table[name].to_numpy(dtype=np.float64) for name in table}
        case ResultFormat.JSON:
            document, metadata = _read_json(path)
            scan = {
                name: _from_json_floats(values) for name, values in document.items()
            }
    return {**metadata, **scan}


# Oracle tables


def write_oracle_table(
    comparisons: Sequence[OracleComparison],
    path: Path | str,
    fmt: None | ResultFormat | str = None,
    *,
    metadata: None | dict[str, Any] = None,
) -> Path:
    path, fmt = _resolve(path, fmt)
    columns = {
        "point": np.arange(len(comparisons)),
        "rabi": [c.point.rabi for c in comparisons],
        "omega_p": [c.point.omega_p for c in comparisons],
        "re_r_response": [c.r_response.real for c in comparisons],
        "im_r_response": [c.r_response.imag for c in comparisons],
        "re_r_oracle": [c.r_oracle.real for c in comparisons],
        "im_r_oracle": [c.r_oracle.imag for c in comparisons],
        "abs_delta": [c.deviation for c in comparisons],
    }
    metadata = {"kind": "oracle", "code_version": __version__, **(metadata or {})}
    match fmt:
        case ResultFormat.CSV:
            _write_csv(pd.DataFrame(columns), path, metadata)
        case ResultFormat.JSON:
            _write_json(
                {
                    name: [int(v) for v in values]
                    if name == "point"
                    else _json_floats(values)
                    for name, values in columns.items()
                },
                path,
                metadata,
            )
    return path


def read_oracle_table(path: Path | str) -> pd.DataFrame:
    path, fmt = _resolve(path, None)
    match fmt:
        case ResultFormat.CSV:
            table, _ = _read_csv(path)
            return table
        case ResultFormat.JSON:
            document, _ = _read_json(path)
            return pd.DataFrame(document)


def max_deviation(comparisons: Iterable[OracleComparison]) -> float:
    return max((c.deviation for c in comparisons), default=0.0)
