# pyright: reportMissingTypeStubs=false
"""
Static PNG figures of spectra and sweep grids
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np
from matplotlib.colors import TwoSlopeNorm
from matplotlib.figure import Figure

from .overlays import overlays_for

if TYPE_CHECKING:
    from pathlib import Path
    from types import TracebackType
    from typing import Self

    from .response import ReflectionSpectrum
    from .sweep import SweepGrid

logger = logging.getLogger(__name__)

_DPI = 150
_OVERLAY_STYLES = {
    "triplet": {"color": "white", "linestyle": "--", "linewidth": 0.8},
    "inner": {"color": "black", "linestyle": ":", "linewidth": 0.8},
    "autler_townes": {"color": "tab:orange", "linestyle": "-.", "linewidth": 0.8},
    "omega": {"color": "tab:gray", "linestyle": "-", "linewidth": 0.6},
    "idler": {"color": "tab:green", "linestyle": (0, (1, 3)), "linewidth": 0.8},
}


def figure_path(result_path: Path) -> Path:
    return result_path.with_suffix(".png")


class Visualizer:
    """
    Collects figures during a command and writes them on exit. Does nothing when
    created with `dry_run`.
    """

    figures: list[tuple[Figure, Path]]
    can_run: bool

    def __init__(self, *, dry_run: bool = False) -> None:
        self.figures = []
        self.can_run = not dry_run

    def __enter__(self) -> Self:
        return self

    def __exit__(
        self,
        exc: type[BaseException] | None,
        value: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        if exc is None:
            self.save_all()

    def save_all(self) -> list[Path]:
        written: list[Path] = []
        for figure, path in self.figures:
            figure.savefig(path, dpi=_DPI)
            logger.info("Figure written to %s", path)
            written.append(path)
        self.figures = []
        return written

    def add_spectrum(self, spectrum: ReflectionSpectrum, path: Path) -> None:
        if not self.can_run:
            return
        figure = Figure(figsize=(7, 4), layout="constrained")
        ax = figure.subplots()
        ax.plot(spectrum.probe_freqs, spectrum.magnitudes, color="tab:purple")
        ax.axhline(1.0, color="black", linewidth=0.6)
        if spectrum.rabi > 0:
            overlays = overlays_for(spectrum.device, spectrum.omega_pump, spectrum.rabi)
            for position in overlays.triplet:
                ax.axvline(position, **{**_OVERLAY_STYLES["triplet"], "color": "gray"})
            for position in overlays.inner_boundaries:
                ax.axvline(position, **_OVERLAY_STYLES["inner"])
            if overlays.has_gain_window():
                for start, stop in overlays.gain_windows:
                    ax.axvspan(start, stop, color="tab:purple", alpha=0.1)
        ax.set_xlabel("Probe frequency (GHz)")
        ax.set_ylabel("|r|")
        ax.set_title(
            f"ω_pump = {spectrum.omega_pump:.4f} GHz, Ω/2π = {spectrum.rabi:g} MHz"
        )
        self.figures.append((figure, path))

    def add_grid(self, grid: SweepGrid, path: Path) -> None:
        if not self.can_run:
            return
        figure = Figure(figsize=(7, 5), layout="constrained")
        ax = figure.subplots()
        values = np.ma.masked_invalid(grid.values)
        upper = max(float(values.max()), 1.0 + 1e-6)
        lower = min(float(values.min()), 1.0 - 1e-6)
        mesh = ax.pcolormesh(
            grid.x_values,
            grid.y_values,
            values,
            shading="nearest",
            cmap="PuOr_r",
            norm=TwoSlopeNorm(vcenter=1.0, vmin=lower, vmax=upper),
        )
        figure.colorbar(mesh, ax=ax, label="|r|")
        for name, line in grid.overlay_polylines().items():
            style = _OVERLAY_STYLES[
                next(key for key in _OVERLAY_STYLES if name.startswith(key))
            ]
            ax.plot(line, grid.y_values, **style)
        ax.set_xlim(grid.x_values[0], grid.x_values[-1])
        ax.set_xlabel("Probe frequency (GHz)")
        kind = grid.spec.y_axis.kind
        ax.set_ylabel(f"{kind.value} ({kind.unit})")
        self.figures.append((figure, path))
