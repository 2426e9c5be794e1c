# pyright: reportMissingTypeStubs=false
"""
Batch commands behind `run.py`. Each command registers itself under its name and
aliases when subclassed.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from .errors import ConfigError
from .oracle import AGREEMENT_TOL, compare_with_response, default_sample
from .plotting import Visualizer, figure_path
from .response import spectrum
from .results import (
    ResultFormat,
    max_deviation,
    write_calibration,
    write_grid,
    write_oracle_table,
    write_spectrum,
)
from .sweep import calibrate, default_workers, run_grid

if TYPE_CHECKING:
    from typing import Any, ClassVar

    from .config import RunConfig

logger = logging.getLogger(__name__)

RESULTS_DIR = Path("results")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ORACLE_MISMATCH = 4

COMMANDS: dict[str, type[CommandAbstract]] = {}


@dataclass(kw_only=True)
class CommandOutcome:
    """
    Attributes:
        summary   (list[str])          : Lines echoed to the console
        files     (list[pathlib.Path]) : Files written
        exit_code (int)                : Process exit status
    """

    summary: list[str] = field(default_factory=list)
    files: list[Path] = field(default_factory=list)
    exit_code: int = EXIT_OK


class CommandAbstract(ABC):
    name: ClassVar[str]
    aliases: ClassVar[list[str]]
    can_visualize: ClassVar[bool] = False
    config: RunConfig
    out: None | Path
    fmt: ResultFormat
    workers: int
    visualize: bool

    def __init__(
        self,
        config: RunConfig,
        *,
        out: None | Path = None,
        fmt: None | ResultFormat = None,
        workers: None | int = None,
        visualize: bool = False,
    ) -> None:
        self.config = config
        self.out = out
        self.fmt = fmt or config.output.format
        self.workers = workers or config.engine.workers or default_workers()
        if self.workers < 1:
            raise ConfigError("workers", f"must be at least 1, got {self.workers}")
        self.visualize = visualize

    def __init_subclass__(cls, *, name: str, aliases: list[str], **kwargs: Any) -> None:
        cls.name = name
        cls.aliases = aliases
        for key in (name, *aliases):
            if key in COMMANDS:
                raise ValueError(f"Command name {key!r} registered twice")
            COMMANDS[key] = cls
        super().__init_subclass__(**kwargs)

    def _output_path(self) -> Path:
        """
        --out, then output.path, then results/<command>.<format>; the suffix always
          follows the format
        """
        path = self.out or self.config.output.path or RESULTS_DIR / self.name
        path = path.with_suffix(f".{self.fmt.value}")
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
        except OSError as err:
            raise ConfigError("output.path", f"cannot create {path.parent}") from err
        if path.exists() and not path.is_file():
            raise ConfigError("output.path", f"{path} is not a file")
        return path

    @abstractmethod
    def run(self) -> CommandOutcome:
        raise NotImplementedError()


class SpectrumCommand(CommandAbstract, name="spectrum", aliases=["sp", "spec"]):
    """
    One probe-frequency spectrum at a fixed pump
    """

    can_visualize = True

    def run(self) -> CommandOutcome:
        cfg = self.config
        result = spectrum(
            cfg.device,
            cfg.pump.omega_pump_for(cfg.device),
            cfg.pump.resolved_rabi(),
            cfg.probe.values,
            cfg.engine.n_phases,
        )
        path = write_spectrum(
            result,
            self._output_path(),
            self.fmt,
            include_complex=cfg.output.include_complex,
        )
        files = [path]
        with Visualizer(dry_run=not self.visualize) as vis:
            vis.add_spectrum(result, figure_path(path))
        if self.visualize:
            files.append(figure_path(path))

        bands = result.gain_bands()
        summary = [
            f"min |r| = {result.min_abs:.6f}, max |r| = {result.max_abs:.6f}",
            "Gain bands: "
            + (
                ", ".join(f"{start:.6f}-{stop:.6f} GHz" for start, stop in bands)
                if bands
                else "none"
            ),
        ]
        return CommandOutcome(summary=summary, files=files)


class Sweep2dCommand(CommandAbstract, name="sweep2d", aliases=["sw", "grid"]):
    """
    |r| over probe frequency against a pump or flux axis
    """

    can_visualize = True

    def run(self) -> CommandOutcome:
        cfg = self.config
        grid = run_grid(cfg.grid_spec(), workers=self.workers)
        files = write_grid(
            grid,
            self._output_path(),
            self.fmt,
            include_complex=cfg.output.include_complex,
        )
        with Visualizer(dry_run=not self.visualize) as vis:
            vis.add_grid(grid, figure_path(files[0]))
        if self.visualize:
            files.append(figure_path(files[0]))

        values = grid.values
        finite = values[np.isfinite(values)]
        summary = [
            f"{values.shape[0]} x {values.shape[1]} grid, "
            f"max |r| = {finite.max(initial=0.0):.6f}, "
            f"{int(np.count_nonzero(finite > 1))} cells with gain",
        ]
        if grid.errors:
            summary.append(f"{len(grid.errors)} grid points failed (NaN in the output)")
        return CommandOutcome(summary=summary, files=files)


class CalibrateCommand(CommandAbstract, name="calibrate", aliases=["c", "cal"]):
    """
    Rabi frequency of maximum gain and the matching power calibration constant
    """

    def run(self) -> CommandOutcome:
        cfg = self.config
        result = calibrate(
            cfg.device,
            cfg.calibrate.rabis,
            omega_pump=cfg.pump.omega_pump,
            reference_dbm=cfg.calibrate.reference_dbm,
            probe_points=cfg.calibrate.probe_points,
            n_phases=cfg.engine.n_phases,
            workers=self.workers,
        )
        path = write_calibration(
            result, self._output_path(), self.fmt, device=cfg.device.to_mapping()
        )
        summary = [
            f"Ω*/2π = {result.rabi_star:.6g} MHz",
            f"k = {result.k:.6g} MHz/√W at {result.reference_dbm:g} dBm",
            f"max |r| = {result.max_gain:.6f}",
        ]
        return CommandOutcome(summary=summary, files=[path])


class OracleCheckCommand(CommandAbstract, name="oracle-check", aliases=["o", "oracle"]):
    """
    Linear response against the two-tone time-domain simulation
    """

    def run(self) -> CommandOutcome:
        cfg = self.config
        omega_pump = cfg.pump.omega_pump_for(cfg.device)
        points = cfg.oracle_points or default_sample(omega_pump)
        comparisons = compare_with_response(
            cfg.device,
            omega_pump,
            points,
            cfg.oracle,
            n_phases=cfg.engine.n_phases,
            workers=self.workers,
        )
        path = write_oracle_table(
            comparisons,
            self._output_path(),
            self.fmt,
            metadata={"device": cfg.device.to_mapping(), "omega_pump": omega_pump},
        )
        failed = [c for c in comparisons if not c.passed()]
        summary = [
            f"{len(comparisons) - len(failed)}/{len(comparisons)} points agree within "
            f"{AGREEMENT_TOL:g}, largest |Δr| = {max_deviation(comparisons):.3g}"
        ]
        return CommandOutcome(
            summary=summary,
            files=[path],
            exit_code=EXIT_ORACLE_MISMATCH if failed else EXIT_OK,
        )
