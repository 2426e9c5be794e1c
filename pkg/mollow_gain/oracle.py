# pyright: reportMissingTypeStubs=false
"""
Two-tone time-domain simulation used to cross-check the linear-response pipeline.

The weak probe enters the pump frame as
  H_p(t) = -i(Ω_p/2)(Σ₊e^{-i(δt - θ)} - Σ₋e^{i(δt - θ)}),
the state is stepped with piecewise-constant generators, and the coherent response
of <Σ₋(t)> at e^{-iδt} is demodulated over whole probe periods.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cache
from math import ceil
from typing import TYPE_CHECKING

import numpy as np

from .errors import ConvergenceFailure, LinearityViolation
from .lindblad import build_liouvillian, commutator, propagator, steady_state, vec
from .model import TWO_PI, DeviceParams, build_pump_frame_model, mhz_to_angular
from .response import (
    DEFAULT_PHASES,
    phase_averaged_reflection,
    two_level_mirror_reflection,
)
from .sweep import ordered_map

if TYPE_CHECKING:
    from typing import TypeAlias
    from collections.abc import Iterable
    from typing import Self

    import numpy.typing as npt

    from .lindblad import Liouvillian
    from .model import PumpFrameModel

    _ComplexArray: TypeAlias = npt.NDArray[np.complex128]

logger = logging.getLogger(__name__)

MAX_PROBE_FRACTION = 1 / 50
LINEARITY_TOL = 1e-3
AGREEMENT_TOL = 1e-3
DC_PHASES = 4


@dataclass(frozen=True, kw_only=True)
class OracleConfig:
    """
    Attributes:
        probe_rabi         (float): Ω_p/2π, MHz; at most γ/50
        settle_time        (float): Evolution before demodulation, in units of 1/γ
        sample_window      (int)  : Demodulation window, in probe periods
        samples_per_period (int)  : Piecewise-constant steps per probe period
        drift_tolerance    (float): Allowed change of r between consecutive windows
        max_windows        (int)  : Windows tried before giving up on convergence
        relative_phase     (float): Probe phase θ relative to the pump, rad
        check_linearity    (bool) : Re-run at 2Ω_p and compare
    """

    probe_rabi: float = 0.1
    settle_time: float = 20.0
    sample_window: int = 2
    samples_per_period: int = 256
    drift_tolerance: float = 1e-4
    max_windows: int = 8
    relative_phase: float = 0.0
    check_linearity: bool = False

    def __post_init__(self) -> None:
        if self.probe_rabi <= 0:
            raise ValueError(f"probe_rabi must be positive, got {self.probe_rabi}")
        if self.settle_time < 10:
            raise ValueError(f"settle_time must be at least 10, got {self.settle_time}")
        if self.sample_window < 1:
            raise ValueError(
                f"sample_window must be at least one period, got {self.sample_window}"
            )
        if self.samples_per_period < 16:
            raise ValueError(
                f"samples_per_period must be at least 16, got {self.samples_per_period}"
            )
        if self.max_windows < 2:
            raise ValueError(f"max_windows must be at least 2, got {self.max_windows}")

    def with_probe(self, probe_rabi: float) -> Self:
        return type(self)(
            probe_rabi=probe_rabi,
            settle_time=self.settle_time,
            sample_window=self.sample_window,
            samples_per_period=self.samples_per_period,
            drift_tolerance=self.drift_tolerance,
            max_windows=self.max_windows,
            relative_phase=self.relative_phase,
            check_linearity=False,
        )


# Undriven two-level device the input-output constant is fixed on
CALIBRATION_DEVICE = DeviceParams(n_levels=2)


def _probe_operator(model: PumpFrameModel, amplitude: complex) -> _ComplexArray:
    """
    -i(Ω_p/2)(Σ₊a - Σ₋a*) for a complex drive amplitude a
    """
    drive = model.sigma_plus * amplitude
    return -1j * (drive - drive.conj().T)


@dataclass(kw_only=True)
class _TwoToneRun:
    """
    Mutable stepping state of one two-tone evolution.
    """

    liouvillian: Liouvillian
    model: PumpFrameModel
    cfg: OracleConfig
    delta: float
    probe: float
    step_propagators: list[_ComplexArray] = field(init=False)
    sample_phases: _ComplexArray = field(init=False)
    readout: _ComplexArray = field(init=False)

    def __post_init__(self) -> None:
        n_steps = self.cfg.samples_per_period
        dt = self.period / n_steps
        starts = np.arange(n_steps) * dt
        # Zero-order-hold compensation keeps the fundamental of the stepped drive at
        #   unit amplitude
        hold_gain = np.sinc(self.delta * dt / TWO_PI)
        amplitudes = (
            (self.probe / 2)
            * np.exp(-1j * (self.delta * (starts + dt / 2) - self.cfg.relative_phase))
            / hold_gain
        )
        self.step_propagators = [
            propagator(
                self.liouvillian + commutator(_probe_operator(self.model, a)), dt
            )
            for a in amplitudes
        ]
        self.sample_phases = np.exp(
            1j * (self.delta * starts - self.cfg.relative_phase)
        )
        self.readout = vec(self.model.sigma_minus.T)

    @property
    def period(self) -> float:
        return TWO_PI / abs(self.delta)

    def period_propagator(self) -> _ComplexArray:
        total = np.eye(self.step_propagators[0].shape[0], dtype=np.complex128)
        for step in self.step_propagators:
            total = step @ total
        return total

    def demodulate(self, state: _ComplexArray) -> tuple[_ComplexArray, complex]:
        """
        Step through `sample_window` periods and return the final state and the
          demodulated amplitude of <Σ₋> at e^{-iδt}
        """
        accumulated = 0j
        for _ in range(self.cfg.sample_window):
            for step, phase in zip(
                self.step_propagators, self.sample_phases, strict=True
            ):
                accumulated += (self.readout @ state) * phase
                state = step @ state
        samples = self.cfg.sample_window * self.cfg.samples_per_period
        return state, accumulated / samples


def _dc_amplitude(
    liouvillian: Liouvillian, model: PumpFrameModel, cfg: OracleConfig, probe: float
) -> complex:
    """
    δ = 0: static probe at several relative phases, shift of <Σ₋> demodulated in
      phase
    """
    baseline = steady_state(liouvillian).expect(model.sigma_minus)
    accumulated = 0j
    for j in range(DC_PHASES):
        theta = cfg.relative_phase + TWO_PI * j / DC_PHASES
        amplitude = (probe / 2) * np.exp(1j * theta)
        shifted = steady_state(
            liouvillian + commutator(_probe_operator(model, amplitude))
        )
        accumulated += (shifted.expect(model.sigma_minus) - baseline) * np.exp(
            -1j * theta
        )
    return accumulated / DC_PHASES


def _response_amplitude(
    params: DeviceParams,
    omega_pump: float,
    rabi: float,
    omega_p: float,
    cfg: OracleConfig,
    scale: complex,
) -> complex:
    """
    a(δ)/Ω_p with Ω_p angular; `scale` converts changes of it into changes of r for
      the convergence test
    """
    model = build_pump_frame_model(params, omega_pump, rabi)
    liouvillian = build_liouvillian(model, params)
    probe = mhz_to_angular(cfg.probe_rabi)
    gamma = mhz_to_angular(params.gamma)
    delta = TWO_PI * (omega_p - omega_pump)
    if delta == 0:
        return _dc_amplitude(liouvillian, model, cfg, probe) / probe

    run = _TwoToneRun(
        liouvillian=liouvillian,
        model=model,
        cfg=cfg,
        delta=delta,
        probe=probe,
    )
    state = vec(steady_state(liouvillian).data)
    settle_periods = ceil(cfg.settle_time / gamma / run.period)
    state = np.linalg.matrix_power(run.period_propagator(), settle_periods) @ state

    state, previous = run.demodulate(state)
    for _ in range(cfg.max_windows - 1):
        state, current = run.demodulate(state)
        drift = abs(scale * (current - previous)) / probe
        if drift <= cfg.drift_tolerance:
            return current / probe
        previous = current
    raise ConvergenceFailure(
        f"Demodulated response still drifting by {drift:.3g} at ω_p = {omega_p} GHz"
    )


@cache
def calibration_constant(cfg: OracleConfig) -> complex:
    """
    Input-output constant C in r = 1 + C·Γ₁·a/Ω_p, fixed once on the undriven
      two-level atom two linewidths above resonance
    """
    params = CALIBRATION_DEVICE
    omega_p = params.omega10 + 2 * params.gamma * 1e-3
    gamma1 = mhz_to_angular(params.gamma1)
    amplitude = _response_amplitude(
        params, params.omega10, 0.0, omega_p, cfg, scale=2 * gamma1
    )
    target = complex(two_level_mirror_reflection(params, omega_p))
    constant = (target - 1) / (gamma1 * amplitude)
    logger.info(
        "Oracle input-output constant C = %.6g%+.6gj", constant.real, constant.imag
    )
    return constant


def two_tone_reflection(
    params: DeviceParams,
    omega_pump: float,
    rabi: float,
    omega_p: float,
    cfg: OracleConfig | None = None,
) -> complex:
    """
    Reflection coefficient of a weak probe at `omega_p` (GHz) from explicit two-tone
      time evolution.
    Raises:
        LinearityViolation: r moves by more than 1e-3 when Ω_p is doubled
        ConvergenceFailure: demodulated amplitude not settled
    """
    if cfg is None:
        cfg = OracleConfig()
    if cfg.probe_rabi > MAX_PROBE_FRACTION * params.gamma:
        raise ValueError(
            f"probe_rabi = {cfg.probe_rabi} MHz exceeds γ/50 = "
            f"{MAX_PROBE_FRACTION * params.gamma:.3g} MHz"
        )
    constant = calibration_constant(cfg.with_probe(cfg.probe_rabi))
    gamma1 = mhz_to_angular(params.gamma1)
    scale = constant * gamma1
    r = 1 + scale * _response_amplitude(params, omega_pump, rabi, omega_p, cfg, scale)
    if cfg.check_linearity:
        doubled = cfg.with_probe(2 * cfg.probe_rabi)
        r_doubled = 1 + scale * _response_amplitude(
            params, omega_pump, rabi, omega_p, doubled, scale
        )
        if abs(r_doubled - r) > LINEARITY_TOL:
            raise LinearityViolation(
                f"Doubling Ω_p changes r by {abs(r_doubled - r):.3g} at ω_p = {omega_p}"
            )
    return complex(r)


@dataclass(frozen=True, kw_only=True)
class OraclePoint:
    """
    Attributes:
        rabi    (float): Ω_pump/2π, MHz
        omega_p (float): Probe frequency, GHz
    """

    rabi: float
    omega_p: float


@dataclass(frozen=True, kw_only=True)
class OracleComparison:
    point: OraclePoint
    r_response: complex
    r_oracle: complex

    @property
    def deviation(self) -> float:
        return abs(self.r_response - self.r_oracle)

    def passed(self, tolerance: float = AGREEMENT_TOL) -> bool:
        return self.deviation < tolerance


def default_sample(omega_pump: float) -> list[OraclePoint]:
    """
    20 (Ω, ω_p) points covering the strong-drive box around a pump at `omega_pump`,
      probe detunings within ±1.5Ω
    """
    fractions = {
        50.0: (-1.25, -0.75, -0.25, 0.5, 1.0, 1.5),
        100.0: (-1.5, -1.0, -0.5, 0.25, 0.75, 1.25, 1.5),
        200.0: (-1.5, -1.0, -0.5, 0.25, 0.75, 1.25, 1.5),
    }
    return [
        OraclePoint(rabi=rabi, omega_p=omega_pump + fraction * rabi * 1e-3)
        for rabi, rabi_fractions in fractions.items()
        for fraction in rabi_fractions
    ]


@dataclass(frozen=True, kw_only=True)
class _ComparisonTask:
    params: DeviceParams
    omega_pump: float
    point: OraclePoint
    cfg: OracleConfig
    n_phases: int


def _compare_point(task: _ComparisonTask) -> OracleComparison:
    point = task.point
    return OracleComparison(
        point=point,
        r_response=phase_averaged_reflection(
            task.params, task.omega_pump, point.rabi, point.omega_p, task.n_phases
        ),
        r_oracle=two_tone_reflection(
            task.params, task.omega_pump, point.rabi, point.omega_p, task.cfg
        ),
    )


def compare_with_response(
    params: DeviceParams,
    omega_pump: float,
    points: Iterable[OraclePoint],
    cfg: OracleConfig | None = None,
    *,
    n_phases: int = DEFAULT_PHASES,
    workers: int = 1,
) -> list[OracleComparison]:
    """
    Evaluate both the linear-response pipeline and the two-tone simulation at each
      point, in input order
    """
    if cfg is None:
        cfg = OracleConfig()
    tasks = [
        _ComparisonTask(
            params=params,
            omega_pump=omega_pump,
            point=point,
            cfg=cfg,
            n_phases=n_phases,
        )
        for point in points
    ]
    comparisons = ordered_map(_compare_point, tasks, workers)
    for comparison in comparisons:
        log = logger.info if comparison.passed() else logger.warning
        log(
            "Ω/2π = %g MHz, ω_p = %.6f GHz: |Δr| = %.3g",
            comparison.point.rabi,
            comparison.point.omega_p,
            comparison.deviation,
        )
    return comparisons
