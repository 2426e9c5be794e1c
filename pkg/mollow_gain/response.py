# pyright: reportMissingTypeStubs=false
"""
Weak-probe linear response of the pumped steady state and the reflection coefficient
r = 1 + Γ₁χ(ω_p).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import groupby
from typing import TYPE_CHECKING

import numpy as np

from .errors import ResolventSingular
from .lindblad import build_liouvillian, steady_state, vec
from .model import TWO_PI, build_pump_frame_model, mhz_to_angular

if TYPE_CHECKING:
    from typing import TypeAlias
    import numpy.typing as npt

    from .lindblad import DensityMatrix, Liouvillian
    from .model import DeviceParams, PumpFrameModel

    _FloatArray: TypeAlias = npt.NDArray[np.float64]
    _ComplexArray: TypeAlias = npt.NDArray[np.complex128]

logger = logging.getLogger(__name__)

DEFAULT_PHASES = 4
SINGULAR_OFFSET = 1e-6


@dataclass(frozen=True, kw_only=True, eq=False)
class ReflectionSpectrum:
    """
    Attributes:
        probe_freqs (numpy.ndarray): Probe frequencies, GHz, strictly increasing
        r_values    (numpy.ndarray): Complex reflection coefficient at each frequency
        omega_pump  (float)        : Pump frequency, GHz
        rabi        (float)        : Ω_pump/2π, MHz
        n_phases    (int)          : Number of pump phases averaged over
        device      (DeviceParams) : Device the spectrum was computed for
    """

    probe_freqs: _FloatArray
    r_values: _ComplexArray
    omega_pump: float
    rabi: float
    n_phases: int
    device: DeviceParams

    def __post_init__(self) -> None:
        probe_freqs = np.array(self.probe_freqs, dtype=np.float64)
        r_values = np.array(self.r_values, dtype=np.complex128)
        if probe_freqs.shape != r_values.shape or probe_freqs.ndim != 1:
            raise ValueError(
                f"{probe_freqs.shape} probe frequencies for {r_values.shape} values"
            )
        if np.any(np.diff(probe_freqs) <= 0):
            raise ValueError("Probe frequencies must be strictly increasing")
        if not np.all(np.isfinite(r_values)):
            raise ValueError("Reflection coefficients must be finite")
        probe_freqs.setflags(write=False)
        r_values.setflags(write=False)
        object.__setattr__(self, "probe_freqs", probe_freqs)
        object.__setattr__(self, "r_values", r_values)

    def __len__(self) -> int:
        return len(self.probe_freqs)

    @property
    def magnitudes(self) -> _FloatArray:
        return np.abs(self.r_values)

    @property
    def max_abs(self) -> float:
        return float(np.max(self.magnitudes))

    @property
    def min_abs(self) -> float:
        return float(np.min(self.magnitudes))

    def gain_bands(self, threshold: float = 1.0) -> list[tuple[float, float]]:
        """
        Contiguous runs of grid points with |r| > `threshold`, as (first, last)
          frequency pairs
        """
        bands: list[tuple[float, float]] = []
        index = 0
        for is_gain, run in groupby(self.magnitudes > threshold):
            length = len(list(run))
            if is_gain:
                bands.append(
                    (
                        float(self.probe_freqs[index]),
                        float(self.probe_freqs[index + length - 1]),
                    )
                )
            index += length
        return bands

    def local_minima(self) -> _FloatArray:
        """
        Frequencies of interior grid points lower than both neighbours
        """
        mags = self.magnitudes
        interior = (mags[1:-1] < mags[:-2]) & (mags[1:-1] < mags[2:])
        return self.probe_freqs[1:-1][interior]


def pump_phases(m_phases: int) -> _FloatArray:
    """
    φ_j = 2πj/M
    """
    if m_phases < 1:
        raise ValueError(f"Need at least one pump phase, got {m_phases}")
    return TWO_PI * np.arange(m_phases) / m_phases


def _coherence_rate(l: Liouvillian) -> float:
    """
    Decay rate of the |0><1| coherence, read off the generator (equals γ)
    """
    n = l.n_levels
    return float(-np.real(l.matrix[n, n]))


def _solve_shifted(
    deflated: _ComplexArray, source: _ComplexArray, deltas: _FloatArray, offset: float
) -> _ComplexArray:
    identity = np.eye(deflated.shape[0])
    systems = deflated[np.newaxis] + 1j * deltas[:, np.newaxis, np.newaxis] * identity
    rhs = np.broadcast_to(source, (len(deltas), source.size))[..., np.newaxis]
    try:
        solutions = np.linalg.solve(systems, rhs)[..., 0]
        if np.all(np.isfinite(solutions)):
            return solutions
    except np.linalg.LinAlgError:
        pass

    # Isolate the offending points
    solutions = np.empty((len(deltas), source.size), dtype=np.complex128)
    for i, delta in enumerate(deltas):
        try:
            solutions[i] = np.linalg.solve(systems[i], source)
        except np.linalg.LinAlgError:
            shifted = delta + (offset if delta >= 0 else -offset)
            logger.warning(
                "Resolvent singular at δ = %.6g rad/ns; offsetting to %.6g",
                delta,
                shifted,
            )
            try:
                solutions[i] = np.linalg.solve(
                    deflated + 1j * shifted * identity, source
                )
            except np.linalg.LinAlgError as err:
                raise ResolventSingular(
                    f"Resolvent singular at δ = {delta:.6g} rad/ns even after offset"
                ) from err
    return solutions


def susceptibilities(
    l: Liouvillian,
    rho_ss: DensityMatrix,
    model: PumpFrameModel,
    omega_ps: npt.ArrayLike,
) -> _ComplexArray:
    """
    χ at each probe frequency in `omega_ps` (GHz), in ns (i.e. per rad/ns).

    The resolvent acts on the traceless source [Σ_p, ρ_ss]; deflating the steady
    state with -γ|ρ_ss><1| leaves the solution unchanged and removes the pole at
    δ = 0. The overall factor i fixes the branch so that the undriven two-level
    atom gives r = 1 - Γ₁/(γ - iΔ).
    """
    omega_ps = np.atleast_1d(np.asarray(omega_ps, dtype=np.float64))
    n = l.n_levels
    gamma = _coherence_rate(l)
    rho = rho_ss.data
    source = vec(model.sigma_p @ rho - rho @ model.sigma_p)
    deflated = l.matrix - gamma * np.outer(vec(rho), vec(np.eye(n)))
    deltas = TWO_PI * (omega_ps - model.omega_pump)
    solutions = _solve_shifted(deflated, source, deltas, SINGULAR_OFFSET * gamma)
    # Tr{Σ₋ Y} = vec(Σ₋ᵀ)·vec(Y)
    return 1j * (solutions @ vec(model.sigma_minus.T))


def susceptibility(
    l: Liouvillian, rho_ss: DensityMatrix, model: PumpFrameModel, omega_p: float
) -> complex:
    """
    Single-frequency `susceptibilities`
    """
    return complex(susceptibilities(l, rho_ss, model, [omega_p])[0])


def reflections(
    params: DeviceParams,
    omega_pump: float,
    rabi: float,
    omega_ps: npt.ArrayLike,
    m_phases: int = DEFAULT_PHASES,
) -> _ComplexArray:
    """
    Pump-phase averaged r at every frequency in `omega_ps`. One steady state per
      phase, shared by all probe frequencies
    """
    if m_phases < 1:
        raise ValueError(f"Need at least one pump phase, got {m_phases}")
    omega_ps = np.atleast_1d(np.asarray(omega_ps, dtype=np.float64))
    # Without a pump every phase gives the same generator
    phases = pump_phases(1 if rabi == 0 else m_phases)
    gamma1 = mhz_to_angular(params.gamma1)
    total = np.zeros(len(omega_ps), dtype=np.complex128)
    for phase in phases:
        model = build_pump_frame_model(params, omega_pump, rabi, float(phase))
        liouvillian = build_liouvillian(model, params)
        rho_ss = steady_state(liouvillian)
        total += 1 + gamma1 * susceptibilities(liouvillian, rho_ss, model, omega_ps)
    return total / len(phases)


def phase_averaged_reflection(
    params: DeviceParams,
    omega_pump: float,
    rabi: float,
    omega_p: float,
    m_phases: int = DEFAULT_PHASES,
) -> complex:
    """
    Reflection coefficient of a weak probe at `omega_p` (GHz), averaged over
      `m_phases` pump phases
    """
    return complex(reflections(params, omega_pump, rabi, [omega_p], m_phases)[0])


def spectrum(
    params: DeviceParams,
    omega_pump: float,
    rabi: float,
    probe_grid: npt.ArrayLike,
    m_phases: int = DEFAULT_PHASES,
) -> ReflectionSpectrum:
    probe_grid = np.asarray(probe_grid, dtype=np.float64)
    if probe_grid.ndim != 1 or not len(probe_grid):
        raise ValueError("Probe grid must be a non-empty 1D sequence")
    if np.any(np.diff(probe_grid) <= 0):
        raise ValueError("Probe grid must be strictly increasing")
    return ReflectionSpectrum(
        probe_freqs=probe_grid,
        r_values=reflections(params, omega_pump, rabi, probe_grid, m_phases),
        omega_pump=omega_pump,
        rabi=rabi,
        n_phases=m_phases,
        device=params,
    )


def two_level_mirror_reflection(
    params: DeviceParams, omega_p: npt.ArrayLike
) -> _ComplexArray:
    """
    Undriven two-level atom in front of a mirror: r = 1 - Γ₁/(γ - iΔ),
      Δ = 2π(ω_p - ω₁₀)
    """
    detuning = TWO_PI * (np.asarray(omega_p, dtype=np.float64) - params.omega10)
    gamma1 = mhz_to_angular(params.gamma1)
    gamma = mhz_to_angular(params.gamma)
    return 1 - gamma1 / (gamma - 1j * detuning)
