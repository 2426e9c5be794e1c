# pyright: reportMissingTypeStubs=false
"""
Transmon device physics: flux-tuned Josephson energy, transition frequencies, the
anharmonic ladder in the pump rotating frame and the ladder operators.

User-facing quantities are cyclic (GHz for frequencies and energies/h, MHz for rates
and Rabi frequencies). Everything handed to the dynamics is angular, in rad/ns.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from math import cos, pi, sqrt
from typing import TYPE_CHECKING

import numpy as np

from .errors import TransmonRegimeError

if TYPE_CHECKING:
    from typing import TypeAlias
    from collections.abc import Mapping
    from typing import Any, Self

    import numpy.typing as npt

    Operator: TypeAlias = npt.NDArray[np.complex128]

TWO_PI = 2 * pi
MAX_LEVELS = 12
TRANSMON_MIN_RATIO = 10.0


def ghz_to_angular(freq: float) -> float:
    """
    Cyclic GHz -> rad/ns
    """
    return TWO_PI * freq


def mhz_to_angular(freq: float) -> float:
    """
    Cyclic MHz -> rad/ns
    """
    return TWO_PI * freq * 1e-3


def ej_of_flux(e_j_max: float, flux_ratio: float) -> float:
    """
    Josephson energy of a symmetric SQUID at external flux `flux_ratio` = Φ/Φ₀.
    Args:
        e_j_max    (float): E_J/h at zero flux, GHz
        flux_ratio (float): Φ/Φ₀
    Returns:
        (float): E_J(Φ)/h, GHz
    """
    return e_j_max * abs(cos(pi * flux_ratio))


def omega10(e_j: float, e_c: float) -> float:
    """
    Asymptotic transmon |0> <-> |1> transition frequency, GHz.
    Raises:
        TransmonRegimeError: E_J/E_C below the transmon threshold
    """
    if e_c <= 0 or e_j < TRANSMON_MIN_RATIO * e_c:
        raise TransmonRegimeError(
            f"E_J/E_C = {e_j / e_c if e_c > 0 else float('nan'):.3g} is below "
            f"{TRANSMON_MIN_RATIO:g}; the asymptotic transmon formula does not apply"
        )
    return sqrt(8 * e_j * e_c) - e_c


def ladder(
    omega10: float, alpha: float, n_levels: int, omega_pump: float
) -> npt.NDArray[np.float64]:
    """
    Duffing ladder in the frame rotating at the pump frequency.
    Args:
        omega10    (float): |0> <-> |1> frequency, GHz
        alpha      (float): Anharmonicity ω₂₁ - ω₁₀, GHz
        n_levels   (int)  : Number of levels N
        omega_pump (float): Pump frequency, GHz
    Returns:
        (numpy.ndarray): Δ_m for m = 0..N-1, rad/ns
    """
    if n_levels < 2:
        raise ValueError(f"Need at least 2 levels, got {n_levels}")
    m = np.arange(n_levels, dtype=np.float64)
    cyclic = m * (omega10 - omega_pump) + alpha * m * (m - 1) / 2
    return TWO_PI * cyclic


def lowering_operator(n_levels: int) -> Operator:
    """
    Σ₋ = Σ √m |m-1><m|; entries sit at (m-1, m)
    """
    return np.diag(np.sqrt(np.arange(1, n_levels, dtype=np.float64)), k=1).astype(
        np.complex128
    )


def _frozen(array: npt.NDArray[Any]) -> npt.NDArray[Any]:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, kw_only=True)
class DeviceParams:
    """
    Static device description. Defaults are the extracted parameters of the measured
    device.
    Attributes:
        e_j_max       (float)       : E_J/h at zero flux, GHz
        e_c           (float)       : E_C/h, GHz
        n_levels      (int)         : Number of transmon levels kept, 2..12
        gamma1        (float)       : Γ₁/2π, MHz
        gamma_phi     (float)       : Γ_φ/2π, MHz
        flux_ratio    (float)       : Φ/Φ₀
        anharmonicity (None | float): ω₂₁ - ω₁₀ in GHz; -E_C when not given
    """

    e_j_max: float = 7.97
    e_c: float = 0.39
    n_levels: int = 5
    gamma1: float = 45.0
    gamma_phi: float = 2.7
    flux_ratio: float = 0.0
    anharmonicity: None | float = None

    def __post_init__(self) -> None:
        if self.e_j_max <= 0:
            raise ValueError(f"e_j_max must be positive, got {self.e_j_max}")
        if self.e_c <= 0:
            raise ValueError(f"e_c must be positive, got {self.e_c}")
        if not 2 <= self.n_levels <= MAX_LEVELS:
            raise ValueError(
                f"n_levels must be in 2..{MAX_LEVELS}, got {self.n_levels}"
            )
        if self.gamma1 <= 0:
            raise ValueError(f"gamma1 must be positive, got {self.gamma1}")
        if self.gamma_phi < 0:
            raise ValueError(f"gamma_phi must be non-negative, got {self.gamma_phi}")
        if self.e_j_max / self.e_c < TRANSMON_MIN_RATIO:
            raise TransmonRegimeError(
                f"e_j_max/e_c = {self.e_j_max / self.e_c:.3g} is below "
                f"{TRANSMON_MIN_RATIO:g}"
            )

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> Self:
        return cls(**data)

    def to_mapping(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def with_changes(self, **changes: Any) -> Self:
        return dataclasses.replace(self, **changes)

    @property
    def gamma(self) -> float:
        """
        Total decoherence rate γ/2π = Γ₁/2 + Γ_φ, MHz
        """
        return self.gamma1 / 2 + self.gamma_phi

    @property
    def e_j(self) -> float:
        return ej_of_flux(self.e_j_max, self.flux_ratio)

    @property
    def omega10(self) -> float:
        return omega10(self.e_j, self.e_c)

    @property
    def alpha(self) -> float:
        return -self.e_c if self.anharmonicity is None else self.anharmonicity

    @property
    def omega21(self) -> float:
        return self.omega10 + self.alpha


@dataclass(frozen=True, kw_only=True, eq=False)
class PumpFrameModel:
    """
    Ingredients of the master equation in the frame rotating with the pump.
    Attributes:
        detunings       (numpy.ndarray): Δ_m, rad/ns
        sigma_minus     (numpy.ndarray): Σ₋
        sigma_plus      (numpy.ndarray): Σ₊ = Σ₋†
        sigma_p         (numpy.ndarray): Σ_p = -i(Σ₊ - Σ₋)
        omega_pump      (float)        : Pump frequency, GHz
        omega_pump_rabi (float)        : Ω_pump/2π, MHz
        pump_phase      (float)        : Pump phase φ, rad
    """

    detunings: npt.NDArray[np.float64]
    sigma_minus: Operator
    sigma_plus: Operator = field(init=False)
    sigma_p: Operator = field(init=False)
    omega_pump: float
    omega_pump_rabi: float
    pump_phase: float = 0.0

    def __post_init__(self) -> None:
        detunings = np.asarray(self.detunings, dtype=np.float64)
        sigma_minus = np.asarray(self.sigma_minus, dtype=np.complex128)
        if detunings.shape != (sigma_minus.shape[0],):
            raise ValueError(
                f"{len(detunings)} detunings for a "
                f"{sigma_minus.shape[0]}-level operator"
            )
        sigma_plus = sigma_minus.conj().T
        object.__setattr__(self, "detunings", _frozen(detunings))
        object.__setattr__(self, "sigma_minus", _frozen(sigma_minus))
        object.__setattr__(self, "sigma_plus", _frozen(sigma_plus))
        object.__setattr__(self, "sigma_p", _frozen(-1j * (sigma_plus - sigma_minus)))

    @property
    def n_levels(self) -> int:
        return len(self.detunings)

    @property
    def rabi_angular(self) -> float:
        return mhz_to_angular(self.omega_pump_rabi)


def build_pump_frame_model(
    params: DeviceParams, omega_pump: float, rabi: float, phase: float = 0.0
) -> PumpFrameModel:
    """
    Assemble the rotating-frame model for a pump at `omega_pump` (GHz) with Rabi
    frequency `rabi` (MHz) and phase `phase` (rad).
    """
    detunings = ladder(params.omega10, params.alpha, params.n_levels, omega_pump)
    return PumpFrameModel(
        detunings=detunings,
        sigma_minus=lowering_operator(params.n_levels),
        omega_pump=omega_pump,
        omega_pump_rabi=rabi,
        pump_phase=phase,
    )
