# pyright: reportMissingTypeStubs=false
"""
Closed-form marker lines drawn over simulated spectra and grids
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    import numpy.typing as npt

    from .model import DeviceParams

# Rabi frequencies are in MHz, line positions in GHz
_MHZ = 1e-3


def inner_boundary_offset(params: DeviceParams, rabi: float) -> float:
    """
    Distance of the inner amplification boundaries from the pump, √(2Γ₁γ³)/Ω.
    Args:
        params (DeviceParams): Device providing Γ₁ and γ
        rabi   (float)       : Ω_pump/2π, MHz
    Returns:
        (float): Offset, MHz
    """
    if rabi <= 0:
        raise ValueError(f"rabi must be positive, got {rabi}")
    return sqrt(2 * params.gamma1 * params.gamma**3) / rabi


@dataclass(frozen=True, kw_only=True)
class Overlays:
    """
    Attributes:
        triplet          (tuple[float, float, float]): ω_pump - Ω, ω_pump, ω_pump + Ω
        inner_boundaries (tuple[float, float])       : ω_pump ∓ √(2Γ₁γ³)/Ω
        autler_townes    (tuple[float, float])       : ω₂₁ ∓ Ω/2
        transitions      (tuple[float, float])       : ω₁₀, ω₂₁
        omega_pump       (float)                     : Pump frequency
    All positions in GHz.
    """

    triplet: tuple[float, float, float]
    inner_boundaries: tuple[float, float]
    autler_townes: tuple[float, float]
    transitions: tuple[float, float]
    omega_pump: float

    def sideband(self, omega_p: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """
        Idler frequency ω_s = 2ω_pump - ω_p
        """
        return 2 * self.omega_pump - np.asarray(omega_p, dtype=np.float64)

    @property
    def gain_windows(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """
        Probe intervals where gain is expected, lower then upper
        """
        lower_sideband, _, upper_sideband = self.triplet
        lower_inner, upper_inner = self.inner_boundaries
        return (lower_sideband, lower_inner), (upper_inner, upper_sideband)

    def has_gain_window(self) -> bool:
        """
        Inner boundaries lie strictly between the center and the sidebands
        """
        lower_sideband, center, upper_sideband = self.triplet
        lower_inner, upper_inner = self.inner_boundaries
        return lower_sideband < lower_inner < center < upper_inner < upper_sideband


def overlays_for(params: DeviceParams, omega_pump: float, rabi: float) -> Overlays:
    """
    Analytic markers for a pump at `omega_pump` (GHz) with Rabi frequency `rabi`
      (MHz)
    """
    inner = inner_boundary_offset(params, rabi) * _MHZ
    split = rabi * _MHZ
    omega21 = params.omega21
    return Overlays(
        triplet=(omega_pump - split, omega_pump, omega_pump + split),
        inner_boundaries=(omega_pump - inner, omega_pump + inner),
        autler_townes=(omega21 - split / 2, omega21 + split / 2),
        transitions=(params.omega10, omega21),
        omega_pump=omega_pump,
    )
