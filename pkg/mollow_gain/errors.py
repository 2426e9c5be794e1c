"""
Exceptions raised by the simulator
"""

from __future__ import annotations


class ConfigError(ValueError):
    """
    Invalid run configuration.
    Attributes:
        field (str): Dotted path of the offending config entry, e.g. `pump.rabi`
    """

    field: str

    def __init__(self, field: str, message: str) -> None:
        self.field = field
        super().__init__(f"{field}: {message}")


class SimulationError(Exception):
    """
    Base class for numerical failures
    """


class TransmonRegimeError(SimulationError, ValueError):
    """
    E_J/E_C too small for the asymptotic transmon formula
    """


class DimensionMismatch(SimulationError, ValueError):
    pass


class DegenerateSteadyState(SimulationError):
    pass


class ResolventSingular(SimulationError):
    pass


class LinearityViolation(SimulationError):
    pass


class ConvergenceFailure(SimulationError):
    pass


class UnphysicalState(SimulationError, ValueError):
    """
    Density matrix failing the Hermiticity, trace or positivity check
    """
