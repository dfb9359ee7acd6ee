"""Exception hierarchy shared by the numerical modules and the CLI."""

from __future__ import annotations

from typing import Sequence


class GaugeBridgeError(Exception):
    """Root of every error raised on purpose by this package."""


class ConfigError(GaugeBridgeError, ValueError):
    """Scenario document could not be parsed or is inconsistent."""


class SimulationError(GaugeBridgeError):
    """Numeric failure while building or integrating a system."""


class DimensionMismatchError(SimulationError, ValueError):
    pass


class GridMismatchError(SimulationError, ValueError):
    pass


class NonFiniteError(SimulationError, ArithmeticError):
    """Integration produced inf/nan; usually the step is too coarse for the spectral radius."""


class SingularityError(SimulationError, ArithmeticError):
    pass


class NonHermitianError(SimulationError, ValueError):
    pass


class UnsupportedSystemError(SimulationError):
    pass


class SingularRealPartError(UnsupportedSystemError):
    """H1 = Re H is singular, so the decoupled second-order form does not exist."""

    def __init__(self, message: str, ports: Sequence[int] = ()) -> None:
        super().__init__(message)
        self.ports = tuple(ports)


class FrequencyAssignmentError(SimulationError, ValueError):
    def __init__(self, message: str, port: int) -> None:
        super().__init__(message)
        self.port = port


class PoleError(SimulationError, ZeroDivisionError):
    pass


__all__ = [
    "GaugeBridgeError",
    "ConfigError",
    "SimulationError",
    "DimensionMismatchError",
    "GridMismatchError",
    "NonFiniteError",
    "SingularityError",
    "NonHermitianError",
    "UnsupportedSystemError",
    "SingularRealPartError",
    "FrequencyAssignmentError",
    "PoleError",
]
