"""Configuration module for gauge-bridge runs."""

import logging
import os
from typing import Callable, Dict, List, Optional, TypeVar

T = TypeVar("T")

# Report checks and their default tolerances. "richardson" is a minimum
# error-reduction factor rather than an upper bound.
TOLERANCE_DEFAULTS: Dict[str, float] = {
    "intertwining": 1e-6,
    "group_law": 1e-9,
    "transport": 1e-7,
    "propagator": 1e-7,
    "unitarity": 1e-7,
    "realification": 1e-7,
    "roundtrip": 1e-6,
    "norm": 1e-7,
    "oracle": 1e-7,
    "reconstruction": 1e-12,
    "netlist": 1e-10,
    "derivative": 1e-4,
    "richardson": 12.0,
}

_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


class Config:
    """Expose environment-backed defaults for the CLI and pipeline."""

    def __init__(self) -> None:
        # Parse failures surface from validate(), never from construction.
        self._errors: List[str] = []
        self.LOG_LEVEL = self._get_env("GAUGE_BRIDGE_LOG_LEVEL", default="INFO").upper()
        self.DEFAULT_SEED = self._parse_env("GAUGE_BRIDGE_DEFAULT_SEED", int, "20240611")
        self.DEFAULT_OUTPUT_DIR = self._get_env("GAUGE_BRIDGE_OUTPUT_DIR", default="out")

        # Per-check tolerances, e.g. GAUGE_BRIDGE_TOL_INTERTWINING=1e-7
        self.TOLERANCES: Dict[str, float] = {
            name: self._parse_env(f"GAUGE_BRIDGE_TOL_{name.upper()}", float, repr(value))
            for name, value in TOLERANCE_DEFAULTS.items()
        }

    def _get_env(self, key: str, default: Optional[str] = None, *, required: bool = False) -> str:
        value = os.getenv(key, default)
        if required and not value:
            raise ValueError(f"Required environment variable {key} is not set")
        return value

    def _parse_env(self, key: str, parse: Callable[[str], T], default: str) -> T:
        raw = self._get_env(key, default=default)
        try:
            return parse(raw)
        except ValueError:
            self._errors.append(f"{key} must be {'an integer' if parse is int else 'a number'}, got {raw!r}")
            return parse(default)

    @property
    def log_level_number(self) -> int:
        """Numeric level for LOG_LEVEL, INFO when the name is unknown."""
        return getattr(logging, self.LOG_LEVEL) if self.LOG_LEVEL in _LOG_LEVELS else logging.INFO

    def default_tolerances(self) -> Dict[str, float]:
        return dict(self.TOLERANCES)

    def validate(self) -> None:
        if self._errors:
            raise ValueError("; ".join(self._errors))

        if self.LOG_LEVEL not in _LOG_LEVELS:
            raise ValueError(f"GAUGE_BRIDGE_LOG_LEVEL must be one of {sorted(_LOG_LEVELS)}, got {self.LOG_LEVEL!r}")

        bad = [name for name, value in self.TOLERANCES.items() if not value > 0]
        if bad:
            raise ValueError(f"Tolerances must be positive: {', '.join(sorted(bad))}")

        if self.DEFAULT_SEED < 0 or self.DEFAULT_SEED >= 2**64:
            raise ValueError("GAUGE_BRIDGE_DEFAULT_SEED must fit in an unsigned 64-bit integer")


config = Config()

__all__ = ["Config", "config", "TOLERANCE_DEFAULTS"]
