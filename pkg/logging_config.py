"""Logging helpers shared by the gauge-bridge modules and CLI."""

import logging
import sys
from typing import Optional


def _configured_level() -> int:
    # Imported lazily so config can itself log during validation.
    from config import config

    return config.log_level_number


def setup_logger(name: str, level: Optional[int] = None) -> logging.Logger:
    """Configure and return a stderr logger; stdout is reserved for CLI output."""
    logger = logging.getLogger(name)
    if level is None:
        level = _configured_level()

    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    for handler in logger.handlers:
        handler.setLevel(level)
    logger.setLevel(level)
    logger.propagate = False
    return logger


def set_global_level(level: int) -> None:
    """Apply a level to every logger created through setup_logger."""
    for logger in logging.Logger.manager.loggerDict.values():
        if isinstance(logger, logging.Logger) and not logger.propagate and logger.handlers:
            logger.setLevel(level)
            for handler in logger.handlers:
                handler.setLevel(level)


__all__ = ["setup_logger", "set_global_level"]
