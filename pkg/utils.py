"""Small shared helpers: stage monitoring, norms and float formatting."""

import time
from functools import wraps
from typing import Any, Callable, Dict

import numpy as np
import psutil

from logging_config import setup_logger

logger = setup_logger(__name__)


def get_memory_info() -> Dict[str, Any]:
    """Resident memory of the current process, used by monitor_performance."""
    try:
        memory_info = psutil.Process().memory_info()
        return {"memory_used_mb": round(memory_info.rss / (1024 * 1024), 2)}
    except psutil.Error as exc:
        logger.debug("Unable to read process memory: %s", exc)
        return {}


def monitor_performance(func: Callable):
    """
    Decorator logging duration and memory delta of a pipeline stage.
    Output goes to the logger only, never into artifacts.
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        start_memory = get_memory_info()
        logger.info("Starting %s - Memory: %sMB", func.__name__, start_memory.get("memory_used_mb", "unknown"))

        try:
            result = func(*args, **kwargs)
        except Exception as exc:
            duration = time.perf_counter() - start_time
            logger.info("Failed %s - Duration: %.2fs, Error: %s", func.__name__, duration, exc)
            raise

        duration = time.perf_counter() - start_time
        end_memory = get_memory_info()
        memory_delta = 0.0
        if start_memory and end_memory:
            memory_delta = end_memory["memory_used_mb"] - start_memory["memory_used_mb"]
        logger.info("Completed %s - Duration: %.2fs, Memory delta: %.2fMB", func.__name__, duration, memory_delta)
        return result

    return wrapper


def max_norm(matrix: np.ndarray) -> float:
    """Entrywise max-abs norm, 0.0 for empty input."""
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        return 0.0
    return float(np.max(np.abs(matrix)))


def format_float(value: float) -> str:
    """17 significant digits: round-trips any double exactly."""
    return format(float(value), ".17g")


__all__ = ["get_memory_info", "monitor_performance", "max_norm", "format_float"]
