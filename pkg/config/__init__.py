"""Expose a singleton config instance for the library and CLI."""

# Load environment variables for local runs (optional)
try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    # python-dotenv not installed - rely on the process environment only
    pass

from .settings import TOLERANCE_DEFAULTS, Config, config

__all__ = ["Config", "config", "TOLERANCE_DEFAULTS"]
