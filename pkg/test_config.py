import logging

import pytest

from config import TOLERANCE_DEFAULTS, Config
from logging_config import set_global_level, setup_logger


def test_defaults(monkeypatch):
    for key in ("GAUGE_BRIDGE_LOG_LEVEL", "GAUGE_BRIDGE_DEFAULT_SEED", "GAUGE_BRIDGE_OUTPUT_DIR", "GAUGE_BRIDGE_TOL_NORM"):
        monkeypatch.delenv(key, raising=False)
    settings = Config()
    assert settings.LOG_LEVEL == "INFO"
    assert settings.DEFAULT_SEED == 20240611
    assert settings.DEFAULT_OUTPUT_DIR == "out"
    assert settings.default_tolerances()["norm"] == TOLERANCE_DEFAULTS["norm"]
    settings.validate()


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("GAUGE_BRIDGE_LOG_LEVEL", "debug")
    monkeypatch.setenv("GAUGE_BRIDGE_TOL_INTERTWINING", "1e-9")
    monkeypatch.setenv("GAUGE_BRIDGE_OUTPUT_DIR", "/tmp/runs")
    settings = Config()
    assert settings.LOG_LEVEL == "DEBUG"
    assert settings.TOLERANCES["intertwining"] == 1e-9
    assert settings.DEFAULT_OUTPUT_DIR == "/tmp/runs"


def test_default_tolerances_are_copies(monkeypatch):
    monkeypatch.delenv("GAUGE_BRIDGE_TOL_NORM", raising=False)
    settings = Config()
    settings.default_tolerances()["norm"] = 1.0
    assert settings.TOLERANCES["norm"] == TOLERANCE_DEFAULTS["norm"]


@pytest.mark.parametrize(
    "key, value",
    [
        ("GAUGE_BRIDGE_LOG_LEVEL", "LOUD"),
        ("GAUGE_BRIDGE_TOL_NORM", "0"),
        ("GAUGE_BRIDGE_DEFAULT_SEED", "-1"),
        ("GAUGE_BRIDGE_DEFAULT_SEED", str(2**64)),
        ("GAUGE_BRIDGE_DEFAULT_SEED", "seven"),
        ("GAUGE_BRIDGE_TOL_NORM", "tiny"),
    ],
)
def test_validate_rejects(monkeypatch, key, value):
    monkeypatch.setenv(key, value)
    with pytest.raises(ValueError):
        Config().validate()


def test_required_variable():
    with pytest.raises(ValueError):
        Config()._get_env("GAUGE_BRIDGE_SURELY_UNSET_VARIABLE", required=True)


def test_loggers_have_one_stream_handler():
    logger = setup_logger("gauge_bridge.test")
    setup_logger("gauge_bridge.test")
    assert len(logger.handlers) == 1
    assert isinstance(logger.handlers[0], logging.StreamHandler)
    assert not logger.propagate


def test_set_global_level():
    logger = setup_logger("gauge_bridge.level_test", level=logging.INFO)
    set_global_level(logging.ERROR)
    try:
        assert logger.level == logging.ERROR
        assert all(handler.level == logging.ERROR for handler in logger.handlers)
    finally:
        set_global_level(logging.INFO)


def test_bad_values_are_deferred_to_validate(monkeypatch):
    monkeypatch.setenv("GAUGE_BRIDGE_LOG_LEVEL", "verbose")
    monkeypatch.setenv("GAUGE_BRIDGE_DEFAULT_SEED", "seven")
    settings = Config()
    assert settings.log_level_number == logging.INFO
    assert settings.DEFAULT_SEED == 20240611
    with pytest.raises(ValueError, match="GAUGE_BRIDGE_DEFAULT_SEED"):
        settings.validate()
