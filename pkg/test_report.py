import json
import math

import pytest

from report import Report


@pytest.fixture
def report():
    return Report("verify", "demo", 7)


def test_max_mode(report):
    assert report.add_check("intertwining", 1e-9, 1e-6).passed
    assert not report.add_check("transport", 1e-3, 1e-7).passed
    assert not report.passed
    assert [check.name for check in report.failures] == ["transport"]


def test_min_mode(report):
    assert report.add_check("integrator_order", 15.9, 12.0, mode="min").passed
    assert not report.add_check("other_order", 3.0, 12.0, mode="min").passed


def test_nan_residual_fails_in_both_modes(report):
    assert not report.add_check("a", float("nan"), 1.0).passed
    assert not report.add_check("b", float("nan"), 1.0, mode="min").passed


def test_duplicate_and_unknown_mode_rejected(report):
    report.add_check("norm", 0.0, 1e-7)
    with pytest.raises(ValueError):
        report.add_check("norm", 0.0, 1e-7)
    with pytest.raises(ValueError):
        report.add_check("other", 0.0, 1e-7, mode="between")


def test_empty_report_passes(report):
    assert report.passed
    assert report.failures == []


def test_json_document(report):
    report.add_check("intertwining", 2.5e-12, 1e-6)
    report.add_check("transport", float("inf"), 1e-7)
    report.metrics["richardson_ratio"] = 16.0
    report.add_note("omega is not unique")
    document = json.loads(report.to_json())
    assert document["command"] == "verify"
    assert document["scenario"] == "demo"
    assert document["seed"] == 7
    assert document["passed"] is False
    assert document["checks"][0] == {
        "name": "intertwining",
        "residual": 2.5e-12,
        "tolerance": 1e-6,
        "mode": "max",
        "passed": True,
    }
    assert document["checks"][1]["residual"] == "inf"
    assert document["metrics"] == {"richardson_ratio": 16.0}
    assert document["notes"] == ["omega is not unique"]


def test_text_summary(report):
    report.add_check("intertwining", 2.5e-12, 1e-6)
    report.add_check("integrator_order", 15.9, 12.0, mode="min")
    report.metrics["gauge_commutator"] = math.pi
    report.add_note("realification skipped")
    lines = report.to_text().splitlines()
    assert lines[0] == "verify report for scenario 'demo' (seed 7)"
    assert lines[1] == "overall: PASS"
    assert lines[2] == "  [ok  ] intertwining: 2.500e-12 <= 1.0e-06"
    assert lines[3] == "  [ok  ] integrator_order: 1.590e+01 >= 1.2e+01"
    assert lines[4] == "  metric gauge_commutator: 3.14159"
    assert lines[5] == "  note: realification skipped"
