import csv
import io
import json
import logging
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from cli import (
    EXIT_CONFIG,
    EXIT_NUMERIC,
    EXIT_PASS,
    EXIT_TOLERANCE,
    build_parser,
    main,
    resolve_output_dir,
    resolve_seed,
)
from config import config
from conftest import SCENARIO_DIR
from scenario_mapper import map_scenario

REPO_ROOT = Path(__file__).parent


def _run(command, scenario_path, out, *extra):
    return main([command, "--config", str(scenario_path), "--out", str(out), *extra])


def _report(out):
    return json.loads((out / "report.json").read_text())


def test_verify_demo_passes(tmp_path, capsys):
    out = tmp_path / "verify"
    assert _run("verify", SCENARIO_DIR / "demo.json", out) == EXIT_PASS
    assert sorted(p.name for p in out.iterdir()) == ["omega.csv", "report.json", "report.txt"]

    report = _report(out)
    assert report["passed"] is True
    assert report["seed"] == 20240611
    names = {check["name"] for check in report["checks"]}
    assert {"intertwining", "group_law_composition", "transport", "propagator", "unitarity", "realification"} <= names

    stdout = capsys.readouterr().out
    assert "overall: PASS" in stdout
    assert stdout == (out / "report.txt").read_text()


def test_runs_are_deterministic(tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    assert _run("verify", SCENARIO_DIR / "demo.json", first, "--steps", "1000") == EXIT_PASS
    assert _run("verify", SCENARIO_DIR / "demo.json", second, "--steps", "1000") == EXIT_PASS
    for name in ("omega.csv", "report.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_map_writes_gauge_and_samples(tmp_path):
    out = tmp_path / "map"
    assert _run("map", SCENARIO_DIR / "demo.json", out) == EXIT_PASS
    with open(out / "omega.csv", newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0][:3] == ["t", "omega_1_1_re", "omega_1_1_im"]
    assert len(rows) == 2002
    hprime_header = (out / "hprime.csv").read_text().splitlines()[0]
    assert hprime_header.startswith("t,hprime_1_1_re,hprime_1_1_im")
    assert hprime_header.endswith(",residual")
    assert _report(out)["metrics"]["max_node_residual"] <= 1e-6


def test_map_of_identical_pair_is_identity(tmp_path, scenario_payload, write_scenario):
    scenario_payload["target"] = scenario_payload["source"]
    out = tmp_path / "identity"
    assert _run("map", write_scenario(scenario_payload), out, "--steps", "1000") == EXIT_PASS
    with open(out / "omega.csv", newline="") as handle:
        rows = list(csv.reader(handle))
    values = np.array([[float(v) for v in row[1:9]] for row in rows[1:]])
    assert np.max(np.abs(values - [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0])) <= 1e-12


def test_map_of_driven_pair(tmp_path):
    out = tmp_path / "driven"
    assert _run("map", SCENARIO_DIR / "driven_pair.json", out) == EXIT_PASS
    assert _report(out)["passed"] is True


def test_malformed_json_writes_nothing(tmp_path, capsys):
    broken = tmp_path / "broken.json"
    broken.write_text('{"name": "broken", ')
    out = tmp_path / "out"
    assert _run("verify", broken, out) == EXIT_CONFIG
    assert not out.exists()
    assert "error:" in capsys.readouterr().err


def test_missing_scenario_file(tmp_path):
    assert _run("map", tmp_path / "nope.json", tmp_path / "out") == EXIT_CONFIG


def test_map_without_target_is_a_config_error(tmp_path, scenario_payload, write_scenario):
    del scenario_payload["target"]
    out = tmp_path / "out"
    assert _run("map", write_scenario(scenario_payload), out) == EXIT_CONFIG
    assert not out.exists()


def test_unknown_log_level_is_a_config_error(tmp_path):
    env = {**os.environ, "GAUGE_BRIDGE_LOG_LEVEL": "verbose"}
    out = tmp_path / "out"
    completed = subprocess.run(
        [sys.executable, str(REPO_ROOT / "cli.py"), "verify", "--config", str(SCENARIO_DIR / "demo.json"), "--out", str(out)],
        cwd=REPO_ROOT,
        env=env,
        capture_output=True,
        text=True,
    )
    assert completed.returncode == EXIT_CONFIG
    assert "GAUGE_BRIDGE_LOG_LEVEL" in completed.stderr
    assert "Traceback" not in completed.stderr
    assert not out.exists()


def test_invalid_environment_fails_validation(tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(config, "LOG_LEVEL", "VERBOSE")
    assert config.log_level_number == logging.INFO
    out = tmp_path / "out"
    assert _run("map", SCENARIO_DIR / "demo.json", out) == EXIT_CONFIG
    assert not out.exists()
    capsys.readouterr()


def test_coarse_grid_fails_intertwining(tmp_path, capsys):
    out = tmp_path / "coarse"
    assert _run("map", SCENARIO_DIR / "driven_pair.json", out, "--steps", "8") == EXIT_TOLERANCE
    failed = {check["name"] for check in _report(out)["checks"] if not check["passed"]}
    assert "intertwining" in failed
    capsys.readouterr()


def test_tight_tolerance_fails_but_writes_report(tmp_path, scenario_payload, write_scenario, capsys):
    scenario_payload["tolerances"] = {"all": 1e-14}
    out = tmp_path / "tight"
    assert _run("verify", write_scenario(scenario_payload), out) == EXIT_TOLERANCE
    report = _report(out)
    assert report["passed"] is False
    assert any(not check["passed"] for check in report["checks"])
    assert "overall: FAIL" in capsys.readouterr().out


def test_sigma_x_circuit(tmp_path):
    out = tmp_path / "circuit"
    assert _run("circuit", SCENARIO_DIR / "sigma_x_circuit.json", out) == EXIT_PASS
    assert sorted(p.name for p in out.iterdir()) == [
        "netlist.cir",
        "network.json",
        "real_system.csv",
        "report.json",
        "report.txt",
        "voltages.csv",
    ]
    netlist = (out / "netlist.cir").read_text()
    assert netlist.rstrip().endswith(".end")
    assert "* diag:" not in netlist
    assert json.loads((out / "network.json").read_text())["L"] == [1.0, 1.0]
    assert (out / "voltages.csv").read_text().startswith("t,v1,v2,vdot1,vdot2\n")
    metrics = _report(out)["metrics"]
    assert metrics["passivity_realizable"] == 1.0


@pytest.mark.parametrize("name, needle", [("sigma_y_circuit", "ports"), ("zero_circuit", "port 1")])
def test_circuit_numeric_failures(tmp_path, capsys, name, needle):
    out = tmp_path / name
    assert _run("circuit", SCENARIO_DIR / f"{name}.json", out) == EXIT_NUMERIC
    assert not out.exists()
    assert needle in capsys.readouterr().err


def test_evolve_demo(tmp_path):
    out = tmp_path / "evolve"
    assert _run("evolve", SCENARIO_DIR / "demo.json", out) == EXIT_PASS
    assert (out / "psi.csv").read_text().startswith("t,psi1_re,psi1_im,psi2_re,psi2_im,norm\n")
    report = _report(out)
    assert {check["name"] for check in report["checks"]} == {"oracle", "norm"}
    assert report["metrics"]["richardson_ratio"] > 8.0


def test_evolve_non_hermitian_reports_norm_change(tmp_path):
    out = tmp_path / "nonherm"
    assert _run("evolve", SCENARIO_DIR / "non_hermitian.json", out) == EXIT_PASS
    report = _report(out)
    assert any("non-Hermitian" in note for note in report["notes"])
    assert report["metrics"]["norm_ratio"] > 1.0
    assert "norm" not in {check["name"] for check in report["checks"]}


def test_seed_flag_overrides_scenario(tmp_path):
    out = tmp_path / "seeded"
    assert _run("verify", SCENARIO_DIR / "demo.json", out, "--seed", "0x2a", "--steps", "1000") == EXIT_PASS
    assert _report(out)["seed"] == 42


def test_seed_precedence(scenario_payload):
    scenario = map_scenario(scenario_payload)
    assert resolve_seed(5, scenario) == 5
    assert resolve_seed(None, scenario) == 20240611
    del scenario_payload["seed"]
    assert resolve_seed(None, map_scenario(scenario_payload)) == config.DEFAULT_SEED


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--config", "x.json", "--steps", "1"],
        ["verify", "--config", "x.json", "--seed", "-3"],
        ["verify", "--config", "x.json", "--seed", "abc"],
        ["explode", "--config", "x.json"],
        ["verify"],
        [],
    ],
)
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_CONFIG
    capsys.readouterr()


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == EXIT_PASS
    assert "verify" in capsys.readouterr().out


def test_every_command_has_the_shared_flags():
    parser = build_parser()
    for command in ("map", "evolve", "circuit", "verify"):
        args = parser.parse_args([command, "--config", "s.json", "--out", "o", "--seed", "9", "--steps", "50"])
        assert (args.command, args.config, args.out, args.seed, args.steps) == (command, Path("s.json"), Path("o"), 9, 50)


def test_output_dir_resolution(scenario_payload, tmp_path):
    config_path = tmp_path / "scenarios" / "demo.json"
    scenario = map_scenario(scenario_payload)
    assert resolve_output_dir(tmp_path / "cli", scenario, config_path) == tmp_path / "cli"
    assert resolve_output_dir(None, scenario, config_path) == Path(config.DEFAULT_OUTPUT_DIR) / "demo"

    scenario_payload["output_dir"] = "results"
    relative = map_scenario(scenario_payload)
    assert resolve_output_dir(None, relative, config_path) == tmp_path / "scenarios" / "results"

    scenario_payload["output_dir"] = str(tmp_path / "absolute")
    assert resolve_output_dir(None, map_scenario(scenario_payload), config_path) == tmp_path / "absolute"
