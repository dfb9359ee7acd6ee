"""Map scenario JSON documents onto the library's value types and validate them."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from config import TOLERANCE_DEFAULTS, config
from errors import ConfigError, DimensionMismatchError
from logging_config import setup_logger
from network_synth import FrequencyPolicy
from quantum_model import ConstProfile, CosProfile, HamiltonianSpec, PolyProfile, Profile, StateVector, TimeGrid

logger = setup_logger(__name__)

NAMED_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    source: HamiltonianSpec
    initial_state: StateVector
    grid: TimeGrid
    target: Optional[HamiltonianSpec] = None
    capacitance: Optional[np.ndarray] = None
    policy: FrequencyPolicy = FrequencyPolicy.PROPER_FREQUENCY
    inductance: Optional[np.ndarray] = None
    output_dir: Optional[str] = None
    tolerances: Dict[str, float] = field(default_factory=config.default_tolerances)
    seed: Optional[int] = None
    gauge_seed: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.source.dim

    @property
    def hermitian_pair(self) -> bool:
        return bool(self.source.hermitian_hint and self.target is not None and self.target.hermitian_hint)


def _fail(where: str, message: str) -> ConfigError:
    return ConfigError(f"{where}: {message}")


def map_number(value: Any, where: str) -> complex:
    """A number or an [re, im] pair."""
    if isinstance(value, bool):
        raise _fail(where, "booleans are not numbers")
    if isinstance(value, (int, float)):
        return complex(float(value), 0.0)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(part, (int, float)) and not isinstance(part, bool) for part in value
    ):
        return complex(float(value[0]), float(value[1]))
    raise _fail(where, f"expected a number or [re, im] pair, got {value!r}")


def _map_real(payload: Dict[str, Any], key: str, where: str, default: Optional[float] = None) -> float:
    value = payload.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(where, f"'{key}' must be a real number")
    return float(value)


def map_matrix(payload: Any, where: str) -> np.ndarray:
    """Row-major nested arrays of [re, im] pairs, or one of the names I, X, Y, Z."""
    if isinstance(payload, str):
        if payload.upper() not in NAMED_MATRICES:
            raise _fail(where, f"unknown named matrix {payload!r}")
        return NAMED_MATRICES[payload.upper()].copy()
    if not isinstance(payload, list) or not payload or not all(isinstance(row, list) for row in payload):
        raise _fail(where, "matrix must be a non-empty list of rows")
    n = len(payload)
    if any(len(row) != n for row in payload):
        raise _fail(where, f"matrix must be square, got {n} rows of lengths {[len(row) for row in payload]}")
    return np.array(
        [[map_number(entry, f"{where}[{r}][{c}]") for c, entry in enumerate(row)] for r, row in enumerate(payload)],
        dtype=complex,
    )


def map_profile(payload: Any, where: str) -> Profile:
    if payload is None:
        return ConstProfile(1.0)
    if not isinstance(payload, dict):
        raise _fail(where, "profile must be an object with a 'kind'")
    kind = payload.get("kind")
    if kind == "const":
        return ConstProfile(_map_real(payload, "value", where, default=1.0))
    if kind == "poly":
        coeffs = payload.get("coeffs")
        if not isinstance(coeffs, list) or not coeffs:
            raise _fail(where, "'coeffs' must be a non-empty list")
        return PolyProfile(tuple(_map_real({"c": c}, "c", f"{where}.coeffs") for c in coeffs))
    if kind == "cos":
        return CosProfile(
            amplitude=_map_real(payload, "amplitude", where, default=1.0),
            frequency=_map_real(payload, "frequency", where, default=1.0),
            phase=_map_real(payload, "phase", where, default=0.0),
        )
    raise _fail(where, f"unknown profile kind {kind!r}; expected const, poly or cos")


def map_hamiltonian(payload: Any, where: str) -> HamiltonianSpec:
    if not isinstance(payload, dict):
        raise _fail(where, "Hamiltonian must be an object with 'terms'")
    terms_payload = payload.get("terms")
    if not isinstance(terms_payload, list) or not terms_payload:
        raise _fail(where, "'terms' must be a non-empty list")

    terms = []
    for index, term in enumerate(terms_payload):
        term_where = f"{where}.terms[{index}]"
        if not isinstance(term, dict) or "matrix" not in term:
            raise _fail(term_where, "term needs a 'matrix'")
        terms.append((map_profile(term.get("profile"), f"{term_where}.profile"), map_matrix(term["matrix"], f"{term_where}.matrix")))

    hermitian = payload.get("hermitian", False)
    if not isinstance(hermitian, bool):
        raise _fail(where, "'hermitian' must be a boolean")
    try:
        return HamiltonianSpec(terms=tuple(terms), hermitian_hint=hermitian)
    except DimensionMismatchError as exc:
        raise _fail(where, str(exc)) from exc


def map_grid(payload: Any, steps_override: Optional[int] = None) -> TimeGrid:
    if not isinstance(payload, dict):
        raise _fail("grid", "grid must be an object with t0, t1, steps")
    steps = payload.get("steps") if steps_override is None else steps_override
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 2:
        raise _fail("grid", f"'steps' must be an integer >= 2, got {steps!r}")
    t0 = _map_real(payload, "t0", "grid", default=0.0)
    t1 = _map_real(payload, "t1", "grid")
    try:
        return TimeGrid(t0, t1, steps)
    except ValueError as exc:
        raise _fail("grid", str(exc)) from exc


def map_state(payload: Any, time: float) -> StateVector:
    if not isinstance(payload, list) or not payload:
        raise _fail("initial_state", "must be a non-empty list of entries")
    entries = [map_number(entry, f"initial_state[{k}]") for k, entry in enumerate(payload)]
    return StateVector(np.array(entries, dtype=complex), time)


def map_tolerances(payload: Any) -> Dict[str, float]:
    tolerances = config.default_tolerances()
    if payload is None:
        return tolerances
    if not isinstance(payload, dict):
        raise _fail("tolerances", "must be an object")
    if "all" in payload:
        value = _map_real(payload, "all", "tolerances")
        tolerances = {name: value for name in tolerances}
    for name in payload:
        if name == "all":
            continue
        if name not in TOLERANCE_DEFAULTS:
            raise _fail("tolerances", f"unknown check {name!r}; known: {sorted(TOLERANCE_DEFAULTS)}")
        tolerances[name] = _map_real(payload, name, "tolerances")
    bad = [name for name, value in tolerances.items() if not value > 0]
    if bad:
        raise _fail("tolerances", f"must be positive: {', '.join(sorted(bad))}")
    return tolerances


def _map_vector(payload: Any, where: str) -> Optional[np.ndarray]:
    if payload is None:
        return None
    if not isinstance(payload, list) or not payload:
        raise _fail(where, "must be a non-empty list of positive numbers")
    values = np.array([_map_real({"v": v}, "v", where) for v in payload], dtype=float)
    if np.any(values <= 0):
        raise _fail(where, "values must be positive")
    return values


def map_synthesis(payload: Any) -> Dict[str, Any]:
    if payload is None:
        payload = {}
    if not isinstance(payload, dict):
        raise _fail("synthesis", "must be an object")
    try:
        policy = FrequencyPolicy(payload.get("policy", FrequencyPolicy.PROPER_FREQUENCY.value))
    except ValueError as exc:
        raise _fail("synthesis", f"unknown policy {payload.get('policy')!r}") from exc
    inductance = _map_vector(payload.get("inductance"), "synthesis.inductance")
    if policy is FrequencyPolicy.EXPLICIT_INDUCTANCE and inductance is None:
        raise _fail("synthesis", "explicit_inductance policy needs 'inductance'")
    return {
        "capacitance": _map_vector(payload.get("capacitance"), "synthesis.capacitance"),
        "policy": policy,
        "inductance": inductance,
    }


def map_scenario(payload: Any, steps_override: Optional[int] = None) -> Scenario:
    """Build a validated Scenario from a parsed JSON document."""
    if not isinstance(payload, dict):
        raise _fail("scenario", "document must be a JSON object")

    name = payload.get("name", "scenario")
    if not isinstance(name, str) or not name:
        raise _fail("name", "must be a non-empty string")

    grid = map_grid(payload.get("grid"), steps_override)
    source = map_hamiltonian(payload.get("source"), "source")
    target = map_hamiltonian(payload["target"], "target") if payload.get("target") is not None else None
    state = map_state(payload.get("initial_state"), grid.t0)
    synthesis = map_synthesis(payload.get("synthesis"))

    seed = payload.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64):
        raise _fail("seed", "must be an unsigned 64-bit integer")

    gauge_seed = map_matrix(payload["gauge_seed"], "gauge_seed") if payload.get("gauge_seed") is not None else None
    output_dir = payload.get("output_dir")
    if output_dir is not None and not isinstance(output_dir, str):
        raise _fail("output_dir", "must be a string")

    scenario = Scenario(
        name=name,
        source=source,
        initial_state=state,
        grid=grid,
        target=target,
        capacitance=synthesis["capacitance"],
        policy=synthesis["policy"],
        inductance=synthesis["inductance"],
        output_dir=output_dir,
        tolerances=map_tolerances(payload.get("tolerances")),
        seed=seed,
        gauge_seed=gauge_seed,
    )
    validate_scenario(scenario)
    return scenario


def validate_scenario(scenario: Scenario) -> None:
    """Dimensions must agree across every member."""
    n = scenario.dim
    members: List[tuple] = [("initial_state", scenario.initial_state.dim)]
    if scenario.target is not None:
        members.append(("target", scenario.target.dim))
    for key in ("capacitance", "inductance"):
        value = getattr(scenario, key)
        if value is not None:
            members.append((key, value.shape[0]))
    if scenario.gauge_seed is not None:
        members.append(("gauge_seed", scenario.gauge_seed.shape[0]))

    mismatched = [f"{key} has dimension {dim}" for key, dim in members if dim != n]
    if mismatched:
        raise _fail("scenario", f"source has dimension {n} but " + "; ".join(mismatched))


def load_scenario(path: Path, steps_override: Optional[int] = None) -> Scenario:
    """Read and map a scenario file; every failure surfaces as ConfigError."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"Cannot read scenario {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Scenario {path} is not valid JSON: {exc}") from exc

    scenario = map_scenario(payload, steps_override)
    logger.info("Loaded scenario %s (n=%d, %d steps)", scenario.name, scenario.dim, scenario.grid.steps)
    return scenario


__all__ = [
    "Scenario",
    "NAMED_MATRICES",
    "map_number",
    "map_matrix",
    "map_profile",
    "map_hamiltonian",
    "map_grid",
    "map_state",
    "map_tolerances",
    "map_synthesis",
    "map_scenario",
    "validate_scenario",
    "load_scenario",
]
