"""Scenario processor orchestrating the map, evolve, circuit and verify stages."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Tuple

import numpy as np
from scipy.linalg import expm

import checks
from artifacts import (
    gauge_csv,
    hamiltonian_samples_csv,
    network_json,
    real_system_csv,
    states_csv,
    trajectory_csv,
)
from errors import ConfigError
from gauge import (
    GaugePair,
    GaugeSolution,
    intertwining_residual,
    map_hamiltonian,
    node_residuals,
    transitive_solution,
    unitarity_deviation,
)
from logging_config import setup_logger
from network_synth import admittance, emit_netlist, interaction_admittance, passivity_report, quantum_roundtrip
from quantum_model import evolve_state, eval_hamiltonian, hermiticity_check, states_to_array
from report import Report
from scenario_mapper import Scenario
from utils import max_norm, monitor_performance

logger = setup_logger(__name__)

NETLIST_SAMPLE_POINTS = (1.0 + 0.0j, 1.0 + 1.0j, 10.0j)
UNITARY_SEED_TOLERANCE = 1e-12


@dataclass
class RunResult:
    """A finished stage: its report and the artifacts to publish, keyed by file name."""

    report: Report
    files: Dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.report.passed

    def finalize(self) -> "RunResult":
        self.files["report.json"] = self.report.to_json()
        self.files["report.txt"] = self.report.to_text()
        return self


class ScenarioProcessor:
    """Core processor running one command against a loaded Scenario."""

    def __init__(self, method: str = "auto") -> None:
        # Gauge backend selection passed to the omega solvers.
        self.method = method
        self._commands: Dict[str, Callable[[Scenario, int], RunResult]] = {
            "map": self.run_map,
            "evolve": self.run_evolve,
            "circuit": self.run_circuit,
            "verify": self.run_verify,
        }

    @property
    def commands(self) -> Tuple[str, ...]:
        return tuple(self._commands)

    def run(self, command: str, scenario: Scenario, seed: int) -> RunResult:
        try:
            handler = self._commands[command]
        except KeyError:
            raise ConfigError(f"Unknown command {command!r}; expected one of {self.commands}") from None
        logger.info("Running %s for scenario %s (seed %d)", command, scenario.name, seed)
        return handler(scenario, seed)

    # ------------------------------------------------------------------
    # Shared helpers
    # ------------------------------------------------------------------

    @staticmethod
    def _require_target(scenario: Scenario, command: str) -> GaugePair:
        if scenario.target is None:
            raise ConfigError(f"'{command}' needs a target Hamiltonian in scenario {scenario.name!r}")
        return GaugePair(scenario.source, scenario.target)

    def _gauge(self, scenario: Scenario, pair: GaugePair) -> GaugeSolution:
        return transitive_solution(pair, scenario.grid, seed=scenario.gauge_seed, method=self.method)

    @staticmethod
    def _seed_is_unitary(scenario: Scenario) -> bool:
        if scenario.gauge_seed is None:
            return True
        seed = scenario.gauge_seed
        return max_norm(seed.conj().T @ seed - np.eye(seed.shape[0])) <= UNITARY_SEED_TOLERANCE

    def _add_unitarity(self, report: Report, scenario: Scenario, g: GaugeSolution) -> None:
        if not scenario.hermitian_pair:
            report.add_note("unitarity not checked: source and target are not both declared Hermitian")
        elif not self._seed_is_unitary(scenario):
            report.add_note("unitarity not checked: gauge_seed is not unitary")
        else:
            report.add_check("unitarity", unitarity_deviation(g), scenario.tolerances["unitarity"])

    # ------------------------------------------------------------------
    # Commands
    # ------------------------------------------------------------------

    @monitor_performance
    def run_map(self, scenario: Scenario, seed: int) -> RunResult:
        """omega(t), the mapped Hamiltonian samples and their intertwining residuals."""
        pair = self._require_target(scenario, "map")
        tolerances = scenario.tolerances
        report = Report("map", scenario.name, seed)

        g = self._gauge(scenario, pair)
        mapped = map_hamiltonian(g, pair.source)
        residuals = node_residuals(g, pair.source, pair.target)

        report.add_check("intertwining", intertwining_residual(g, pair.source, pair.target), tolerances["intertwining"])
        report.add_check("derivative", g.derivative_consistency(), tolerances["derivative"])
        self._add_unitarity(report, scenario, g)
        report.metrics["max_node_residual"] = float(np.max(residuals))
        report.add_note(
            f"omega is the transitive solution omega1 omega2 (backend {g.backend.value}); "
            "other gauges connecting the pair exist"
        )

        files = {
            "omega.csv": gauge_csv(g),
            "hprime.csv": hamiltonian_samples_csv(scenario.grid, mapped, residuals),
        }
        return RunResult(report, files).finalize()

    @monitor_performance
    def run_evolve(self, scenario: Scenario, seed: int) -> RunResult:
        """psi(t) on the grid with oracle, norm and convergence diagnostics."""
        spec, psi0, grid = scenario.source, scenario.initial_state, scenario.grid
        tolerances = scenario.tolerances
        report = Report("evolve", scenario.name, seed)

        path = evolve_state(spec, psi0, grid)
        states = states_to_array(path)
        norms = np.linalg.norm(states, axis=1)

        if spec.is_constant() or spec.terms_commute():
            exponents = np.stack([-1j * spec.integral(grid.t0, t) for t in grid.nodes])
            oracle = expm(exponents) @ psi0.entries
            scale = max(1.0, max_norm(oracle))
            report.add_check("oracle", max_norm(states - oracle) / scale, tolerances["oracle"])
        else:
            report.add_note("no closed-form oracle: Hamiltonian terms do not commute")

        if spec.hermitian_hint:
            report.add_check("norm", float(np.max(np.abs(norms - norms[0]))), tolerances["norm"])
        else:
            deviation = hermiticity_check(spec, grid)
            if deviation > 0.0:
                report.add_note(
                    f"non-Hermitian Hamiltonian (max |H - H^dagger| = {deviation:.3g}); "
                    f"norm changed from {norms[0]:.6g} to {norms[-1]:.6g}"
                )
            report.metrics["norm_ratio"] = float(norms[-1] / norms[0]) if norms[0] else float("nan")

        coarse_error, fine_error = checks.richardson_errors(spec, psi0, grid)
        report.metrics["richardson_error_n"] = coarse_error
        report.metrics["richardson_error_2n"] = fine_error
        if fine_error > 0.0:
            report.metrics["richardson_ratio"] = coarse_error / fine_error
            logger.info("Step-halving error ratio %.3g (%d vs %d steps)", coarse_error / fine_error, grid.steps, 2 * grid.steps)
        else:
            report.add_note("step halving changed nothing: the integration is exact on this grid")

        return RunResult(report, {"psi.csv": states_csv(path)}).finalize()

    @monitor_performance
    def run_circuit(self, scenario: Scenario, seed: int) -> RunResult:
        """Quantum -> realification -> network -> simulation round trip."""
        tolerances = scenario.tolerances
        report = Report("circuit", scenario.name, seed)

        roundtrip = quantum_roundtrip(
            scenario.source,
            scenario.initial_state,
            scenario.grid,
            C=scenario.capacitance,
            policy=scenario.policy,
            L=scenario.inductance,
        )
        network = roundtrip.network
        sys = roundtrip.real_system
        netlist = emit_netlist(network, title=f"gauge-bridge network for {scenario.name}")

        report.add_check("roundtrip", roundtrip.max_deviation, tolerances["roundtrip"])
        report.metrics["roundtrip_real"] = roundtrip.max_real_deviation
        report.metrics["roundtrip_imag"] = roundtrip.max_imag_deviation

        reconstructed = network.reconstruct()
        reconstruction = max(
            max_norm(reconstructed.A - sys.Aq) / max(1.0, max_norm(sys.Aq)),
            max_norm(reconstructed.B - sys.Bq) / max(1.0, max_norm(sys.Bq)),
        )
        report.add_check("reconstruction", reconstruction, tolerances["reconstruction"])

        if netlist.diagnostics:
            report.add_note(f"netlist check skipped: {len(netlist.diagnostics)} non-physical element(s) emitted")
        else:
            fidelity = max(
                max_norm(interaction_admittance(netlist, network, s) - admittance(network, s))
                for s in NETLIST_SAMPLE_POINTS
            )
            report.add_check("netlist", fidelity, tolerances["netlist"])

        for flag, value in passivity_report(network).items():
            report.metrics[f"passivity_{flag}"] = float(value)

        files = {
            "network.json": network_json(network),
            "netlist.cir": netlist.text,
            "voltages.csv": trajectory_csv(roundtrip.real_run),
            "real_system.csv": real_system_csv(sys),
        }
        return RunResult(report, files).finalize()

    @monitor_performance
    def run_verify(self, scenario: Scenario, seed: int) -> RunResult:
        """The full invariant suite; randomized draws come from ``seed``."""
        pair = self._require_target(scenario, "verify")
        source, target, grid = pair.source, pair.target, scenario.grid
        tolerances = scenario.tolerances
        rng = np.random.default_rng(seed)
        report = Report("verify", scenario.name, seed)

        g = self._gauge(scenario, pair)
        report.add_check("intertwining", intertwining_residual(g, source, target), tolerances["intertwining"])
        report.add_check("derivative", g.derivative_consistency(), tolerances["derivative"])
        report.add_check("reflexivity", checks.reflexivity_residual(source, grid), tolerances["intertwining"])
        report.add_check("symmetry", checks.symmetry_residual(g, source, target), tolerances["intertwining"])
        report.add_check(
            "transitivity", checks.transitivity_residual(rng, g, source, target), tolerances["intertwining"]
        )

        laws = checks.group_law_residuals(rng)
        for law, residual in laws.items():
            report.add_check(f"group_law_{law}", residual, tolerances["group_law"])
        defect, commutator = checks.commutation_transfer(rng, grid, scenario.dim)
        report.add_check("commutation_transfer", defect, tolerances["group_law"])
        report.metrics["gauge_commutator"] = commutator

        report.add_check(
            "transport", checks.transport_residual(g, source, target, scenario.initial_state), tolerances["transport"]
        )
        report.add_check(
            "transport_random",
            checks.random_transport_residual(rng, grid, scenario.dim),
            tolerances["transport"],
        )
        report.add_check(
            "propagator",
            checks.propagator_residual(rng, g, source, target, hermitian=scenario.hermitian_pair),
            tolerances["propagator"],
        )

        self._add_unitarity(report, scenario, g)
        if scenario.hermitian_pair and self._seed_is_unitary(scenario):
            report.add_check("endomorphism", checks.endomorphism_residual(g, source), tolerances["unitarity"])

        if source.is_constant():
            deviation, decoupled = checks.realification_residual(
                eval_hamiltonian(source, grid.t0), scenario.initial_state, grid
            )
            report.add_check("realification", deviation, tolerances["realification"])
            if not decoupled:
                report.add_note("realification: decoupled form unavailable, compared complex and coupled paths only")
        else:
            report.add_note("realification of the source skipped: Hamiltonian is time dependent")
        report.add_check(
            "realification_random",
            checks.random_realification_residual(rng, grid, scenario.dim),
            tolerances["realification"],
        )

        report.add_check("integrator_order", checks.integrator_order_ratio(), tolerances["richardson"], mode="min")

        files = {"omega.csv": gauge_csv(g)}
        return RunResult(report, files).finalize()


__all__ = ["RunResult", "ScenarioProcessor", "NETLIST_SAMPLE_POINTS"]
