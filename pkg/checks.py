"""
Residual computations behind the ``verify`` command.

Every function returns plain floats so the pipeline can record them in a
Report. Randomized draws take a numpy Generator; callers seed it from the
scenario seed so a run is reproducible.
"""

from __future__ import annotations

from typing import Dict, Iterable, Optional, Tuple

import numpy as np
from scipy.linalg import eigh

from gauge import (
    GaugePair,
    GaugeSolution,
    apply_gauge_map,
    commutator_norm,
    compose,
    conjugate_propagator,
    intertwining_residual,
    inverse_gauge,
    map_hamiltonian,
    map_state,
    solve_omega1,
    transitive_solution,
)
from logging_config import setup_logger
from quantum_model import HamiltonianSpec, StateVector, TimeGrid, evolve_state, propagator, states_to_array
from realification import (
    build_real_system,
    decomplexify,
    evolve_coupled,
    evolve_decoupled,
    initial_conditions_from_quantum,
)
from utils import max_norm

logger = setup_logger(__name__)

RANDOM_DRAWS = 3
PROPAGATOR_PAIRS = 10
GROUP_LAW_DIMS = (2, 3, 4, 5, 6)
# Realification draws with a worse-conditioned H1 are redrawn.
REAL_PART_CONDITION = 20.0


# --------------------------------------------------------------------------
# Random draws
# --------------------------------------------------------------------------


def random_hermitian(rng: np.random.Generator, n: int, scale: Optional[float] = None) -> np.ndarray:
    """
    (X + X^dagger) / 2 for complex Gaussian X, exactly Hermitian in floating
    point. The default scale keeps the spectral radius near one.
    """
    scale = 0.5 / np.sqrt(n) if scale is None else scale
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (X + X.conj().T)


def random_nonsingular(rng: np.random.Generator, n: int) -> np.ndarray:
    """2I plus a complex Gaussian of spectral norm about one, so well conditioned."""
    sigma = 1.0 / np.sqrt(4.0 * n)
    X = sigma * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2.0)
    return 2.0 * np.eye(n) + X


def random_hermitian_with_real_part(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random Hermitian H whose real part is comfortably nonsingular."""
    for _ in range(100):
        H = random_hermitian(rng, n)
        if np.linalg.cond(H.real) <= REAL_PART_CONDITION:
            return H
    raise RuntimeError(f"No well-conditioned real part found in 100 draws for n={n}")


def _constant(matrix: np.ndarray) -> HamiltonianSpec:
    return HamiltonianSpec.constant(matrix, hermitian_hint=True)


# --------------------------------------------------------------------------
# Group laws of the induced map
# --------------------------------------------------------------------------


def group_law_residuals(
    rng: np.random.Generator,
    dims: Iterable[int] = GROUP_LAW_DIMS,
    draws: int = RANDOM_DRAWS,
) -> Dict[str, float]:
    """
    Pointwise laws on random nonsingular omega, omega' with random derivatives:
    composition, identity and inverse. Returns the max entrywise defect of each.
    """
    worst = {"composition": 0.0, "identity": 0.0, "inverse": 0.0}
    for n in dims:
        for _ in range(draws):
            w1, w2 = random_nonsingular(rng, n), random_nonsingular(rng, n)
            w1_dot, w2_dot = random_nonsingular(rng, n), random_nonsingular(rng, n)
            H = random_hermitian(rng, n)

            two_steps = apply_gauge_map(w1, w1_dot, apply_gauge_map(w2, w2_dot, H))
            one_step = apply_gauge_map(w1 @ w2, w1_dot @ w2 + w1 @ w2_dot, H)
            worst["composition"] = max(worst["composition"], max_norm(two_steps - one_step))

            unchanged = apply_gauge_map(np.eye(n), np.zeros((n, n)), H)
            worst["identity"] = max(worst["identity"], max_norm(unchanged - H))

            w1_inv = np.linalg.inv(w1)
            round_trip = apply_gauge_map(w1_inv, -(w1_inv @ w1_dot @ w1_inv), apply_gauge_map(w1, w1_dot, H))
            worst["inverse"] = max(worst["inverse"], max_norm(round_trip - H))
    return worst


def commutation_transfer(rng: np.random.Generator, grid: TimeGrid, n: int) -> Tuple[float, float]:
    """
    Build commuting gauges from two commuting constant Hamiltonians and compare
    the two orders of the induced maps on a random H.

    Returns (map commutator defect, max ||[omega, omega']||).
    """
    H_a = random_hermitian(rng, n)
    _, vectors = eigh(H_a)
    H_b = vectors @ np.diag(rng.normal(size=n)) @ vectors.conj().T
    H_b = 0.5 * (H_b + H_b.conj().T)

    g = solve_omega1(_constant(H_a), grid)
    g_prime = solve_omega1(_constant(H_b), grid)
    H = random_hermitian(rng, n)

    defect = 0.0
    for j in range(len(grid)):
        forward = apply_gauge_map(g.omega[j], g.omega_dot[j], apply_gauge_map(g_prime.omega[j], g_prime.omega_dot[j], H))
        backward = apply_gauge_map(g_prime.omega[j], g_prime.omega_dot[j], apply_gauge_map(g.omega[j], g.omega_dot[j], H))
        defect = max(defect, max_norm(forward - backward))
    return defect, commutator_norm(g, g_prime)


# --------------------------------------------------------------------------
# Equivalence relation
# --------------------------------------------------------------------------


def reflexivity_residual(source: HamiltonianSpec, grid: TimeGrid) -> float:
    """Transitive solution from H to itself must be the identity."""
    g = transitive_solution(GaugePair(source, source), grid)
    return max(max_norm(g.omega - np.eye(source.dim)), intertwining_residual(g, source, source))


def symmetry_residual(g: GaugeSolution, source: HamiltonianSpec, target: HamiltonianSpec) -> float:
    """inverse_gauge(g) must connect target back to source."""
    return intertwining_residual(inverse_gauge(g), target, source)


def transitivity_residual(
    rng: np.random.Generator,
    g: GaugeSolution,
    source: HamiltonianSpec,
    target: HamiltonianSpec,
) -> float:
    """Chain source -> target -> H'' and check the composite connects source to H''."""
    third = _constant(random_hermitian(rng, source.dim))
    onward = transitive_solution(GaugePair(target, third), g.grid)
    return intertwining_residual(compose(onward, g), source, third)


def endomorphism_residual(g: GaugeSolution, source: HamiltonianSpec) -> float:
    """max_j ||K - K^dagger|| for K = Omega_omega(H)(t_j)."""
    mapped = map_hamiltonian(g, source)
    return max_norm(mapped - np.conj(np.swapaxes(mapped, 1, 2)))


# --------------------------------------------------------------------------
# States and propagators
# --------------------------------------------------------------------------


def transport_residual(
    g: GaugeSolution,
    source: HamiltonianSpec,
    target: HamiltonianSpec,
    psi0: StateVector,
) -> float:
    """Map-then-evolve against evolve-then-map along the whole grid."""
    grid = g.grid
    mapped = states_to_array(map_state(g, evolve_state(source, psi0, grid)))
    psi0_prime = StateVector(g.omega[0] @ psi0.entries, psi0.time)
    direct = states_to_array(evolve_state(target, psi0_prime, grid))
    return max_norm(mapped - direct)


def random_transport_residual(rng: np.random.Generator, grid: TimeGrid, n: int, draws: int = RANDOM_DRAWS) -> float:
    worst = 0.0
    for _ in range(draws):
        source = _constant(random_hermitian(rng, n))
        target = _constant(random_hermitian(rng, n))
        entries = rng.normal(size=n) + 1j * rng.normal(size=n)
        psi0 = StateVector(entries / np.linalg.norm(entries), grid.t0)
        g = transitive_solution(GaugePair(source, target), grid)
        worst = max(worst, transport_residual(g, source, target, psi0))
    return worst


def propagator_residual(
    rng: np.random.Generator,
    g: GaugeSolution,
    source: HamiltonianSpec,
    target: HamiltonianSpec,
    hermitian: bool,
    pairs: int = PROPAGATOR_PAIRS,
) -> float:
    """||U'(t, s) - omega(t) U(t, s) omega(s)^-1|| at seeded node pairs."""
    U = propagator(source, g.grid)
    U_prime = propagator(target, g.grid)
    indices = rng.integers(0, len(g.grid), size=(pairs, 2))
    worst = 0.0
    for t_index, s_index in indices:
        conjugated = conjugate_propagator(g, U, int(s_index), int(t_index), hermitian=hermitian)
        worst = max(worst, max_norm(U_prime.between(int(t_index), int(s_index)) - conjugated))
    return worst


# --------------------------------------------------------------------------
# Realification and integrator
# --------------------------------------------------------------------------


def realification_residual(H: np.ndarray, psi0: StateVector, grid: TimeGrid) -> Tuple[float, bool]:
    """
    Complex, coupled-real and (when available) decoupled-real paths compared
    on both components. Returns (max deviation, whether the decoupled path ran).
    """
    spec = HamiltonianSpec.constant(H)
    reference = states_to_array(evolve_state(spec, psi0, grid))
    sys = build_real_system(H)

    coupled = evolve_coupled(sys, decomplexify(psi0), grid)
    phi1 = np.stack([state.phi1 for state in coupled])
    phi2 = np.stack([state.phi2 for state in coupled])
    deviation = max(max_norm(phi1 - reference.real), max_norm(phi2 - reference.imag))

    if sys.decoupled_valid:
        phi1_0, phidot1_0, phi2_0, phidot2_0 = initial_conditions_from_quantum(sys, psi0)
        real_run = evolve_decoupled(sys, phi1_0, phidot1_0, grid)
        imag_run = evolve_decoupled(sys, phi2_0, phidot2_0, grid)
        deviation = max(deviation, max_norm(real_run.q - reference.real), max_norm(imag_run.q - reference.imag))
    return deviation, sys.decoupled_valid


def random_realification_residual(rng: np.random.Generator, grid: TimeGrid, n: int, draws: int = RANDOM_DRAWS) -> float:
    worst = 0.0
    for _ in range(draws):
        H = random_hermitian_with_real_part(rng, n)
        entries = rng.normal(size=n) + 1j * rng.normal(size=n)
        psi0 = StateVector(entries / np.linalg.norm(entries), grid.t0)
        deviation, _ = realification_residual(H, psi0, grid)
        worst = max(worst, deviation)
    return worst


def richardson_errors(spec: HamiltonianSpec, psi0: StateVector, grid: TimeGrid) -> Tuple[float, float]:
    """
    Max state error of the N and 2N step runs measured against the 4N run on
    the N-step nodes.
    """
    coarse = states_to_array(evolve_state(spec, psi0, grid))
    medium = states_to_array(evolve_state(spec, psi0, grid.refined(2)))[::2]
    fine = states_to_array(evolve_state(spec, psi0, grid.refined(4)))[::4]
    return max_norm(coarse - fine), max_norm(medium - fine)


def integrator_order_ratio(steps: int = 64) -> float:
    """Error reduction from halving the step on H = sigma_z over [0, 2 pi]."""
    spec = _constant(np.diag([1.0, -1.0]).astype(complex))
    psi0 = StateVector(np.array([1.0, 1.0]) / np.sqrt(2.0), 0.0)

    def error(grid: TimeGrid) -> float:
        nodes = grid.nodes
        exact = np.stack([np.exp(-1j * nodes), np.exp(1j * nodes)], axis=1) / np.sqrt(2.0)
        return max_norm(states_to_array(evolve_state(spec, psi0, grid)) - exact)

    grid = TimeGrid(0.0, 2.0 * np.pi, steps)
    coarse, fine = error(grid), error(grid.refined(2))
    logger.debug("Integrator order: error %.3g at %d steps, %.3g at %d steps", coarse, steps, fine, 2 * steps)
    return coarse / fine


__all__ = [
    "RANDOM_DRAWS",
    "PROPAGATOR_PAIRS",
    "random_hermitian",
    "random_nonsingular",
    "random_hermitian_with_real_part",
    "group_law_residuals",
    "commutation_transfer",
    "reflexivity_residual",
    "symmetry_residual",
    "transitivity_residual",
    "endomorphism_residual",
    "transport_residual",
    "random_transport_residual",
    "propagator_residual",
    "realification_residual",
    "random_realification_residual",
    "richardson_errors",
    "integrator_order_ratio",
]
