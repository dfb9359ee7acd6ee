"""
Gauge (local) transformations between finite-dimensional quantum systems.

A nonsingular, time-dependent omega acts on states as psi' = omega psi and on
Hamiltonians as

    Omega_omega(H) = omega H omega^-1 + i (d/dt omega) omega^-1.

omega connects (H, H') when i omega' = H' omega - omega H. The transitive
solution omega = omega1 omega2 combines i omega1' = H' omega1 with
i omega2' = -omega2 H. It is one of infinitely many connecting gauges; this
module always builds it from identity seeds unless told otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.linalg import expm

from errors import DimensionMismatchError, GridMismatchError, SingularityError
from integrators import rk4_integrate
from logging_config import setup_logger
from quantum_model import (
    CONDITION_LIMIT,
    HamiltonianSpec,
    PropagatorGrid,
    StateVector,
    TimeGrid,
    ensure_nonsingular,
    eval_hamiltonian,
)
from utils import max_norm

logger = setup_logger(__name__)

UNITARY_TOLERANCE = 1e-10


class Backend(str, Enum):
    """Provenance of a GaugeSolution."""

    MAGNUS_CONSTANT = "magnus_constant"  # exact first-order Magnus (constant or commuting family)
    RK4_INTEGRATED = "rk4_integrated"
    ANALYTIC_PRODUCT = "analytic_product"
    COMPOSED = "composed"


@dataclass(frozen=True, eq=False)
class GaugeSolution:
    """omega(t_j) and d/dt omega(t_j) sampled on every node of ``grid``."""

    grid: TimeGrid
    omega: np.ndarray
    omega_dot: np.ndarray
    backend: Backend
    seed: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        omega = np.array(self.omega, dtype=complex)
        omega_dot = np.array(self.omega_dot, dtype=complex)
        if omega.ndim != 3 or omega.shape[0] != len(self.grid) or omega.shape[1] != omega.shape[2]:
            raise DimensionMismatchError(f"omega samples of shape {omega.shape} do not match the grid")
        if omega_dot.shape != omega.shape:
            raise DimensionMismatchError(f"omega_dot shape {omega_dot.shape} differs from omega {omega.shape}")

        singular_values = np.linalg.svd(omega, compute_uv=False)
        bad = np.nonzero(singular_values[:, -1] <= singular_values[:, 0] / CONDITION_LIMIT)[0]
        if bad.size:
            raise SingularityError(f"omega is singular at node {int(bad[0])} (t={self.grid.nodes[bad[0]]:.6g})")

        seed = omega[0].copy() if self.seed is None else np.array(self.seed, dtype=complex)
        for array in (omega, omega_dot, seed):
            array.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "omega_dot", omega_dot)
        object.__setattr__(self, "seed", seed)
        object.__setattr__(self, "backend", Backend(self.backend))

    @property
    def dim(self) -> int:
        return self.omega.shape[1]

    def interpolate(self, t: float) -> np.ndarray:
        """
        Linear interpolation of omega between nodes.

        Lossy: the result is neither on the exact solution nor guaranteed
        nonsingular. Use node values wherever possible.
        """
        nodes = self.grid.nodes
        if not nodes[0] <= t <= nodes[-1]:
            raise ValueError(f"t={t} outside [{nodes[0]}, {nodes[-1]}]")
        position = (t - nodes[0]) / self.grid.step
        left = min(int(np.floor(position)), self.grid.steps - 1)
        weight = position - left
        return (1.0 - weight) * self.omega[left] + weight * self.omega[left + 1]

    def is_unitary(self, tolerance: float = UNITARY_TOLERANCE) -> bool:
        return unitarity_deviation(self) <= tolerance

    def derivative_consistency(self) -> float:
        """
        Centered-difference cross-check of omega_dot on interior nodes,
        relative to max ||omega_dot||_max. Small when omega_dot is consistent.
        """
        if self.grid.steps < 2:
            return 0.0
        centered = (self.omega[2:] - self.omega[:-2]) / (2.0 * self.grid.step)
        scale = max_norm(self.omega_dot)
        if scale == 0.0:
            return max_norm(centered)
        return max_norm(centered - self.omega_dot[1:-1]) / scale


@dataclass(frozen=True, eq=False)
class GaugePair:
    """Departure Hamiltonian ``source`` (H) and arrival Hamiltonian ``target`` (H')."""

    source: HamiltonianSpec
    target: HamiltonianSpec

    def __post_init__(self) -> None:
        if self.source.dim != self.target.dim:
            raise DimensionMismatchError(
                f"Source dimension {self.source.dim} differs from target dimension {self.target.dim}"
            )

    @property
    def dim(self) -> int:
        return self.source.dim


# --------------------------------------------------------------------------
# Pointwise map
# --------------------------------------------------------------------------


def apply_gauge_map(omega: np.ndarray, omega_dot: np.ndarray, H: np.ndarray) -> np.ndarray:
    """omega H omega^-1 + i omega_dot omega^-1 at a single time."""
    ensure_nonsingular(omega, "omega")
    omega_inv = np.linalg.inv(omega)
    return omega @ H @ omega_inv + 1j * (omega_dot @ omega_inv)


def map_hamiltonian(g: GaugeSolution, source: HamiltonianSpec) -> np.ndarray:
    """Omega_omega(H)(t_j) on every node; shape (nodes, n, n)."""
    _check_dims(g, source.dim)
    return np.stack(
        [apply_gauge_map(g.omega[j], g.omega_dot[j], eval_hamiltonian(source, t)) for j, t in enumerate(g.grid.nodes)]
    )


def difference_derivative(omega: np.ndarray, step: float) -> np.ndarray:
    """
    Fourth-order finite-difference d/dt of node samples along axis 0.

    Interior nodes use the five-point centered stencil and the two nodes at
    each end use five-point one-sided stencils. Grids with fewer than five
    nodes fall back to second-order np.gradient.
    """
    omega = np.asarray(omega)
    if len(omega) < 5:
        return np.gradient(omega, step, axis=0, edge_order=2)
    out = np.empty_like(omega)
    out[2:-2] = (omega[:-4] - 8.0 * omega[1:-3] + 8.0 * omega[3:-1] - omega[4:]) / (12.0 * step)
    head, tail = omega[:5], omega[-5:]
    out[0] = (-25.0 * head[0] + 48.0 * head[1] - 36.0 * head[2] + 16.0 * head[3] - 3.0 * head[4]) / (12.0 * step)
    out[1] = (-3.0 * head[0] - 10.0 * head[1] + 18.0 * head[2] - 6.0 * head[3] + head[4]) / (12.0 * step)
    out[-2] = (3.0 * tail[4] + 10.0 * tail[3] - 18.0 * tail[2] + 6.0 * tail[1] - tail[0]) / (12.0 * step)
    out[-1] = (25.0 * tail[4] - 48.0 * tail[3] + 36.0 * tail[2] - 16.0 * tail[1] + 3.0 * tail[0]) / (12.0 * step)
    return out


def node_residuals(
    g: GaugeSolution,
    source: HamiltonianSpec,
    target: HamiltonianSpec,
    *,
    stored_derivative: bool = False,
) -> np.ndarray:
    """
    ||i omega' - (H' omega - omega H)||_max at every node.

    omega' is differentiated from the omega samples, so an inaccurate omega
    shows up here. ``stored_derivative=True`` uses g.omega_dot instead, which
    for the ODE backends only re-checks the right-hand side.
    """
    _check_dims(g, source.dim)
    _check_dims(g, target.dim)
    omega_dot = g.omega_dot if stored_derivative else difference_derivative(g.omega, g.grid.step)
    residuals = np.empty(len(g.grid))
    for j, t in enumerate(g.grid.nodes):
        H = eval_hamiltonian(source, t)
        H_prime = eval_hamiltonian(target, t)
        defect = 1j * omega_dot[j] - (H_prime @ g.omega[j] - g.omega[j] @ H)
        residuals[j] = max_norm(defect)
    return residuals


def intertwining_residual(
    g: GaugeSolution,
    source: HamiltonianSpec,
    target: HamiltonianSpec,
    *,
    stored_derivative: bool = False,
) -> float:
    """Max intertwining defect over interior nodes."""
    residuals = node_residuals(g, source, target, stored_derivative=stored_derivative)
    interior = residuals[1:-1] if len(residuals) > 2 else residuals
    return float(np.max(interior))


# --------------------------------------------------------------------------
# Construction
# --------------------------------------------------------------------------


def identity_gauge(grid: TimeGrid, dim: int) -> GaugeSolution:
    omega = np.broadcast_to(np.eye(dim, dtype=complex), (len(grid), dim, dim))
    return GaugeSolution(grid, omega, np.zeros_like(omega), Backend.ANALYTIC_PRODUCT)


def gauge_from_functions(
    grid: TimeGrid,
    omega_fn: Callable[[float], np.ndarray],
    omega_dot_fn: Callable[[float], np.ndarray],
) -> GaugeSolution:
    """Sample a closed-form omega and its analytic derivative on the grid."""
    nodes = grid.nodes
    omega = np.stack([np.asarray(omega_fn(t), dtype=complex) for t in nodes])
    omega_dot = np.stack([np.asarray(omega_dot_fn(t), dtype=complex) for t in nodes])
    return GaugeSolution(grid, omega, omega_dot, Backend.ANALYTIC_PRODUCT)


def _seed_matrix(seed: Optional[np.ndarray], dim: int) -> np.ndarray:
    if seed is None:
        return np.eye(dim, dtype=complex)
    seed = np.asarray(seed, dtype=complex)
    if seed.shape != (dim, dim):
        raise DimensionMismatchError(f"Seed of shape {seed.shape} for dimension {dim}")
    ensure_nonsingular(seed, "gauge seed")
    return seed


def _magnus_exponents(spec: HamiltonianSpec, grid: TimeGrid) -> np.ndarray:
    """-i * integral of H from t0 to every node, stacked."""
    t0 = grid.t0
    return np.stack([-1j * spec.integral(t0, t) for t in grid.nodes])


def _pick_backend(spec: HamiltonianSpec, method: str) -> Backend:
    if method not in {"auto", "magnus", "rk4"}:
        raise ValueError(f"Unknown gauge method {method!r}")
    series_terminates = spec.is_constant() or spec.terms_commute()
    if method == "magnus":
        if not series_terminates:
            raise ValueError("Magnus closed form only applies to constant or commuting Hamiltonian families")
        return Backend.MAGNUS_CONSTANT
    if method == "rk4" or not series_terminates:
        return Backend.RK4_INTEGRATED
    return Backend.MAGNUS_CONSTANT


def solve_omega1(
    target: HamiltonianSpec,
    grid: TimeGrid,
    seed: Optional[np.ndarray] = None,
    method: str = "auto",
) -> GaugeSolution:
    """Solve i omega1' = H'(t) omega1 with omega1(t0) = seed (identity by default)."""
    seed = _seed_matrix(seed, target.dim)
    backend = _pick_backend(target, method)
    nodes = grid.nodes
    logger.debug("Solving omega1 on %d nodes with backend %s", len(nodes), backend.value)

    if backend is Backend.MAGNUS_CONSTANT:
        omega = expm(_magnus_exponents(target, grid)) @ seed
    else:
        omega = rk4_integrate(lambda t, W: -1j * (eval_hamiltonian(target, t) @ W), seed, nodes)

    omega_dot = np.stack([-1j * (eval_hamiltonian(target, t) @ omega[j]) for j, t in enumerate(nodes)])
    return GaugeSolution(grid, omega, omega_dot, backend, seed)


def solve_omega2(
    source: HamiltonianSpec,
    grid: TimeGrid,
    seed: Optional[np.ndarray] = None,
    method: str = "auto",
) -> GaugeSolution:
    """Solve i omega2' = -omega2 H(t) with omega2(t0) = seed (identity by default)."""
    seed = _seed_matrix(seed, source.dim)
    backend = _pick_backend(source, method)
    nodes = grid.nodes
    logger.debug("Solving omega2 on %d nodes with backend %s", len(nodes), backend.value)

    if backend is Backend.MAGNUS_CONSTANT:
        omega = seed @ expm(-_magnus_exponents(source, grid))
    else:
        omega = rk4_integrate(lambda t, W: 1j * (W @ eval_hamiltonian(source, t)), seed, nodes)

    omega_dot = np.stack([1j * (omega[j] @ eval_hamiltonian(source, t)) for j, t in enumerate(nodes)])
    return GaugeSolution(grid, omega, omega_dot, backend, seed)


def transitive_solution(
    pair: GaugePair,
    grid: TimeGrid,
    seed: Optional[np.ndarray] = None,
    method: str = "auto",
) -> GaugeSolution:
    """omega = omega1 omega2 connecting pair.source to pair.target; ``seed`` seeds omega1."""
    omega1 = solve_omega1(pair.target, grid, seed=seed, method=method)
    omega2 = solve_omega2(pair.source, grid, method=method)
    return compose(omega1, omega2)


# --------------------------------------------------------------------------
# Group operations
# --------------------------------------------------------------------------


def _same_grid(a: TimeGrid, b: TimeGrid) -> bool:
    return a.steps == b.steps and a.t0 == b.t0 and a.t1 == b.t1


def _check_dims(g: GaugeSolution, dim: int) -> None:
    if g.dim != dim:
        raise DimensionMismatchError(f"Gauge of dimension {g.dim} applied to dimension {dim}")


def compose(g1: GaugeSolution, g2: GaugeSolution) -> GaugeSolution:
    """omega1 omega2 node-wise; Omega_{omega1} after Omega_{omega2} equals Omega_{omega1 omega2}."""
    if not _same_grid(g1.grid, g2.grid):
        raise GridMismatchError(f"Cannot compose gauges on different grids {g1.grid} and {g2.grid}")
    _check_dims(g1, g2.dim)
    omega = g1.omega @ g2.omega
    omega_dot = g1.omega_dot @ g2.omega + g1.omega @ g2.omega_dot
    return GaugeSolution(g1.grid, omega, omega_dot, Backend.COMPOSED)


def inverse_gauge(g: GaugeSolution) -> GaugeSolution:
    """omega^-1 node-wise with d/dt omega^-1 = -omega^-1 omega' omega^-1."""
    omega_inv = np.linalg.inv(g.omega)
    omega_dot = -(omega_inv @ g.omega_dot @ omega_inv)
    return GaugeSolution(g.grid, omega_inv, omega_dot, g.backend)


def unitarity_deviation(g: GaugeSolution) -> float:
    """max_j ||omega(t_j)^dagger omega(t_j) - I||_max."""
    gram = np.conj(np.swapaxes(g.omega, 1, 2)) @ g.omega
    return max_norm(gram - np.eye(g.dim))


def commutator_norm(g1: GaugeSolution, g2: GaugeSolution) -> float:
    """max_j ||[omega1(t_j), omega2(t_j)]||_max."""
    if not _same_grid(g1.grid, g2.grid):
        raise GridMismatchError("Gauges live on different grids")
    return max_norm(g1.omega @ g2.omega - g2.omega @ g1.omega)


# --------------------------------------------------------------------------
# Action on states and propagators
# --------------------------------------------------------------------------


def map_state(g: GaugeSolution, psi_path: Sequence[StateVector]) -> List[StateVector]:
    """psi'(t_j) = omega(t_j) psi(t_j) along an aligned path."""
    nodes = g.grid.nodes
    if len(psi_path) != len(nodes):
        raise GridMismatchError(f"Path with {len(psi_path)} states for a gauge on {len(nodes)} nodes")
    tolerance = 1e-9 * max(1.0, abs(nodes[-1]))
    mapped = []
    for j, state in enumerate(psi_path):
        if state.dim != g.dim:
            raise DimensionMismatchError(f"State of dimension {state.dim} for a {g.dim}-dimensional gauge")
        if abs(state.time - nodes[j]) > tolerance:
            raise GridMismatchError(f"State {j} at t={state.time} is off the gauge grid node {nodes[j]}")
        mapped.append(StateVector(g.omega[j] @ state.entries, nodes[j]))
    return mapped


def conjugate_propagator(
    g: GaugeSolution,
    U: PropagatorGrid,
    s_index: int,
    t_index: int,
    hermitian: bool = False,
) -> np.ndarray:
    """
    U'(t, s) = omega(t) U(t, s) omega(s)^-1.

    When both Hamiltonians are Hermitian (``hermitian``) and omega(s) is
    unitary, omega(s)^-1 is taken as omega(s)^dagger.
    """
    if not _same_grid(g.grid, U.grid):
        raise GridMismatchError("Gauge and propagator live on different grids")
    _check_dims(g, U.dim)
    for index in (s_index, t_index):
        if not 0 <= index < len(g.grid):
            raise IndexError(f"Node index {index} outside grid with {len(g.grid)} nodes")

    omega_s = g.omega[s_index]
    unitary_s = max_norm(omega_s.conj().T @ omega_s - np.eye(g.dim)) <= UNITARY_TOLERANCE
    if hermitian and unitary_s:
        omega_s_inv = omega_s.conj().T
    else:
        ensure_nonsingular(omega_s, f"omega(t_{s_index})")
        omega_s_inv = np.linalg.inv(omega_s)
    return g.omega[t_index] @ U.between(t_index, s_index) @ omega_s_inv


__all__ = [
    "Backend",
    "GaugeSolution",
    "GaugePair",
    "apply_gauge_map",
    "map_hamiltonian",
    "difference_derivative",
    "node_residuals",
    "intertwining_residual",
    "identity_gauge",
    "gauge_from_functions",
    "solve_omega1",
    "solve_omega2",
    "transitive_solution",
    "compose",
    "inverse_gauge",
    "unitarity_deviation",
    "commutator_norm",
    "map_state",
    "conjugate_propagator",
]
