"""
Finite-dimensional quantum systems and their Schrodinger dynamics.

Natural units (hbar = 1): states obey i d/dt psi = H(t) psi. Hamiltonians
are finite sums of profile-weighted constant matrices, so H(t) is evaluated
exactly at any time. Every value type here is immutable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.linalg import svdvals

from errors import DimensionMismatchError, NonHermitianError, SingularityError
from integrators import rk4_integrate
from logging_config import setup_logger
from utils import max_norm

logger = setup_logger(__name__)

HERMITIAN_TOLERANCE = 1e-12
CONDITION_LIMIT = 1e10


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def ensure_nonsingular(matrix: np.ndarray, what: str = "matrix") -> None:
    """Raise SingularityError when the condition number exceeds CONDITION_LIMIT."""
    singular_values = svdvals(matrix)
    if singular_values[0] == 0.0 or singular_values[-1] <= singular_values[0] / CONDITION_LIMIT:
        condition = np.inf if singular_values[-1] == 0.0 else singular_values[0] / singular_values[-1]
        raise SingularityError(f"{what} is singular (condition number {condition:.3g} > {CONDITION_LIMIT:.0e})")


# --------------------------------------------------------------------------
# Time profiles
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstProfile:
    value: float = 1.0

    kind = "const"

    @property
    def is_constant(self) -> bool:
        return True

    def __call__(self, t: float) -> float:
        return float(self.value)

    def integral(self, t0: float, t: float) -> float:
        return float(self.value) * (t - t0)


@dataclass(frozen=True)
class PolyProfile:
    """c0 + c1 t + c2 t^2 + ... with real coefficients in ascending order."""

    coeffs: Tuple[float, ...]

    kind = "poly"

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.coeffs:
            raise ValueError("Polynomial profile needs at least one coefficient")

    @property
    def is_constant(self) -> bool:
        return all(c == 0.0 for c in self.coeffs[1:])

    def __call__(self, t: float) -> float:
        return float(P.polyval(t, self.coeffs))

    def integral(self, t0: float, t: float) -> float:
        antiderivative = P.polyint(self.coeffs)
        return float(P.polyval(t, antiderivative) - P.polyval(t0, antiderivative))


@dataclass(frozen=True)
class CosProfile:
    """a * cos(frequency * t + phase)."""

    amplitude: float
    frequency: float
    phase: float = 0.0

    kind = "cos"

    @property
    def is_constant(self) -> bool:
        return self.frequency == 0.0 or self.amplitude == 0.0

    def __call__(self, t: float) -> float:
        return self.amplitude * float(np.cos(self.frequency * t + self.phase))

    def integral(self, t0: float, t: float) -> float:
        if self.frequency == 0.0:
            return self.amplitude * float(np.cos(self.phase)) * (t - t0)
        return self.amplitude / self.frequency * float(
            np.sin(self.frequency * t + self.phase) - np.sin(self.frequency * t0 + self.phase)
        )


Profile = Union[ConstProfile, PolyProfile, CosProfile]


# --------------------------------------------------------------------------
# Value types
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    """H(t) = sum_k f_k(t) H_k over constant n x n complex matrices H_k."""

    terms: Tuple[Tuple[Profile, np.ndarray], ...]
    hermitian_hint: bool = False
    dim: int = field(init=False)

    def __post_init__(self) -> None:
        if not self.terms:
            raise DimensionMismatchError("HamiltonianSpec needs at least one term")

        normalised = []
        for profile, matrix in self.terms:
            matrix = np.array(matrix, dtype=complex)
            normalised.append((profile, _frozen(matrix)))

        dim = normalised[0][1].shape[0] if normalised[0][1].ndim == 2 else 0
        for index, (_, matrix) in enumerate(normalised):
            if matrix.ndim != 2 or matrix.shape != (dim, dim) or dim < 1:
                raise DimensionMismatchError(
                    f"Term {index} has shape {matrix.shape}; every term must be {dim}x{dim} with n >= 1"
                )
        object.__setattr__(self, "terms", tuple(normalised))
        object.__setattr__(self, "dim", dim)

    @classmethod
    def constant(cls, matrix: np.ndarray, *, hermitian_hint: bool = False) -> "HamiltonianSpec":
        return cls(terms=((ConstProfile(1.0), matrix),), hermitian_hint=hermitian_hint)

    def is_constant(self) -> bool:
        return all(profile.is_constant for profile, _ in self.terms)

    def terms_commute(self) -> bool:
        """True when all term matrices commute, so H(t) commutes with its own integral."""
        matrices = [matrix for _, matrix in self.terms]
        scale = max(1.0, max(max_norm(m) for m in matrices))
        for a in range(len(matrices)):
            for b in range(a + 1, len(matrices)):
                commutator = matrices[a] @ matrices[b] - matrices[b] @ matrices[a]
                if max_norm(commutator) > HERMITIAN_TOLERANCE * scale * scale:
                    return False
        return True

    def integral(self, t0: float, t: float) -> np.ndarray:
        """Exact integral of H over [t0, t]."""
        result = np.zeros((self.dim, self.dim), dtype=complex)
        for profile, matrix in self.terms:
            result = result + profile.integral(t0, t) * matrix
        return result


@dataclass(frozen=True, eq=False)
class StateVector:
    """A point psi(t) in C^n. Norm is reported, never forced to one."""

    entries: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        entries = np.array(self.entries, dtype=complex).reshape(-1)
        if entries.size < 1:
            raise DimensionMismatchError("StateVector needs at least one entry")
        if not np.all(np.isfinite(entries)):
            raise ValueError("StateVector entries must be finite")
        object.__setattr__(self, "entries", _frozen(entries))
        object.__setattr__(self, "time", float(self.time))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of [t0, t1] into ``steps`` intervals."""

    t0: float
    t1: float
    steps: int

    def __post_init__(self) -> None:
        if not (np.isfinite(self.t0) and np.isfinite(self.t1)) or not self.t0 < self.t1:
            raise ValueError(f"TimeGrid needs finite t0 < t1, got [{self.t0}, {self.t1}]")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"TimeGrid steps must be a positive integer, got {self.steps}")
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "t1", float(self.t1))
        object.__setattr__(self, "steps", int(self.steps))

    @property
    def step(self) -> float:
        return (self.t1 - self.t0) / self.steps

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.steps + 1)

    def __len__(self) -> int:
        return self.steps + 1

    def window(self, start: int, stop: int) -> "TimeGrid":
        """Sub-grid over nodes[start]..nodes[stop], aligned with this grid."""
        if not 0 <= start < stop <= self.steps:
            raise IndexError(f"Window [{start}, {stop}] outside grid with {self.steps} steps")
        nodes = self.nodes
        return TimeGrid(nodes[start], nodes[stop], stop - start)

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.t0, self.t1, self.steps * factor)


@dataclass(frozen=True, eq=False)
class PropagatorGrid:
    """U(t_j, t0) for every node t_j of ``grid``."""

    grid: TimeGrid
    U: np.ndarray

    def __post_init__(self) -> None:
        U = np.array(self.U, dtype=complex)
        if U.ndim != 3 or U.shape[0] != len(self.grid) or U.shape[1] != U.shape[2]:
            raise DimensionMismatchError(f"Propagator samples of shape {U.shape} do not match the grid")
        object.__setattr__(self, "U", _frozen(U))

    @property
    def dim(self) -> int:
        return self.U.shape[1]

    def at(self, index: int) -> np.ndarray:
        return self.U[index]

    def between(self, t_index: int, s_index: int) -> np.ndarray:
        """U(t, s) = U(t, t0) U(s, t0)^-1."""
        U_s = self.U[s_index]
        ensure_nonsingular(U_s, f"U(t_{s_index}, t0)")
        return self.U[t_index] @ np.linalg.inv(U_s)


# --------------------------------------------------------------------------
# Operations
# --------------------------------------------------------------------------


def eval_hamiltonian(spec: HamiltonianSpec, t: float) -> np.ndarray:
    """Sum_k f_k(t) H_k; lazily checks the declared Hermiticity."""
    H = np.zeros((spec.dim, spec.dim), dtype=complex)
    for profile, matrix in spec.terms:
        H = H + profile(t) * matrix
    if spec.hermitian_hint:
        deviation = max_norm(H - H.conj().T)
        if deviation > HERMITIAN_TOLERANCE:
            raise NonHermitianError(f"H({t:.6g}) declared Hermitian deviates by {deviation:.3g}")
    return H


def _check_grid_start(time: float, grid: TimeGrid) -> None:
    if abs(time - grid.t0) > 1e-12 * max(1.0, abs(grid.t0)):
        raise ValueError(f"Initial time {time} does not match grid start {grid.t0}")


def evolve_state(spec: HamiltonianSpec, psi0: StateVector, grid: TimeGrid) -> List[StateVector]:
    """psi(t_j) at every node, integrating i psi' = H(t) psi with RK4."""
    if psi0.dim != spec.dim:
        raise DimensionMismatchError(f"State of dimension {psi0.dim} for a {spec.dim}-level Hamiltonian")
    _check_grid_start(psi0.time, grid)

    nodes = grid.nodes
    path = rk4_integrate(lambda t, y: -1j * (eval_hamiltonian(spec, t) @ y), psi0.entries, nodes)
    return [StateVector(entries, t) for entries, t in zip(path, nodes)]


def propagator(spec: HamiltonianSpec, grid: TimeGrid) -> PropagatorGrid:
    """Integrate i U' = H(t) U, U(t0, t0) = I, with the same scheme as evolve_state."""
    identity = np.eye(spec.dim, dtype=complex)
    U = rk4_integrate(lambda t, Y: -1j * (eval_hamiltonian(spec, t) @ Y), identity, grid.nodes)
    return PropagatorGrid(grid=grid, U=U)


def hermiticity_check(spec: HamiltonianSpec, grid: TimeGrid) -> float:
    """Max over nodes of ||H(t) - H(t)^dagger||_max. Never raises for non-Hermitian specs."""
    deviation = 0.0
    for t in grid.nodes:
        H = np.zeros((spec.dim, spec.dim), dtype=complex)
        for profile, matrix in spec.terms:
            H = H + profile(t) * matrix
        deviation = max(deviation, max_norm(H - H.conj().T))
    return deviation


def states_to_array(path: Sequence[StateVector]) -> np.ndarray:
    return np.stack([state.entries for state in path])


__all__ = [
    "ConstProfile",
    "PolyProfile",
    "CosProfile",
    "Profile",
    "HamiltonianSpec",
    "StateVector",
    "TimeGrid",
    "PropagatorGrid",
    "eval_hamiltonian",
    "evolve_state",
    "propagator",
    "hermiticity_check",
    "ensure_nonsingular",
    "states_to_array",
    "CONDITION_LIMIT",
]
