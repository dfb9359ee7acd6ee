"""
Decomplexification of Schrodinger dynamics.

psi = phi1 + i phi2 with H = H1 + i H2 splits i psi' = H psi into a real
first-order system on R^2n. When H1 is nonsingular, eliminating phi2 gives

    phi'' + Aq phi' + Bq phi = 0,   Aq = -(H2 + H1 H2 H1^-1),
                                    Bq = H1^2 + H1 H2 H1^-1 H2,

satisfied by phi1 and phi2 alike. Aq and Bq are even in H1, so they are
shared by both sign conventions of the coupled system (see RealSystem).
For real H (H2 = 0) the form reduces to Aq = 0, Bq = H1^2 and exists even
when H1 is singular.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from errors import DimensionMismatchError, SingularRealPartError, UnsupportedSystemError
from integrators import Trajectory, rk4_integrate, second_order_integrate
from logging_config import setup_logger
from quantum_model import CONDITION_LIMIT, HamiltonianSpec, StateVector, TimeGrid, eval_hamiltonian

logger = setup_logger(__name__)

# "schrodinger": realifies psi' = -i H psi, the dynamics evolve_state integrates.
# "printed": the blocks [[H2, -H1], [H1, H2]], i.e. the realification of
# psi' = i conj(H) psi, the complex conjugate of the Schrodinger flow.
CONVENTIONS = ("schrodinger", "printed")


@dataclass(frozen=True)
class RealState:
    phi1: np.ndarray
    phi2: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        phi1 = np.array(self.phi1, dtype=float).reshape(-1)
        phi2 = np.array(self.phi2, dtype=float).reshape(-1)
        if phi1.shape != phi2.shape:
            raise DimensionMismatchError(f"phi1{phi1.shape} and phi2{phi2.shape} differ")
        if not (np.all(np.isfinite(phi1)) and np.all(np.isfinite(phi2))):
            raise ValueError("RealState entries must be finite")
        phi1.setflags(write=False)
        phi2.setflags(write=False)
        object.__setattr__(self, "phi1", phi1)
        object.__setattr__(self, "phi2", phi2)
        object.__setattr__(self, "time", float(self.time))

    @property
    def dim(self) -> int:
        return self.phi1.shape[0]

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.phi1, self.phi2])


@dataclass(frozen=True, eq=False)
class RealSystem:
    H1: np.ndarray
    H2: np.ndarray
    coupled_generator: np.ndarray
    Aq: Optional[np.ndarray]
    Bq: Optional[np.ndarray]
    decoupled_valid: bool
    convention: str = "schrodinger"
    diagnostic: Optional[str] = None
    singular_ports: Tuple[int, ...] = field(default_factory=tuple)

    @property
    def dim(self) -> int:
        return self.H1.shape[0]

    @property
    def hamiltonian(self) -> np.ndarray:
        return self.H1 + 1j * self.H2

    def coupled_rates(self, phi1: np.ndarray, phi2: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(phi1', phi2') of the coupled first-order system."""
        rates = self.coupled_generator @ np.concatenate([phi1, phi2])
        return rates[: self.dim], rates[self.dim:]


def decomplexify(psi: StateVector) -> RealState:
    """(Re psi, Im psi)."""
    return RealState(psi.entries.real.copy(), psi.entries.imag.copy(), psi.time)


def recomplexify(state: RealState) -> StateVector:
    entries = np.empty(state.dim, dtype=complex)
    entries.real = state.phi1
    entries.imag = state.phi2
    return StateVector(entries, state.time)


def coupled_generator(H1: np.ndarray, H2: np.ndarray, convention: str = "schrodinger") -> np.ndarray:
    if convention == "schrodinger":
        return np.block([[H2, H1], [-H1, H2]])
    if convention == "printed":
        return np.block([[H2, -H1], [H1, H2]])
    raise ValueError(f"Unknown realification convention {convention!r}; expected one of {CONVENTIONS}")


def decoupling_matrices(H1: np.ndarray, H2: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(Aq, Bq) for nonsingular H1."""
    H1_inv = np.linalg.inv(H1)
    similar = H1 @ H2 @ H1_inv
    Aq = -(H2 + similar)
    Bq = H1 @ H1 + similar @ H2
    return Aq, Bq


def _null_ports(H1: np.ndarray) -> Tuple[int, ...]:
    """Ports carrying the smallest right-singular vector of H1."""
    _, _, vh = np.linalg.svd(H1)
    null_vector = vh[-1]
    return tuple(int(k) + 1 for k in np.nonzero(np.abs(null_vector) > 1e-8)[0])


def build_real_system(
    hamiltonian: Union[HamiltonianSpec, np.ndarray],
    t: Optional[float] = None,
    want_decoupled: bool = True,
    convention: str = "schrodinger",
) -> RealSystem:
    """
    Realify H evaluated at a single time.

    The decoupled form is only built for time-independent H; a singular H1
    or a time-dependent spec leaves decoupled_valid False with a diagnostic.
    """
    time_dependent = False
    if isinstance(hamiltonian, HamiltonianSpec):
        time_dependent = not hamiltonian.is_constant()
        H = eval_hamiltonian(hamiltonian, 0.0 if t is None else t)
    else:
        H = np.asarray(hamiltonian, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise DimensionMismatchError(f"Hamiltonian must be square, got shape {H.shape}")

    H1 = np.ascontiguousarray(H.real)
    H2 = np.ascontiguousarray(H.imag)
    generator = coupled_generator(H1, H2, convention)

    Aq = Bq = None
    diagnostic = None
    ports: Tuple[int, ...] = ()
    if want_decoupled:
        singular_values = np.linalg.svd(H1, compute_uv=False)
        if time_dependent:
            diagnostic = "decoupled form requires a time-independent Hamiltonian"
        elif not np.any(H2):
            # Real H: phi'' = -H1^2 phi, no inverse of H1 involved.
            Aq, Bq = np.zeros_like(H1), H1 @ H1
        elif singular_values[0] == 0.0 or singular_values[-1] <= singular_values[0] / CONDITION_LIMIT:
            ports = _null_ports(H1)
            diagnostic = f"H1 = Re H is singular; null space touches ports {list(ports)}"
        else:
            Aq, Bq = decoupling_matrices(H1, H2)
        if diagnostic:
            logger.warning("Decoupled form unavailable: %s", diagnostic)

    for array in (H1, H2, generator, Aq, Bq):
        if array is not None:
            array.setflags(write=False)
    return RealSystem(
        H1=H1,
        H2=H2,
        coupled_generator=generator,
        Aq=Aq,
        Bq=Bq,
        decoupled_valid=Aq is not None,
        convention=convention,
        diagnostic=diagnostic,
        singular_ports=ports,
    )


def evolve_coupled(sys: RealSystem, state0: RealState, grid: TimeGrid) -> List[RealState]:
    """RK4 on the 2n-dimensional first-order system."""
    if state0.dim != sys.dim:
        raise DimensionMismatchError(f"Real state of dimension {state0.dim} for a {sys.dim}-level system")
    generator = sys.coupled_generator
    nodes = grid.nodes
    path = rk4_integrate(lambda _t, y: generator @ y, state0.stacked(), nodes)
    n = sys.dim
    return [RealState(y[:n], y[n:], t) for y, t in zip(path, nodes)]


def require_decoupled(sys: RealSystem) -> None:
    if sys.decoupled_valid:
        return
    message = f"Decoupled second-order form unavailable ({sys.diagnostic}); use evolve_coupled instead"
    if sys.singular_ports:
        raise SingularRealPartError(message, sys.singular_ports)
    raise UnsupportedSystemError(message)


def evolve_decoupled(
    sys: RealSystem,
    phi0: np.ndarray,
    phidot0: np.ndarray,
    grid: TimeGrid,
) -> Trajectory:
    """phi'' + Aq phi' + Bq phi = 0 from (phi0, phidot0); phi0 may be either component."""
    require_decoupled(sys)
    return second_order_integrate(sys.Aq, sys.Bq, phi0, phidot0, grid.nodes)


def initial_conditions_from_quantum(
    sys: RealSystem,
    psi0: StateVector,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(phi1(0), phi1'(0), phi2(0), phi2'(0)) implied by psi(0) and the coupled system."""
    if psi0.dim != sys.dim:
        raise DimensionMismatchError(f"State of dimension {psi0.dim} for a {sys.dim}-level system")
    state = decomplexify(psi0)
    phidot1, phidot2 = sys.coupled_rates(state.phi1, state.phi2)
    return state.phi1.copy(), phidot1, state.phi2.copy(), phidot2


def real_system_blocks(sys: RealSystem) -> List[Tuple[str, np.ndarray]]:
    """Named blocks for export; Aq/Bq only when the decoupled form exists."""
    blocks = [("H1", sys.H1), ("H2", sys.H2)]
    if sys.decoupled_valid:
        blocks += [("Aq", sys.Aq), ("Bq", sys.Bq)]
    return blocks


__all__ = [
    "CONVENTIONS",
    "RealState",
    "RealSystem",
    "decomplexify",
    "recomplexify",
    "coupled_generator",
    "decoupling_matrices",
    "build_real_system",
    "evolve_coupled",
    "evolve_decoupled",
    "initial_conditions_from_quantum",
    "require_decoupled",
    "real_system_blocks",
]
