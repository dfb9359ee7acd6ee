"""
Electric-network realization of q'' + A q' + B q = 0.

Each port k carries an L_k || C_k tandem to ground; the ports are joined by
an interaction network with admittance Y(s) = alpha + beta / s (resistors
and inductors only). Node equations give A = C^-1 alpha and
B = omega0^2 + C^-1 beta with omega0^2 = (L C)^-1. Port voltages are the
generalized coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigvalsh

from errors import (
    DimensionMismatchError,
    FrequencyAssignmentError,
    NonHermitianError,
    PoleError,
    UnsupportedSystemError,
)
from integrators import Trajectory, second_order_integrate
from logging_config import setup_logger
from quantum_model import HamiltonianSpec, StateVector, TimeGrid, eval_hamiltonian, evolve_state, states_to_array
from realification import (
    RealSystem,
    build_real_system,
    initial_conditions_from_quantum,
    require_decoupled,
)
from utils import format_float, max_norm

logger = setup_logger(__name__)

SYMMETRY_TOLERANCE = 1e-12


class FrequencyPolicy(str, Enum):
    PROPER_FREQUENCY = "proper_frequency"  # omega0^2 = diag(B), zero-diagonal beta
    EXPLICIT_INDUCTANCE = "explicit_inductance"  # caller supplies L, beta takes the residual


class ElementKind(str, Enum):
    CAPACITOR = "capacitor"
    INDUCTOR = "inductor"
    RESISTOR = "resistor"
    NEGATIVE_ELEMENT_DIAGNOSTIC = "negative-element-diagnostic"


_PREFIX = {ElementKind.CAPACITOR: "C", ElementKind.INDUCTOR: "L", ElementKind.RESISTOR: "R"}


@dataclass(frozen=True, eq=False)
class ClassicalSystem:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self) -> None:
        A = np.array(self.A, dtype=float)
        B = np.array(self.B, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or B.shape != A.shape:
            raise DimensionMismatchError(f"A{A.shape} and B{B.shape} must be equal square matrices")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise ValueError("ClassicalSystem matrices must be finite")
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @classmethod
    def from_real_system(cls, sys: RealSystem) -> "ClassicalSystem":
        require_decoupled(sys)
        return cls(sys.Aq, sys.Bq)


@dataclass(frozen=True, eq=False)
class NetworkSpec:
    C: np.ndarray
    L: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    omega0_sq: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        C = np.array(self.C, dtype=float).reshape(-1)
        L = np.array(self.L, dtype=float).reshape(-1)
        alpha = np.array(self.alpha, dtype=float)
        beta = np.array(self.beta, dtype=float)
        n = C.shape[0]
        if L.shape != (n,) or alpha.shape != (n, n) or beta.shape != (n, n):
            raise DimensionMismatchError(
                f"Network shapes disagree: C{C.shape}, L{L.shape}, alpha{alpha.shape}, beta{beta.shape}"
            )
        if np.any(C <= 0):
            raise ValueError(f"Capacitances must be positive, got {C.tolist()}")
        if np.any(L <= 0):
            raise ValueError(f"Inductances must be positive, got {L.tolist()}")
        omega0_sq = 1.0 / (L * C)
        for array in (C, L, alpha, beta, omega0_sq):
            array.setflags(write=False)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "omega0_sq", omega0_sq)

    @property
    def dim(self) -> int:
        return self.C.shape[0]

    @property
    def alpha_symmetric(self) -> bool:
        return max_norm(self.alpha - self.alpha.T) <= SYMMETRY_TOLERANCE * max(1.0, max_norm(self.alpha))

    @property
    def beta_symmetric(self) -> bool:
        return max_norm(self.beta - self.beta.T) <= SYMMETRY_TOLERANCE * max(1.0, max_norm(self.beta))

    @property
    def alpha_psd(self) -> bool:
        symmetric_part = 0.5 * (self.alpha + self.alpha.T)
        return bool(eigvalsh(symmetric_part)[0] >= -SYMMETRY_TOLERANCE * max(1.0, max_norm(self.alpha)))

    def reconstruct(self) -> ClassicalSystem:
        """(A, B) = (C^-1 alpha, omega0^2 + C^-1 beta)."""
        A = self.alpha / self.C[:, None]
        B = np.diag(self.omega0_sq) + self.beta / self.C[:, None]
        return ClassicalSystem(A, B)

    def to_dict(self) -> Dict[str, object]:
        return {
            "ports": self.dim,
            "C": self.C.tolist(),
            "L": self.L.tolist(),
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
            "omega0_sq": self.omega0_sq.tolist(),
            "passivity": passivity_report(self),
        }


@dataclass(frozen=True)
class NetlistElement:
    kind: ElementKind
    node_plus: int
    node_minus: int
    value: float
    role: str  # "tandem", "coupling" or "shunt"
    name: str = ""
    # For diagnostics: the element that would be required ("R", "L") or "" when none can be.
    required: str = ""
    reason: str = ""

    def admittance(self, s: complex) -> complex:
        kind = self.required if self.kind is ElementKind.NEGATIVE_ELEMENT_DIAGNOSTIC else _PREFIX[self.kind]
        if kind == "C":
            return s * self.value
        if kind == "L":
            return 1.0 / (s * self.value)
        if kind == "R":
            return 1.0 / self.value
        raise ValueError(f"Element {self!r} has no admittance")


@dataclass(frozen=True)
class Netlist:
    ports: int
    elements: Tuple[NetlistElement, ...]
    title: str = "gauge-bridge network"
    notes: Tuple[str, ...] = ()

    @property
    def diagnostics(self) -> List[NetlistElement]:
        return [e for e in self.elements if e.kind is ElementKind.NEGATIVE_ELEMENT_DIAGNOSTIC]

    @property
    def text(self) -> str:
        lines = [f"* {self.title}", f"* ports 1..{self.ports}, node 0 is ground"]
        lines.extend(f"* note: {note}" for note in self.notes)
        for element in self.elements:
            if element.kind is ElementKind.NEGATIVE_ELEMENT_DIAGNOSTIC:
                value = format_float(element.value) if element.required else "n/a"
                lines.append(
                    f"* diag: {element.reason} {element.required or '-'} "
                    f"{element.node_plus} {element.node_minus} {value}"
                )
            else:
                lines.append(f"{element.name} {element.node_plus} {element.node_minus} {format_float(element.value)}")
        lines.append(".end")
        return "\n".join(lines) + "\n"

    def node_admittance(self, s: complex, include_diagnostics: bool = False) -> np.ndarray:
        """Stamp every emitted element into the n x n node-admittance matrix."""
        Y = np.zeros((self.ports, self.ports), dtype=complex)
        for element in self.elements:
            if element.kind is ElementKind.NEGATIVE_ELEMENT_DIAGNOSTIC:
                if not include_diagnostics or not element.required:
                    continue
            y = element.admittance(s)
            a, b = element.node_plus, element.node_minus
            if a:
                Y[a - 1, a - 1] += y
            if b:
                Y[b - 1, b - 1] += y
            if a and b:
                Y[a - 1, b - 1] -= y
                Y[b - 1, a - 1] -= y
        return Y


def passivity_report(net: NetworkSpec) -> Dict[str, bool]:
    """Reported only; synthesis never fails on passivity."""
    netlist = emit_netlist(net)
    return {
        "alpha_symmetric": net.alpha_symmetric,
        "alpha_psd": net.alpha_psd,
        "beta_symmetric": net.beta_symmetric,
        "realizable": not netlist.diagnostics,
    }


# --------------------------------------------------------------------------
# Synthesis
# --------------------------------------------------------------------------


def synthesize(
    sys: ClassicalSystem,
    C: Optional[Sequence[float]] = None,
    policy: FrequencyPolicy = FrequencyPolicy.PROPER_FREQUENCY,
    L: Optional[Sequence[float]] = None,
) -> NetworkSpec:
    """Invert A = C^-1 alpha and B = omega0^2 + C^-1 beta for a chosen C (identity by default)."""
    n = sys.dim
    C = np.ones(n) if C is None else np.asarray(C, dtype=float).reshape(-1)
    if C.shape != (n,):
        raise DimensionMismatchError(f"{C.shape[0]} capacitances for {n} ports")
    if np.any(C <= 0):
        raise ValueError(f"Capacitances must be positive, got {C.tolist()}")

    alpha = C[:, None] * sys.A
    policy = FrequencyPolicy(policy)

    if policy is FrequencyPolicy.PROPER_FREQUENCY:
        diagonal = np.diag(sys.B)
        for k, value in enumerate(diagonal):
            if not value > 0:
                raise FrequencyAssignmentError(
                    f"Port {k + 1} has B[{k + 1},{k + 1}] = {value:.6g}; proper frequency needs a positive diagonal",
                    port=k + 1,
                )
        L = 1.0 / (C * diagonal)
        beta = C[:, None] * sys.B
        np.fill_diagonal(beta, 0.0)
    else:
        if L is None:
            raise ValueError("explicit_inductance policy needs inductance values")
        L = np.asarray(L, dtype=float).reshape(-1)
        if L.shape != (n,):
            raise DimensionMismatchError(f"{L.shape[0]} inductances for {n} ports")
        if np.any(L <= 0):
            raise ValueError(f"Inductances must be positive, got {L.tolist()}")
        beta = C[:, None] * (sys.B - np.diag(1.0 / (L * C)))

    net = NetworkSpec(C=C, L=L, alpha=alpha, beta=beta)
    logger.debug("Synthesized %d-port network with policy %s", n, policy.value)
    return net


def admittance(net: NetworkSpec, s: complex) -> np.ndarray:
    """Y(s) = alpha + beta / s."""
    if s == 0:
        raise PoleError("Y(s) has a pole at s = 0 whenever beta is present")
    return net.alpha + net.beta / s


def interaction_admittance(netlist: Netlist, net: NetworkSpec, s: complex, include_diagnostics: bool = False) -> np.ndarray:
    """Node admittance of the emitted netlist minus the nominal L||C tandems."""
    if s == 0:
        raise PoleError("Tandem admittance has a pole at s = 0")
    tandems = np.diag(s * net.C + 1.0 / (s * net.L))
    return netlist.node_admittance(s, include_diagnostics) - tandems


def _branch(kind: ElementKind, a: int, b: int, value: float, role: str) -> NetlistElement:
    return NetlistElement(kind=kind, node_plus=a, node_minus=b, value=value, role=role)


def _diagnostic(required: str, a: int, b: int, value: float, role: str, reason: str) -> NetlistElement:
    return NetlistElement(
        kind=ElementKind.NEGATIVE_ELEMENT_DIAGNOSTIC,
        node_plus=a,
        node_minus=b,
        value=value,
        role=role,
        required=required,
        reason=reason,
    )


def _admittance_element(required: str, a: int, b: int, admittance_value: float, role: str) -> Optional[NetlistElement]:
    """Resistor (conductance) or inductor (inverse inductance) element, or a diagnostic when negative."""
    if admittance_value == 0.0:
        return None
    value = 1.0 / admittance_value
    kind = ElementKind.RESISTOR if required == "R" else ElementKind.INDUCTOR
    if admittance_value > 0:
        return _branch(kind, a, b, value, role)
    return _diagnostic(required, a, b, value, role, f"negative {kind.value} required")


def _merge_note(port: int, tandem: float, shunt_inverse: float, merged: float) -> str:
    head = f"port {port} tandem L {format_float(tandem)} merged with shunt 1/L {format_float(shunt_inverse)}"
    if merged == 0.0:
        return f"{head}; they cancel, no inductor to ground"
    return f"{head}; emitted as one inductor of {format_float(1.0 / merged)}"


def emit_netlist(net: NetworkSpec, title: str = "gauge-bridge network") -> Netlist:
    """
    Per-port L||C tandems plus the interaction network.

    Between ports j < k a resistor of conductance -alpha[j,k] and an inductor
    of inverse inductance -beta[j,k]; the shunts to ground carry the row sums
    of alpha and beta so the node equations reproduce Y(s). The inductive shunt
    shares its nodes with the tandem inductor and is merged into it.
    """
    n = net.dim
    elements: List[NetlistElement] = []
    notes: List[str] = []

    for k in range(n):
        port = k + 1
        elements.append(_branch(ElementKind.CAPACITOR, port, 0, float(net.C[k]), "tandem"))
        shunt_inverse = float(np.sum(net.beta[k]))
        merged = 1.0 / net.L[k] + shunt_inverse
        if shunt_inverse != 0.0:
            notes.append(_merge_note(port, float(net.L[k]), shunt_inverse, merged))
        inductor = _admittance_element("L", port, 0, merged, "tandem")
        if inductor is not None:
            elements.append(inductor)
        shunt = _admittance_element("R", port, 0, float(np.sum(net.alpha[k])), "shunt")
        if shunt is not None:
            elements.append(shunt)

    for matrix, required in ((net.alpha, "R"), (net.beta, "L")):
        scale = max(1.0, max_norm(matrix))
        for j in range(n):
            for k in range(j + 1, n):
                if abs(matrix[j, k] - matrix[k, j]) > SYMMETRY_TOLERANCE * scale:
                    elements.append(
                        _diagnostic("", j + 1, k + 1, float("nan"), "coupling", f"asymmetric coupling {required}")
                    )
                    continue
                element = _admittance_element(required, j + 1, k + 1, -float(matrix[j, k]), "coupling")
                if element is not None:
                    elements.append(element)

    counters = {prefix: 0 for prefix in _PREFIX.values()}
    named = []
    for element in elements:
        if element.kind is ElementKind.NEGATIVE_ELEMENT_DIAGNOSTIC:
            named.append(element)
            continue
        prefix = _PREFIX[element.kind]
        counters[prefix] += 1
        named.append(
            NetlistElement(
                kind=element.kind,
                node_plus=element.node_plus,
                node_minus=element.node_minus,
                value=element.value,
                role=element.role,
                name=f"{prefix}{counters[prefix]}",
            )
        )

    netlist = Netlist(ports=n, elements=tuple(named), title=title, notes=tuple(notes))
    if netlist.diagnostics:
        logger.warning("Netlist needs %d non-physical element(s); see '* diag:' lines", len(netlist.diagnostics))
    return netlist


def simulate_network(sys: ClassicalSystem, v0: np.ndarray, vdot0: np.ndarray, grid: TimeGrid) -> Trajectory:
    """Port voltages of v'' + A v' + B v = 0; same integrator as evolve_decoupled."""
    return second_order_integrate(sys.A, sys.B, v0, vdot0, grid.nodes)


# --------------------------------------------------------------------------
# Quantum <-> circuit round trip
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RoundtripReport:
    real_system: RealSystem
    network: NetworkSpec
    real_run: Trajectory
    imag_run: Trajectory
    reference: np.ndarray  # psi(t_j), shape (nodes, n)
    max_real_deviation: float
    max_imag_deviation: float

    @property
    def max_deviation(self) -> float:
        return max(self.max_real_deviation, self.max_imag_deviation)


def quantum_roundtrip(
    spec: HamiltonianSpec,
    psi0: StateVector,
    grid: TimeGrid,
    C: Optional[Sequence[float]] = None,
    policy: FrequencyPolicy = FrequencyPolicy.PROPER_FREQUENCY,
    L: Optional[Sequence[float]] = None,
) -> RoundtripReport:
    """
    Realify a constant Hermitian H, synthesize the network from (Aq, Bq),
    simulate it from the quantum initial conditions, and compare port
    voltages with Re psi and Im psi.
    """
    if not spec.is_constant():
        raise UnsupportedSystemError("Circuit round trip needs a time-independent Hamiltonian")
    H = eval_hamiltonian(spec, grid.t0)
    deviation = max_norm(H - H.conj().T)
    if deviation > 1e-12:
        raise NonHermitianError(f"Circuit round trip needs a Hermitian Hamiltonian (deviation {deviation:.3g})")

    real_system = build_real_system(H, want_decoupled=True)
    require_decoupled(real_system)
    network = synthesize(ClassicalSystem.from_real_system(real_system), C=C, policy=policy, L=L)
    circuit = network.reconstruct()

    phi1, phidot1, phi2, phidot2 = initial_conditions_from_quantum(real_system, psi0)
    real_run = simulate_network(circuit, phi1, phidot1, grid)
    imag_run = simulate_network(circuit, phi2, phidot2, grid)

    reference = states_to_array(evolve_state(spec, psi0, grid))
    report = RoundtripReport(
        real_system=real_system,
        network=network,
        real_run=real_run,
        imag_run=imag_run,
        reference=reference,
        max_real_deviation=max_norm(real_run.q - reference.real),
        max_imag_deviation=max_norm(imag_run.q - reference.imag),
    )
    logger.info(
        "Round trip deviation: real %.3g, imaginary %.3g", report.max_real_deviation, report.max_imag_deviation
    )
    return report


__all__ = [
    "FrequencyPolicy",
    "ElementKind",
    "ClassicalSystem",
    "NetworkSpec",
    "NetlistElement",
    "Netlist",
    "RoundtripReport",
    "passivity_report",
    "synthesize",
    "admittance",
    "interaction_admittance",
    "emit_netlist",
    "simulate_network",
    "quantum_roundtrip",
]
