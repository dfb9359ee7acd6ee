"""
Fixed-step classical Runge-Kutta integration shared by every dynamic model.

Both the decoupled quantum system and the circuit simulation call
``second_order_integrate`` so that identical inputs give identical bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Tuple

import numpy as np

from errors import DimensionMismatchError, NonFiniteError


def rk4_integrate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    nodes: np.ndarray,
) -> np.ndarray:
    """
    Integrate dy/dt = rhs(t, y) over the uniform ``nodes``.

    Returns an array of shape ``(len(nodes),) + y0.shape`` whose first entry
    is ``y0``. Raises NonFiniteError as soon as a step leaves the finite range.
    """
    nodes = np.asarray(nodes, dtype=float)
    y = np.array(y0, copy=True)
    out = np.empty((len(nodes),) + y.shape, dtype=y.dtype)
    out[0] = y
    h = (nodes[-1] - nodes[0]) / (len(nodes) - 1)

    for j in range(len(nodes) - 1):
        t = nodes[j]
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise NonFiniteError(
                f"Non-finite state at t={nodes[j + 1]:.6g} (step {j + 1}); "
                f"step size {h:.3g} is too coarse for the generator"
            )
        out[j + 1] = y
    return out


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution q(t), q'(t) of a second-order system."""

    times: np.ndarray
    q: np.ndarray
    qdot: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        return iter(zip(self.q, self.qdot))

    def energy(self, B: np.ndarray) -> np.ndarray:
        """q'.q' + q.B.q at every node; conserved when A = 0 and B is symmetric."""
        kinetic = np.einsum("ji,ji->j", self.qdot, self.qdot)
        potential = np.einsum("ji,ik,jk->j", self.q, np.asarray(B, dtype=float), self.q)
        return kinetic + potential


def companion_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """First-order form [[0, I], [-B, -A]] of q'' + A q' + B q = 0."""
    n = A.shape[0]
    return np.block([[np.zeros((n, n)), np.eye(n)], [-B, -A]])


def second_order_integrate(
    A: np.ndarray,
    B: np.ndarray,
    q0: np.ndarray,
    qdot0: np.ndarray,
    nodes: np.ndarray,
) -> Trajectory:
    """RK4 on the companion form of q'' + A q' + B q = 0."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    q0 = np.asarray(q0, dtype=float)
    qdot0 = np.asarray(qdot0, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or B.shape != (n, n) or q0.shape != (n,) or qdot0.shape != (n,):
        raise DimensionMismatchError(
            f"Second-order system shapes disagree: A{A.shape}, B{B.shape}, q0{q0.shape}, qdot0{qdot0.shape}"
        )

    generator = companion_matrix(A, B)
    states = rk4_integrate(lambda _t, y: generator @ y, np.concatenate([q0, qdot0]), nodes)
    return Trajectory(times=np.asarray(nodes, dtype=float), q=states[:, :n], qdot=states[:, n:])


__all__ = ["rk4_integrate", "second_order_integrate", "companion_matrix", "Trajectory"]
