"""Rendering and all-or-nothing persistence of run artifacts."""

from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from gauge import GaugeSolution
from integrators import Trajectory
from logging_config import setup_logger
from network_synth import NetworkSpec
from quantum_model import StateVector, TimeGrid
from realification import RealSystem, real_system_blocks
from utils import format_float

logger = setup_logger(__name__)


def _render_csv(header: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(value) for value in row])
    return buffer.getvalue()


def _complex_columns(prefix: str, n: int) -> List[str]:
    columns = []
    for r in range(n):
        for c in range(n):
            columns += [f"{prefix}_{r + 1}_{c + 1}_re", f"{prefix}_{r + 1}_{c + 1}_im"]
    return columns


def _interleave(matrix: np.ndarray) -> np.ndarray:
    """Row-major [re, im, re, im, ...] of a complex matrix."""
    flat = np.asarray(matrix, dtype=complex).reshape(-1)
    return np.column_stack([flat.real, flat.imag]).reshape(-1)


def gauge_csv(g: GaugeSolution) -> str:
    """Columns: t, omega_r_c_re/_im row-major, then omega_dot_r_c_re/_im."""
    header = ["t"] + _complex_columns("omega", g.dim) + _complex_columns("omega_dot", g.dim)
    rows = (
        np.concatenate([[t], _interleave(g.omega[j]), _interleave(g.omega_dot[j])])
        for j, t in enumerate(g.grid.nodes)
    )
    return _render_csv(header, rows)


def hamiltonian_samples_csv(grid: TimeGrid, samples: np.ndarray, residuals: np.ndarray) -> str:
    """Columns: t, hprime_r_c_re/_im row-major, residual."""
    n = samples.shape[1]
    header = ["t"] + _complex_columns("hprime", n) + ["residual"]
    rows = (
        np.concatenate([[t], _interleave(samples[j]), [residuals[j]]]) for j, t in enumerate(grid.nodes)
    )
    return _render_csv(header, rows)


def states_csv(path: Sequence[StateVector]) -> str:
    """Columns: t, psi<k>_re, psi<k>_im, norm."""
    n = path[0].dim
    header = ["t"]
    for k in range(1, n + 1):
        header += [f"psi{k}_re", f"psi{k}_im"]
    header.append("norm")
    rows = (np.concatenate([[state.time], _interleave(state.entries), [state.norm()]]) for state in path)
    return _render_csv(header, rows)


def trajectory_csv(trajectory: Trajectory, symbol: str = "v") -> str:
    """Columns: t, v1..vn, vdot1..vdotn."""
    n = trajectory.q.shape[1]
    header = ["t"] + [f"{symbol}{k}" for k in range(1, n + 1)] + [f"{symbol}dot{k}" for k in range(1, n + 1)]
    rows = (
        np.concatenate([[t], q, qdot]) for t, q, qdot in zip(trajectory.times, trajectory.q, trajectory.qdot)
    )
    return _render_csv(header, rows)


def real_system_csv(sys: RealSystem) -> str:
    """One row per matrix row: block name, row index, then the row entries."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["block", "row"] + [f"c{k}" for k in range(1, sys.dim + 1)])
    for name, block in real_system_blocks(sys):
        for r, row in enumerate(block):
            writer.writerow([name, r + 1] + [format_float(value) for value in row])
    return buffer.getvalue()


def network_json(net: NetworkSpec) -> str:
    return json.dumps(net.to_dict(), indent=2) + "\n"


class ArtifactWriter:
    """Stage artifacts in memory, then publish them with write-to-temp and rename."""

    def __init__(self, out_dir: Path) -> None:
        self._out_dir = Path(out_dir)
        self._staged: Dict[str, str] = {}

    def stage(self, name: str, text: str) -> None:
        if os.sep in name or (os.altsep and os.altsep in name):
            raise ValueError(f"Artifact name {name!r} must be a bare file name")
        self._staged[name] = text

    def stage_all(self, files: Dict[str, str]) -> None:
        for name, text in files.items():
            self.stage(name, text)

    def discard(self) -> None:
        self._staged.clear()

    def commit(self) -> List[Path]:
        """Write every staged file; each lands complete or not at all."""
        self._out_dir.mkdir(parents=True, exist_ok=True)
        written: List[Path] = []
        temporary: Optional[Path] = None
        try:
            for name in sorted(self._staged):
                final = self._out_dir / name
                temporary = self._out_dir / f".{name}.tmp"
                with open(temporary, "w", encoding="utf-8", newline="") as handle:
                    handle.write(self._staged[name])
                    handle.flush()
                    os.fsync(handle.fileno())
                os.replace(temporary, final)
                temporary = None
                written.append(final)
        except OSError as exc:
            logger.error("Failed to write artifacts into %s: %s", self._out_dir, exc)
            if temporary is not None and temporary.exists():
                temporary.unlink()
            raise
        finally:
            self._staged.clear()

        logger.info("Wrote %d artifact(s) to %s", len(written), self._out_dir)
        return written


__all__ = [
    "ArtifactWriter",
    "gauge_csv",
    "hamiltonian_samples_csv",
    "states_csv",
    "trajectory_csv",
    "real_system_csv",
    "network_json",
]
