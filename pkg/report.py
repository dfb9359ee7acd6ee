"""Check reports produced by every CLI command."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float
    passed: bool
    # "max": residual must stay <= tolerance; "min": residual must reach tolerance
    mode: str = "max"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "residual": _json_number(self.residual),
            "tolerance": _json_number(self.tolerance),
            "mode": self.mode,
            "passed": self.passed,
        }


def _json_number(value: float) -> Any:
    value = float(value)
    if math.isfinite(value):
        return value
    return repr(value)


@dataclass
class Report:
    command: str
    scenario: str
    seed: int
    checks: List[CheckResult] = field(default_factory=list)
    metrics: Dict[str, float] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def add_check(self, name: str, residual: float, tolerance: float, mode: str = "max") -> CheckResult:
        if any(check.name == name for check in self.checks):
            raise ValueError(f"Check {name!r} already recorded")
        if mode not in {"max", "min"}:
            raise ValueError(f"Unknown check mode {mode!r}")
        residual = float(residual)
        if math.isnan(residual):
            passed = False
        elif mode == "max":
            passed = residual <= tolerance
        else:
            passed = residual >= tolerance
        result = CheckResult(name, residual, float(tolerance), passed, mode)
        self.checks.append(result)
        return result

    def add_note(self, note: str) -> None:
        self.notes.append(note)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "scenario": self.scenario,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [check.to_dict() for check in self.checks],
            "metrics": {name: _json_number(value) for name, value in self.metrics.items()},
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        lines = [
            f"{self.command} report for scenario '{self.scenario}' (seed {self.seed})",
            f"overall: {'PASS' if self.passed else 'FAIL'}",
        ]
        for check in self.checks:
            relation = "<=" if check.mode == "max" else ">="
            status = "ok  " if check.passed else "FAIL"
            lines.append(f"  [{status}] {check.name}: {check.residual:.3e} {relation} {check.tolerance:.1e}")
        for name, value in self.metrics.items():
            lines.append(f"  metric {name}: {value:.6g}")
        for note in self.notes:
            lines.append(f"  note: {note}")
        return "\n".join(lines) + "\n"


__all__ = ["CheckResult", "Report"]
