"""Structured verification reports shared by every module and the CLI."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any


@dataclass
class Check:
    name: str
    residual: float
    threshold: float
    passed: bool | None = None
    note: str = ""

    def __post_init__(self):
        self.residual = float(self.residual)
        self.threshold = float(self.threshold)
        if self.passed is None:
            self.passed = bool(self.residual <= self.threshold)

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "residual": _encode_float(self.residual),
            "threshold": _encode_float(self.threshold),
            "verdict": self.verdict,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Check":
        return cls(
            name=d["name"],
            residual=_decode_float(d["residual"]),
            threshold=_decode_float(d["threshold"]),
            passed=d["verdict"] == "PASS",
            note=d.get("note", ""),
        )


@dataclass
class Report:
    """A named list of checks.  ``passed`` is true iff every check passed."""

    command: str
    checks: list[Check] = field(default_factory=list)
    input_digest: str = ""
    wall_time: float = 0.0
    data: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def add(self, name: str, residual: float, threshold: float,
            passed: bool | None = None, note: str = "") -> Check:
        check = Check(name, residual, threshold, passed, note)
        self.checks.append(check)
        return check

    def extend(self, other: "Report", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.residual, c.threshold, c.passed, c.note))

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def max_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "input_digest": self.input_digest,
            "checks": [c.to_dict() for c in self.checks],
            "verdict": self.verdict,
            "wall_time": self.wall_time,
            "data": _jsonable(self.data),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        return cls(
            command=d["command"],
            checks=[Check.from_dict(c) for c in d["checks"]],
            input_digest=d.get("input_digest", ""),
            wall_time=d.get("wall_time", 0.0),
            data=d.get("data", {}),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [
            f"CHECK {c.name} residual={c.residual:.3e} threshold={c.threshold:.3e} {c.verdict}"
            for c in self.checks
        ]
        lines.append(f"OVERALL {self.command} {self.verdict}")
        return "\n".join(lines)


def _jsonable(x):
    """Plain JSON types; rationals and other scalars become strings."""
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "tolist") and not isinstance(x, (str, bytes)):
        return _jsonable(x.tolist())
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return _encode_float(x)
    if isinstance(x, complex):
        return [_encode_float(x.real), _encode_float(x.imag)]
    return str(x)


def _encode_float(x: float):
    # JSON has no inf/nan; keep them lossless as strings
    if math.isfinite(x):
        return x
    return repr(x)


def _decode_float(x) -> float:
    return float(x)
