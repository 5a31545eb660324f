"""Diagnostic report container and JSON/CSV helpers."""

from __future__ import annotations

import csv
import json
import math
import operator
from dataclasses import dataclass, field
from typing import Any

import numpy as np

_UNIT_POWER = {"nats": 1, "nats^2": 2}
_RELATIONS = {"<=": operator.le, ">=": operator.ge, "==": None, "<": operator.lt, ">": operator.gt}


@dataclass
class Verdict:
    """A boolean verdict together with the scalars that produced it.

    ``holds`` is recomputable: for ``<=`` it is ``lhs <= rhs + slack``, for
    ``>=`` it is ``lhs + slack >= rhs``, for ``==`` it is ``|lhs - rhs| <= slack``.
    """

    relation: str
    lhs: float
    rhs: float
    slack: float = 0.0
    holds: bool = field(init=False)

    def __post_init__(self):
        if self.relation not in _RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")
        self.holds = self.recompute()

    def recompute(self) -> bool:
        a, b, tol = self.lhs, self.rhs, self.slack
        if self.relation == "==":
            if a == b:
                return True
            return bool(abs(a - b) <= tol)
        if self.relation in ("<=", "<"):
            return bool(_RELATIONS[self.relation](a, b + tol))
        return bool(_RELATIONS[self.relation](a + tol, b))


@dataclass
class DiagReport:
    """Named ladder entries, scalars and verdicts from one diagnostic run.

    ``units`` maps a quantity, scalar or verdict name (without any ``[...]``
    suffix) to ``"nats"`` or ``"nats^2"``; untagged names are probabilities
    or counts and are never rescaled by the ``bits`` presentation flag.
    """

    name: str
    entries: list[dict] = field(default_factory=list)
    scalars: dict[str, float] = field(default_factory=dict)
    verdicts: dict[str, Verdict] = field(default_factory=dict)
    labels: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    units: dict[str, str] = field(default_factory=dict)

    def add(self, n: int, quantity: str, value: float, state_id: str | None = None) -> None:
        self.entries.append({"n": int(n), "quantity": quantity, "state_id": state_id, "value": float(value)})

    def ladder(self, quantity: str, state_id: str | None = None) -> list[tuple[int, float]]:
        return [(e["n"], e["value"]) for e in self.entries
                if e["quantity"] == quantity and e["state_id"] == state_id]

    def tag(self, unit: str, *names: str) -> None:
        if unit not in _UNIT_POWER:
            raise ValueError(f"unknown unit {unit!r}")
        for name in names:
            self.units[name] = unit

    def _factor(self, name: str, bits: bool) -> float:
        if not bits:
            return 1.0
        power = _UNIT_POWER.get(self.units.get(name.split("[", 1)[0]), 0)
        return math.log(2) ** -power

    def to_dict(self, bits: bool = False) -> dict:
        f = lambda name, v: json_number(v * self._factor(name, bits)) if v is not None else None
        return {
            "name": self.name,
            "unit": "bits" if bits else "nats",
            "scalars": {k: f(k, v) for k, v in self.scalars.items()},
            "verdicts": {
                k: {"relation": v.relation, "lhs": f(k, v.lhs), "rhs": f(k, v.rhs),
                    "slack": f(k, v.slack), "holds": v.holds}
                for k, v in self.verdicts.items()
            },
            "labels": self.labels,
            "entries": [dict(e, value=f(e["quantity"], e["value"])) for e in self.entries],
            "notes": list(self.notes),
        }

    def write_json(self, path, bits: bool = False) -> None:
        write_json(path, self.to_dict(bits))

    def write_csv(self, path, bits: bool = False) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "quantity", "state_id", "value"])
            for e in self.entries:
                v = e["value"] * self._factor(e["quantity"], bits)
                w.writerow([e["n"], e["quantity"], e["state_id"] or "", format_float(v)])


def json_number(v):
    """Finite floats pass through; infinities become ``None``; NaN raises."""
    if v is None or isinstance(v, bool):
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    if math.isnan(v):
        raise ValueError("NaN in numeric output")
    return v if math.isfinite(v) else None


def format_float(v: float) -> str:
    if isinstance(v, float) and math.isnan(v):
        raise ValueError("NaN in numeric output")
    return repr(float(v))


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
