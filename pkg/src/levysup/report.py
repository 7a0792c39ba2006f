"""Verification report containers and their JSON form."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from .processes import ProcessSpec

EQ = "eq"          # |computed - target| <= max(abs_tol, 3 err)
LE = "le"          # computed <= target + max(abs_tol, 3 err)
GE = "ge"          # computed >= target - max(abs_tol, 3 err)
FLAG = "flag"      # computed is a 0/1 outcome of a trend or structural check
INFO = "info"      # recorded for context; never fails


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if hasattr(v, "item"):
        return _clean(v.item())
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


@dataclass
class Row:
    """One checked quantity with its error budget."""

    input: Dict[str, Any]
    computed: float
    target: float
    err: float
    abs_tol: float = 0.0
    kind: str = EQ
    note: str = ""

    @property
    def passed(self) -> bool:
        if self.kind == INFO:
            return True
        c, t = float(self.computed), float(self.target)
        if not (math.isfinite(c) and math.isfinite(t)):
            return False
        slack = max(self.abs_tol, 3.0 * (self.err if math.isfinite(self.err) else 0.0))
        if self.kind == EQ:
            return abs(c - t) <= slack
        if self.kind == LE:
            return c <= t + slack
        if self.kind == GE:
            return c >= t - slack
        return bool(c)

    def to_dict(self) -> dict:
        d = {"input": self.input, "computed": self.computed, "target": self.target,
             "err": self.err, "pass": self.passed, "kind": self.kind, "tol": self.abs_tol}
        if self.note:
            d["note"] = self.note
        return _clean(d)


def rel_row(input, computed, target, rel, err=0.0, **kw) -> Row:
    """Row passing when the relative deviation is below ``rel`` (or 3 err)."""
    return Row(input, float(computed), float(target), float(err), rel * abs(float(target)), **kw)


def info_row(input, computed, target, err=0.0, note: str = "") -> Row:
    return Row(input, float(computed), float(target), float(err), 0.0, INFO, note)


def flag_row(input, ok: bool, note: str = "") -> Row:
    return Row(input, 1.0 if ok else 0.0, 1.0, 0.0, 0.0, FLAG, note)


@dataclass
class VerificationReport:
    """Outcome of one theorem or identity check."""

    name: str
    spec: Optional[ProcessSpec]
    rows: List[Row] = field(default_factory=list)
    runtime_s: float = 0.0
    seed: Optional[int] = None
    workers: int = 1
    notes: Dict[str, Any] = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return bool(self.rows) and all(r.passed for r in self.rows)

    def failures(self) -> List[Row]:
        return [r for r in self.rows if not r.passed]

    def to_dict(self) -> dict:
        return _clean({"name": self.name,
                       "spec": self.spec.to_dict() if self.spec is not None else None,
                       "rows": [r.to_dict() for r in self.rows],
                       "verdict": self.verdict,
                       "runtime_s": round(self.runtime_s, 3),
                       "seed": self.seed, "workers": self.workers,
                       "notes": self.notes})

    def to_json(self, include_runtime: bool = True) -> str:
        d = self.to_dict()
        if not include_runtime:
            d["runtime_s"] = None
        return json.dumps(d, indent=2, sort_keys=False)

    def summary(self) -> str:
        status = "PASS" if self.verdict else "FAIL"
        return f"{self.name}: {status} ({sum(r.passed for r in self.rows)}/{len(self.rows)} rows)"
