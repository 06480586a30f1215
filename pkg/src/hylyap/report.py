from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

EVIDENCE_NOTE = (
    "finite-sample numerical evidence: conditions required on dense sets "
    "are tested on the listed grid only"
)


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if f != f or f in (float("inf"), float("-inf")):
            return repr(f)
        return f
    return v


@dataclass
class CheckReport:
    check: str
    worst_margin: float
    counterexamples: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    n_violations: int = 0
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def __bool__(self):
        return self.passed

    def to_dict(self) -> dict:
        return _plain({
            "check": self.check,
            "pass": self.passed,
            "worst_margin": self.worst_margin,
            "n_violations": self.n_violations,
            "counterexamples": self.counterexamples,
            "params": dict(self.params, evidence=EVIDENCE_NOTE),
            "details": self.details,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def collect(check, margins, points, params, extra=None, limit=50, tol=0.0, details=None):
    """Build a report from per-point margins; a point fails when margin > tol.

    ``extra`` is an optional callable ``k -> dict`` adding context for
    failing point ``k``.
    """
    margins = np.asarray(margins, dtype=float)
    points = np.asarray(points, dtype=float)
    if margins.size == 0:
        return CheckReport(check, float("-inf"), [], params, 0, details or {})
    bad = np.flatnonzero(margins > tol)
    order = bad[np.argsort(-margins[bad], kind="stable")][:limit]
    cex = []
    for k in order:
        item = {"x": points[k].tolist(), "value": float(margins[k])}
        if extra is not None:
            item.update(extra(int(k)))
        cex.append(item)
    return CheckReport(check, float(margins.max()), cex, params, int(bad.size), details or {})
