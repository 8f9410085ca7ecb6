"""Check records and the JSON/text report format."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

PASS, FAIL, UNKNOWN = "pass", "fail", "unknown"


@dataclass
class Check:
    name: str
    anchor: str
    status: str
    value: float | complex | None = None
    tolerance: float = 0.0
    deviation: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        value = self.value
        if isinstance(value, complex):
            value = [value.real, value.imag]
        elif value is not None:
            value = float(value)
        return {
            "name": self.name,
            "paperAnchor": self.anchor,
            "status": self.status,
            "value": value,
            "tolerance": float(self.tolerance),
            "deviation": float(self.deviation),
        }


def bound_check(name: str, anchor: str, deviation: float, tol: float, value=None) -> Check:
    """A check that passes when ``deviation <= tol``."""
    return Check(name, anchor, PASS if deviation <= tol else FAIL, value, tol, float(deviation))


def all_passed(checks: Iterable[Check]) -> bool:
    return all(c.passed for c in checks)


@dataclass
class Report:
    config: dict
    checks: list = field(default_factory=list)

    def extend(self, checks: Iterable[Check], prefix: str = "") -> None:
        for c in checks:
            if prefix:
                c.name = f"{prefix}{c.name}"
            self.checks.append(c)

    def summary(self) -> dict:
        counts = {s: sum(c.status == s for c in self.checks) for s in (PASS, FAIL, UNKNOWN)}
        if counts[FAIL]:
            verdict = FAIL
        elif counts[UNKNOWN]:
            verdict = UNKNOWN
        else:
            verdict = PASS
        return {**counts, "verdict": verdict}

    @property
    def exit_status(self) -> int:
        return 0 if self.summary()["verdict"] == PASS else 1

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "checks": [c.to_dict() for c in self.checks],
            "summary": self.summary(),
        }


def emit_report(report: Report, fmt: str = "json") -> bytes:
    if fmt == "json":
        # floats go out via repr, which round-trips exactly
        text = json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n"
        return text.encode("utf-8")
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    rows = [("check", "status", "value", "deviation", "tol", "identity")]
    for c in report.checks:
        d = c.to_dict()
        v = d["value"]
        if isinstance(v, list):
            v = f"{v[0]:.6g}{v[1]:+.6g}j"
        elif v is not None:
            v = f"{v:.10g}"
        rows.append((c.name, c.status, "-" if v is None else v,
                     f"{c.deviation:.3e}", f"{c.tolerance:.1e}", c.anchor))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]) - 1)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r[:-1], widths)) + "  " + r[-1]
             for r in rows]
    s = report.summary()
    lines.append("")
    lines.append(f"pass={s['pass']} fail={s['fail']} unknown={s['unknown']} verdict={s['verdict']}")
    return ("\n".join(lines) + "\n").encode("utf-8")
