"""Verification records and their serialization."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Iterable

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"
NOT_APPLICABLE = "not_applicable"
INFO = "info"
STATUSES = (PASS, FAIL, SKIPPED, NOT_APPLICABLE, INFO)

FORMAT_VERSION = 1


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    tag: str
    status: str
    residual: float | None = None
    witness: str | None = None
    detail: str | None = None

    @property
    def failed(self) -> bool:
        return self.status == FAIL


def measured(check_id: str, tag: str, residual: float, tol: float,
             witness: str | None = None, detail: str | None = None) -> CheckResult:
    """A residual-based check; passes when ``residual < tol``."""
    residual = float(residual)
    status = PASS if residual < tol else FAIL
    return CheckResult(check_id, tag, status, residual, witness if status == FAIL else None, detail)


def exact(check_id: str, tag: str, ok: bool, witness: str | None = None,
          detail: str | None = None) -> CheckResult:
    return CheckResult(check_id, tag, PASS if ok else FAIL, 0.0 if ok else None,
                       None if ok else witness, detail)


@dataclass
class VerificationReport:
    records: list[CheckResult] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    tool_version: str = ""

    def extend(self, results: Iterable[CheckResult]) -> None:
        self.records.extend(results)

    @property
    def summary(self) -> dict[str, int]:
        counts = {s: 0 for s in STATUSES}
        for r in self.records:
            counts[r.status] += 1
        counts["total"] = len(self.records)
        return counts

    @property
    def ok(self) -> bool:
        return not any(r.failed for r in self.records)

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "tool_version": self.tool_version,
            "config": self.config,
            "summary": self.summary,
            "records": [asdict(r) for r in self.records],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationReport":
        records = [CheckResult(**r) for r in data.get("records", [])]
        return cls(records, data.get("config", {}), data.get("tool_version", ""))


def _residual_text(r: CheckResult) -> str:
    return "-" if r.residual is None else f"{r.residual:.3e}"


def emit(report: VerificationReport, fmt: str = "json") -> str:
    """Serialize a report; ``json`` round-trips through :func:`parse`."""
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    if fmt == "text":
        lines = []
        for r in report.records:
            line = f"{r.status.upper():<14} {r.check_id:<48} [{r.tag}] residual={_residual_text(r)}"
            if r.witness:
                line += f" witness={r.witness}"
            lines.append(line)
        s = report.summary
        lines.append(f"-- {s['total']} checks: {s[PASS]} passed, {s[FAIL]} failed, "
                     f"{s[SKIPPED]} skipped, {s[NOT_APPLICABLE]} not applicable, {s[INFO]} info")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def parse(text: str) -> VerificationReport:
    return VerificationReport.from_dict(json.loads(text))
