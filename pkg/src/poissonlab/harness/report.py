"""Report records: one JSON object per line, plus a plain-text table."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable, TextIO

PASS = "pass"
FAIL = "fail"


@dataclass(frozen=True)
class ReportRecord:
    suite: str
    check: str
    anchor: str
    residual: float
    tolerance: float
    samples: int
    seed: int
    error: str = ""

    @property
    def verdict(self) -> str:
        if self.error or not math.isfinite(self.residual):
            return FAIL
        return PASS if self.residual <= self.tolerance else FAIL

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_json(self) -> str:
        data = asdict(self)
        data["verdict"] = self.verdict
        if not math.isfinite(self.residual):
            data["residual"] = None
        if not self.error:
            del data["error"]
        return json.dumps(data, sort_keys=True, ensure_ascii=False)


def sort_records(records: Iterable[ReportRecord]) -> list[ReportRecord]:
    return sorted(records, key=lambda r: (r.suite, r.check))


def write_jsonl(records: Iterable[ReportRecord], stream: TextIO) -> None:
    for rec in sort_records(records):
        stream.write(rec.to_json() + "\n")


def format_table(records: Iterable[ReportRecord]) -> str:
    recs = sort_records(records)
    header = ("suite", "check", "anchor", "residual", "tol", "n", "verdict")
    rows = [header]
    for r in recs:
        res = "error" if r.error else f"{r.residual:.2e}"
        rows.append((r.suite, r.check, r.anchor, res, f"{r.tolerance:.0e}", str(r.samples), r.verdict.upper()))
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    failed = sum(1 for r in recs if not r.passed)
    lines.append("")
    lines.append(f"{len(recs)} checks, {len(recs) - failed} passed, {failed} failed")
    for r in recs:
        if r.error:
            lines.append(f"  {r.suite}/{r.check}: {r.error}")
    return "\n".join(lines)
